#pragma once

#include <stdexcept>
#include <string>

namespace gqmet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf or structurally invalid input.
class MalformedInput : public Error {
 public:
  using Error::Error;
};

// Covariance violating the uncertainty bound, or a non-CP channel.
class UnphysicalState : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// Pure state (P = 1) with a nonvanishing purity derivative.
class PureStateSingularity : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// Position/momentum grid too small or aliased.
class GridError : public Error {
 public:
  using Error::Error;
};

// Fock truncation leaves too much population above the cutoff.
class CutoffError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class EmptyResult : public Error {
 public:
  using Error::Error;
};

}  // namespace gqmet
