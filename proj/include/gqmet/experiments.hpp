#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "gqmet/csv.hpp"
#include "gqmet/metrology.hpp"
#include "gqmet/probe.hpp"

namespace gqmet {

enum class ChannelKind { attenuator, amplifier };
enum class Parameter { phi, rg, mbar, epsilon };
enum class Output { qfi_closed, qfi_generic, qfi_bures, eigen_product, coherence, dcoherence };

std::string to_string(ChannelKind k);
std::string to_string(Parameter p);
std::string to_string(Output o);
ChannelKind parse_channel(const std::string& s);
Parameter parse_parameter(const std::string& s);
Output parse_output(const std::string& s);

// Uniform grid including both end points.
struct GridSpec {
  double start = 0.0;
  double stop = 1.0;
  int count = 2;

  std::vector<double> values() const;
};

struct SweepSpec {
  ChannelKind channel = ChannelKind::attenuator;
  Parameter estimate = Parameter::phi;  // phi | rg | mbar
  Parameter scan = Parameter::phi;      // phi | rg | mbar | epsilon

  // Fixed values; the scanned one is overwritten per grid point.
  double phi = 0.7853981633974483;
  double rg = 1.0;
  double mbar = 0.5;
  double nbar = 0.5819767068693265;  // beta = omega = 1
  MeasurementSettings settings{};
  double sigma = 1.0;  // overall scale for epsilon scans

  GridSpec grid;
  std::vector<Output> outputs{Output::qfi_closed};
  double tau = kDefaultTau;
  double step = kDefaultStep;
  AttMbarVariant variant = AttMbarVariant::corrected;

  void validate() const;
};

// Worker count from GQMET_THREADS, else hardware concurrency.
unsigned default_threads();

/// One row per grid value, in grid order: the scanned value, the requested
/// outputs, then an `invalid` flag (1 when the probe violates the
/// uncertainty bound; its outputs are nan).
Table run_sweep(const SweepSpec& spec, unsigned threads = 1);

struct CoherenceMap {
  std::vector<double> sigma_q;
  std::vector<double> sigma_p;
  std::vector<double> values;  // row-major, sigma_q rows
  std::vector<bool> invalid;

  double at(std::size_t iq, std::size_t ip) const { return values[iq * sigma_p.size() + ip]; }
  Table to_table() const;
};

CoherenceMap coherence_map(const GridSpec& sigma_q, const GridSpec& sigma_p, double nbar);

struct PowerLawPoint {
  double epsilon = 0.0;
  double value = 0.0;
};

struct FitMode {
  bool free_exponent = true;
  double n = 3.0;  // used when free_exponent is false

  static FitMode free_n() { return {}; }
  static FitMode fixed_n(double n) { return {false, n}; }
};

struct FitResult {
  double alpha = 0.0;
  double beta = 0.0;
  double n = 0.0;
  double rms_residual = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  std::string grid_used;
  std::vector<std::string> warnings;

  double evaluate(double epsilon) const;
};

/// I = alpha + beta eps^n with alpha pinned to I(0). The free exponent is
/// fitted by least squares on ln(I - alpha) against ln eps; the residual is
/// reported in the original scale.
FitResult fit_power_law(const std::vector<PowerLawPoint>& points, FitMode mode = FitMode::free_n());

struct Table1Row {
  std::string name;
  double alpha_ours = 0.0;
  double alpha_published = 0.0;
  double beta_ours = 0.0;
  double beta_published = 0.0;
  double n_ours = 0.0;
  double rms = 0.0;
  double alpha_rel_diff = 0.0;
  bool mismatch = false;
  std::string note;
};

inline constexpr double kTable1AlphaTolerance = 0.05;
inline constexpr double kTable1ExpectedExponent = 3.0;
inline constexpr double kTable1ExponentTolerance = 0.5;

// The four epsilon scans used for the power-law table: eps in [0, 0.9], 19 points.
SweepSpec table1_scan(ChannelKind channel, Parameter estimate);
std::vector<Table1Row> reproduce_table1(unsigned threads = 1);
Table table1_to_table(const std::vector<Table1Row>& rows);

enum class FigureId { fig2, fig3, fig4, fig5, fig6 };
FigureId parse_figure(const std::string& s);
std::string to_string(FigureId id);

struct NamedTable {
  std::string name;  // file stem, "<figure>_<panel>"
  Table table;
};

std::vector<NamedTable> figure_tables(FigureId id, unsigned threads = 1);

// Writes <dir>/<name>.csv for every panel; returns the paths in panel order.
std::vector<std::filesystem::path> reproduce_figure(FigureId id, const std::filesystem::path& dir,
                                                    unsigned threads = 1,
                                                    const std::vector<std::string>& provenance = {});

// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace gqmet
