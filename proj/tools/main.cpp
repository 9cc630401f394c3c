#include <iostream>

#include "gqmet/cli.hpp"

int main(int argc, char** argv) {
  return gqmet::cli::run(argc, argv, std::cout, std::cerr);
}
