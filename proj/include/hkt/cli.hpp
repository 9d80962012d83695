#pragma once

#include <iostream>
#include <string>
#include <vector>

#include "hkt/montecarlo.hpp"
#include "hkt/recovery.hpp"
#include "hkt/serialize.hpp"

namespace hkt::cli {

enum ExitCode : int { Ok = 0, ValidationFailed = 1, UsageError = 2, Unexplained = 3 };

struct TimeGrid {
  double t_min = 1e-3;
  double t_max = 1.0;
  int n = 100;
  std::string spacing = "log";  // log | linear
};

struct OrbitSearch {
  double delta_max = 0.0;  // 0: derived from the domain size
  int n_max_reflections = 4;
  BilliardSearch search;
};

struct ExperimentConfig {
  Json raw;  // the document as given; its digest tags every output
  Domain domain = Disk{1.0};
  BC bc = BC::Dirichlet;
  Backend backend = Backend::Series;
  TimeGrid t_grid;
  RecoveryConfig recovery;
  McConfig mc;
  OrbitSearch orbits;
  double lambda_max = 0.0;  // 0: default_lambda_max(domain)
  double series_tol = 1e-9;
  std::string output_dir = ".";

  std::string digest() const { return hex_digest(json_digest(raw)); }
};

ExperimentConfig parse_config(const Json& j);
std::vector<double> make_grid(const TimeGrid& g);
std::vector<std::string> supported_backends(const Domain& d, BC bc);

TraceSamples compute_trace(const ExperimentConfig& cfg);
double default_delta_max(const Domain& d);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};
std::vector<ValidationCheck> validation_suite(bool quick);

// Entry point of the hkt executable.
int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
        std::istream& in = std::cin);

}  // namespace hkt::cli
