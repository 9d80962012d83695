#pragma once

#include <cstdint>
#include <span>

#include "hkt/geometry.hpp"
#include "hkt/spectra.hpp"

namespace hkt {

// n_steps is rounded up to the next power of two for the midpoint construction.
// stratification is the number of interior cells the start points are spread over.
struct McConfig {
  long long n_paths = 100000;
  int n_steps = 64;
  std::uint64_t seed = 1;
  int stratification = 4096;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long long n_effective = 0;
};

// Probability that a Brownian bridge x -> x over [0, t] with free kernel (4 pi t)^{-1} exp(-r^2/4t)
// stays inside the domain. G(x, x, t) = survival / (4 pi t).
McEstimate bridge_survival(const Domain& domain, const Point& x, double t, const McConfig& cfg);

// Dirichlet trace estimate (|Omega| / 4 pi t) * E[survival].
McEstimate mc_trace(const Domain& domain, double t, const McConfig& cfg, BC bc = BC::Dirichlet);

// One estimate per grid point, abs_error = stderr. Grid point i uses seed mixed with i.
TraceSamples mc_trace_samples(const Domain& domain, BC bc, std::span<const double> t_grid, const McConfig& cfg);

namespace serial {
McEstimate bridge_survival(const Domain& domain, const Point& x, double t, const McConfig& cfg);
McEstimate mc_trace(const Domain& domain, double t, const McConfig& cfg, BC bc = BC::Dirichlet);
}  // namespace serial

}  // namespace hkt
