#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hkt/geometry.hpp"

namespace hkt {

enum class BC { Dirichlet, Neumann };
const char* to_string(BC bc) noexcept;
BC parse_bc(const std::string& s);

enum class Backend { Series, Images, MonteCarlo };
const char* to_string(Backend b) noexcept;
Backend parse_backend(const std::string& s);

struct Eigenvalue {
  double lambda = 0.0;
  int multiplicity = 1;
};

// Counting bound N(lambda) <= alpha*lambda + beta*sqrt(lambda) + gamma for lambda >= lambda_max.
struct CountingBound {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

struct Spectrum {
  std::vector<Eigenvalue> eigenvalues;  // strictly increasing
  double lambda_max = 0.0;
  CountingBound counting;
  BC bc = BC::Dirichlet;
  std::uint64_t domain_digest = 0;
  int dimension = 2;

  long long count() const;
  // Upper bound on sum over lambda > lambda_max of m*exp(-lambda*t).
  double tail_bound(double t) const;
  // Smallest cutoff (by doubling) at which the counting bound alone gives tail <= tol at t.
  double required_lambda_max(double t, double tol) const;
};

struct TraceSamples {
  std::vector<double> t;
  std::vector<double> values;
  std::vector<double> abs_error;
  Backend backend = Backend::Series;
  BC bc = BC::Dirichlet;
  std::uint64_t domain_digest = 0;
  int dimension = 2;  // selects the short-time basis in recovery
};

double default_lambda_max(const Domain& domain);

Spectrum eigenvalues(const Domain& domain, BC bc, double lambda_max);

// Dirichlet series summed in descending-lambda order; parallel over grid points.
TraceSamples trace_series(const Spectrum& spectrum, std::span<const double> t_grid, double tol = 1e-12);
double trace_value(const Spectrum& spectrum, double t);

namespace serial {
TraceSamples trace_series(const Spectrum& spectrum, std::span<const double> t_grid, double tol = 1e-12);
Spectrum eigenvalues(const Domain& domain, BC bc, double lambda_max);
}  // namespace serial

// Dirichlet heat kernel of the disk at its centre, G(0,0,t), from the J_0 eigenfunction series.
double disk_center_kernel(double R, double t, double lambda_max = 4e4);

std::vector<double> log_grid(double t_min, double t_max, int n);
std::vector<double> linear_grid(double t_min, double t_max, int n);

}  // namespace hkt
