#include "hkt/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hkt/bessel.hpp"
#include "hkt/error.hpp"

namespace hkt {
namespace {

using std::numbers::pi;

std::vector<Eigenvalue> merge(std::vector<Eigenvalue> raw) {
  std::sort(raw.begin(), raw.end(), [](const Eigenvalue& a, const Eigenvalue& b) { return a.lambda < b.lambda; });
  std::vector<Eigenvalue> out;
  for (const auto& e : raw) {
    if (!out.empty() && std::abs(e.lambda - out.back().lambda) <= 1e-13 * std::abs(e.lambda))
      out.back().multiplicity += e.multiplicity;
    else
      out.push_back(e);
  }
  return out;
}

void interval_raw(double l, BC bc, double lambda_max, std::vector<Eigenvalue>& out) {
  const int n0 = bc == BC::Dirichlet ? 1 : 0;
  for (int n = n0;; ++n) {
    const double lam = std::pow(n * pi / l, 2);
    if (lam > lambda_max) break;
    out.push_back({lam, 1});
  }
}

std::vector<Eigenvalue> disk_raw(double R, BC bc, double lambda_max, bool parallel) {
  const double x_max = R * std::sqrt(lambda_max);
  const bool deriv = bc == BC::Neumann;
  const int n_max = static_cast<int>(x_max) + 2;
  std::vector<std::vector<double>> zeros(static_cast<std::size_t>(n_max + 1));
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int n = 0; n <= n_max; ++n) zeros[static_cast<std::size_t>(n)] = bessel_j_zeros_below(n, x_max, deriv);

  std::vector<Eigenvalue> out;
  if (deriv) out.push_back({0.0, 1});
  for (int n = 0; n <= n_max; ++n)
    for (double z : zeros[static_cast<std::size_t>(n)]) {
      const double lam = (z / R) * (z / R);
      if (lam <= lambda_max) out.push_back({lam, n == 0 ? 1 : 2});
    }
  return out;
}

Spectrum build(const Domain& domain, BC bc, double lambda_max, bool parallel) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
    throw Error(ErrorKind::Argument, "lambda_max must be positive and finite");
  Spectrum sp;
  sp.lambda_max = lambda_max;
  sp.bc = bc;
  sp.domain_digest = domain.digest();
  sp.dimension = domain.dimension();
  std::vector<Eigenvalue> raw;
  const bool neu = bc == BC::Neumann;

  switch (domain.kind()) {
    case DomainKind::IntervalSet: {
      const auto& ls = std::get<IntervalSet>(domain.shape()).lengths;
      for (double l : ls) {
        interval_raw(l, bc, lambda_max, raw);
        sp.counting.beta += l / pi;
      }
      sp.counting.gamma = neu ? static_cast<double>(ls.size()) : 0.0;
      break;
    }
    case DomainKind::Rectangle: {
      const auto& r = std::get<Rectangle>(domain.shape());
      std::vector<Eigenvalue> xa, yb;
      interval_raw(r.a, bc, lambda_max, xa);
      interval_raw(r.b, bc, lambda_max, yb);
      for (const auto& u : xa)
        for (const auto& v : yb) {
          const double lam = u.lambda + v.lambda;
          if (lam > lambda_max) break;
          raw.push_back({lam, 1});
        }
      sp.counting.alpha = r.a * r.b / (4.0 * pi);
      if (neu) {
        sp.counting.beta = (r.a + r.b) / pi;
        sp.counting.gamma = 1.0;
      }
      break;
    }
    case DomainKind::Disk: {
      const double R = std::get<Disk>(domain.shape()).R;
      raw = disk_raw(R, bc, lambda_max, parallel);
      sp.counting.alpha = R * R / 4.0;
      if (neu) {
        sp.counting.beta = R;
        sp.counting.gamma = 3.0;
      }
      break;
    }
    default:
      throw Error(ErrorKind::BackendUnavailable,
                  std::string("no exact spectrum for ") + to_string(domain.kind()) +
                      "; use the montecarlo backend (Dirichlet) instead");
  }
  sp.eigenvalues = merge(std::move(raw));
  return sp;
}

TraceSamples trace_impl(const Spectrum& sp, std::span<const double> t_grid, double tol, bool parallel) {
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0)) throw Error(ErrorKind::Argument, "trace times must be positive");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw Error(ErrorKind::Argument, "t grid must increase strictly");
  }
  for (double t : t_grid) {
    const double tail = sp.tail_bound(t);
    if (tail > tol)
      throw Error(ErrorKind::Truncation,
                  "tail bound " + std::to_string(tail) + " exceeds tolerance at t=" + std::to_string(t) +
                      "; lambda_max >= " + std::to_string(sp.required_lambda_max(t, tol)) + " is needed");
  }
  TraceSamples out;
  const std::size_t n = t_grid.size();
  out.t.assign(t_grid.begin(), t_grid.end());
  out.values.assign(n, 0.0);
  out.abs_error.assign(n, 0.0);
  out.backend = Backend::Series;
  out.bc = sp.bc;
  out.domain_digest = sp.domain_digest;
  out.dimension = sp.dimension;
  const double rounding = std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(sp.eigenvalues.size()) + 1.0);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (long long i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double v = trace_value(sp, out.t[k]);
    out.values[k] = v;
    out.abs_error[k] = sp.tail_bound(out.t[k]) + rounding * v;
  }
  return out;
}

}  // namespace

const char* to_string(BC bc) noexcept { return bc == BC::Dirichlet ? "dirichlet" : "neumann"; }

BC parse_bc(const std::string& s) {
  if (s == "dirichlet") return BC::Dirichlet;
  if (s == "neumann") return BC::Neumann;
  throw Error(ErrorKind::Parse, "unknown boundary condition '" + s + "' (dirichlet|neumann)");
}

const char* to_string(Backend b) noexcept {
  switch (b) {
    case Backend::Series: return "series";
    case Backend::Images: return "images";
    case Backend::MonteCarlo: return "montecarlo";
  }
  return "unknown";
}

Backend parse_backend(const std::string& s) {
  if (s == "series") return Backend::Series;
  if (s == "images") return Backend::Images;
  if (s == "montecarlo") return Backend::MonteCarlo;
  throw Error(ErrorKind::Parse, "unknown backend '" + s + "' (series|images|montecarlo)");
}

long long Spectrum::count() const {
  long long c = 0;
  for (const auto& e : eigenvalues) c += e.multiplicity;
  return c;
}

double Spectrum::tail_bound(double t) const {
  const double L = lambda_max;
  const double sl = std::sqrt(L);
  const double bracket = counting.alpha * (L + 1.0 / t) + counting.beta * (sl + 0.5 / (t * sl)) +
                         counting.gamma - static_cast<double>(count());
  return std::max(0.0, std::exp(-L * t) * bracket);
}

double Spectrum::required_lambda_max(double t, double tol) const {
  double L = std::max(lambda_max, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double sl = std::sqrt(L);
    const double b = std::exp(-L * t) *
                     (counting.alpha * (L + 1.0 / t) + counting.beta * (sl + 0.5 / (t * sl)) + counting.gamma);
    if (b <= tol) return L;
    L *= 1.25;
  }
  return L;
}

double default_lambda_max(const Domain& domain) { return domain.dimension() == 1 ? 1e6 : 4e4; }

Spectrum eigenvalues(const Domain& domain, BC bc, double lambda_max) { return build(domain, bc, lambda_max, true); }

double trace_value(const Spectrum& sp, double t) {
  double acc = 0.0;
  for (auto it = sp.eigenvalues.rbegin(); it != sp.eigenvalues.rend(); ++it)
    acc += it->multiplicity * std::exp(-it->lambda * t);
  return acc;
}

TraceSamples trace_series(const Spectrum& sp, std::span<const double> t_grid, double tol) {
  return trace_impl(sp, t_grid, tol, true);
}

namespace serial {
TraceSamples trace_series(const Spectrum& sp, std::span<const double> t_grid, double tol) {
  return trace_impl(sp, t_grid, tol, false);
}
Spectrum eigenvalues(const Domain& domain, BC bc, double lambda_max) { return build(domain, bc, lambda_max, false); }
}  // namespace serial

double disk_center_kernel(double R, double t, double lambda_max) {
  if (!(R > 0.0) || !(t > 0.0)) throw Error(ErrorKind::Argument, "disk_center_kernel needs R > 0 and t > 0");
  const auto zeros = bessel_j_zeros_below(0, R * std::sqrt(lambda_max), false);
  double acc = 0.0;
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    const double j1 = bessel_j(1, *it);
    acc += std::exp(-(*it / R) * (*it / R) * t) / (pi * R * R * j1 * j1);
  }
  return acc;
}

std::vector<double> log_grid(double t_min, double t_max, int n) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n < 2) throw Error(ErrorKind::Argument, "invalid log grid");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double r = std::log(t_max / t_min);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = t_min * std::exp(r * i / (n - 1));
  g.front() = t_min;
  g.back() = t_max;
  return g;
}

std::vector<double> linear_grid(double t_min, double t_max, int n) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n < 2) throw Error(ErrorKind::Argument, "invalid linear grid");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = t_min + (t_max - t_min) * i / (n - 1);
  g.back() = t_max;
  return g;
}

}  // namespace hkt
