#include "hkt/images.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hkt/error.hpp"

namespace hkt {
namespace {

using std::numbers::pi;

void check_cfg(const ImageExpansion& cfg) {
  if (!(cfg.a > 0.0)) throw Error(ErrorKind::Argument, "image expansion needs a > 0");
  if (cfg.n_images < 0) throw Error(ErrorKind::Argument, "image count must be non-negative");
}

double sign_of(BC bc) { return bc == BC::Dirichlet ? -1.0 : 1.0; }

}  // namespace

double images_green_1d(double y, double x, double t, const ImageExpansion& cfg) {
  check_cfg(cfg);
  if (!(t > 0.0)) throw Error(ErrorKind::Argument, "time must be positive");
  const double s = sign_of(cfg.bc);
  const double q = 4.0 * t;
  double acc = 0.0;
  // Symmetric pairing n, -n keeps G(y,x) == G(x,y) bit for bit.
  for (int n = cfg.n_images; n >= 1; --n) {
    const double sh = 2.0 * n * cfg.a;
    const double d1 = y - x, d2 = y + x;
    acc += (std::exp(-(d1 + sh) * (d1 + sh) / q) + std::exp(-(d1 - sh) * (d1 - sh) / q)) +
           s * (std::exp(-(d2 + sh) * (d2 + sh) / q) + std::exp(-(d2 - sh) * (d2 - sh) / q));
  }
  acc += std::exp(-(y - x) * (y - x) / q) + s * std::exp(-(y + x) * (y + x) / q);
  return acc / (2.0 * std::sqrt(pi * t));
}

double images_trace_1d(double t, const ImageExpansion& cfg) {
  check_cfg(cfg);
  if (!(t > 0.0)) throw Error(ErrorKind::Argument, "time must be positive");
  const double lead = cfg.a / (2.0 * std::sqrt(pi * t));
  double images = 0.0;
  for (int n = cfg.n_images; n >= 1; --n) images += 2.0 * std::exp(-std::pow(n * cfg.a, 2) / t);
  return lead * images + (lead + 0.5 * sign_of(cfg.bc));
}

double images_truncation_bound(double t, const ImageExpansion& cfg) {
  const int m = cfg.n_images + 1;
  const double first = std::exp(-std::pow(m * cfg.a, 2) / t);
  const double ratio = std::exp(-(2.0 * m + 1.0) * cfg.a * cfg.a / t);
  return cfg.a / std::sqrt(pi * t) * first / (1.0 - ratio);
}

MultiIntervalTrace multi_interval_trace(std::span<const double> lengths, BC bc, double t, int n_images) {
  if (lengths.empty()) throw Error(ErrorKind::Argument, "multi_interval_trace needs at least one length");
  MultiIntervalTrace out;
  out.dominant.r = *std::min_element(lengths.begin(), lengths.end());
  for (double l : lengths) {
    out.value += images_trace_1d(t, {l, bc, n_images});
    if (l == out.dominant.r) ++out.dominant.m;
  }
  return out;
}

TraceSamples images_trace(const Domain& domain, BC bc, std::span<const double> t_grid, int n_images) {
  TraceSamples out;
  out.backend = Backend::Images;
  out.bc = bc;
  out.domain_digest = domain.digest();
  out.dimension = domain.dimension();
  out.t.assign(t_grid.begin(), t_grid.end());
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    const double t = out.t[i];
    if (!(t > 0.0) || (i > 0 && !(t > out.t[i - 1])))
      throw Error(ErrorKind::Argument, "t grid must be positive and strictly increasing");
    double v = 0.0, err = 0.0;
    if (const auto* s = std::get_if<IntervalSet>(&domain.shape())) {
      v = multi_interval_trace(s->lengths, bc, t, n_images).value;
      for (double l : s->lengths) err += images_truncation_bound(t, {l, bc, n_images});
    } else if (const auto* r = std::get_if<Rectangle>(&domain.shape())) {
      const ImageExpansion ca{r->a, bc, n_images}, cb{r->b, bc, n_images};
      const double pa = images_trace_1d(t, ca), pb = images_trace_1d(t, cb);
      const double ea = images_truncation_bound(t, ca), eb = images_truncation_bound(t, cb);
      v = pa * pb;
      err = pa * eb + pb * ea + ea * eb;
    } else {
      throw Error(ErrorKind::BackendUnavailable,
                  std::string("images backend supports interval_set and rectangle, not ") + to_string(domain.kind()));
    }
    out.values.push_back(v);
    out.abs_error.push_back(err + 4.0 * eps * std::abs(v));
  }
  return out;
}

DiskAxisEikonals disk_axis_eikonals(double x1, double x2, double R) {
  return {std::abs(x1 - x2), (R - x1) + (R - x2), (R + x1) + (R + x2)};
}

DiskAxisApproximation disk_axis_approximation(double x1, double x2, double R, double t) {
  if (!(R > 0.0) || !(t > 0.0)) throw Error(ErrorKind::Argument, "disk axis approximation needs R > 0 and t > 0");
  if (std::abs(x1) > R || std::abs(x2) > R) throw Error(ErrorKind::Argument, "axis points must satisfy |x| <= R");
  const double Z = 1.0 / (4.0 * pi * t);
  auto g = [&](double S) { return Z * std::exp(-S * S / (4.0 * t)); };
  const DiskAxisEikonals e = disk_axis_eikonals(x1, x2, R);
  DiskAxisApproximation out;
  out.G0 = g(e.S0);
  out.G1 = g(e.S1);
  out.G2 = g(e.S2);
  const DiskAxisEikonals ep = disk_axis_eikonals(x1, R, R);
  const DiskAxisEikonals em = disk_axis_eikonals(x1, -R, R);
  out.boundary_error_plusR = g(ep.S0) - g(ep.S1) - g(ep.S2);
  out.boundary_error_minusR = g(em.S0) - g(em.S1) - g(em.S2);
  return out;
}

double disk_triangle_eikonal(double r, double R) {
  if (!(R > 0.0) || r < 0.0 || r > R) throw Error(ErrorKind::Argument, "disk_triangle_eikonal needs 0 <= r <= R");
  const double x2 = (r / R) * (r / R);
  const double q = std::sqrt(8.0 * x2 + 1.0);
  return R * (2.0 * std::sqrt(2.0 * x2 + 1.0 + q) / std::sqrt(4.0 * x2 + 1.0 + q) + std::sqrt(4.0 * x2 + 2.0 + 2.0 * q));
}

}  // namespace hkt
