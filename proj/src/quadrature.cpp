#include "hkt/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>

#include "hkt/error.hpp"

namespace hkt {
namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

ArcLengthTable::ArcLengthTable(std::function<double(double)> speed, std::vector<double> breaks,
                               double rel_tol)
    : speed_(std::move(speed)), breaks_(std::move(breaks)) {
  if (breaks_.size() < 2) throw Error(ErrorKind::Argument, "arclength table needs two breaks");
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i] > breaks_[i - 1]))
      throw Error(ErrorKind::Argument, "arclength breaks must increase strictly");

  // Rough total from the midpoint rule sets the per-panel absolute tolerance.
  double rough = 0.0;
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    rough += (breaks_[i] - breaks_[i - 1]) * speed_(0.5 * (breaks_[i] + breaks_[i - 1]));
  panel_tol_ = rel_tol * rough / static_cast<double>(breaks_.size() - 1);

  cumulative_.assign(breaks_.size(), 0.0);
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    cumulative_[i] =
        cumulative_[i - 1] + adaptive_simpson(speed_, breaks_[i - 1], breaks_[i], panel_tol_);
}

double ArcLengthTable::arclength(double u) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), u);
  std::size_t k = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
  if (k >= breaks_.size() - 1) k = breaks_.size() - 2;
  return cumulative_[k] + adaptive_simpson(speed_, breaks_[k], u, panel_tol_);
}

double ArcLengthTable::param(double s) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t k = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  if (k >= breaks_.size() - 1) k = breaks_.size() - 2;
  const double lo = breaks_[k], hi = breaks_[k + 1];
  const double panel = cumulative_[k + 1] - cumulative_[k];
  double u = lo + (hi - lo) * (s - cumulative_[k]) / panel;
  for (int iter = 0; iter < 30; ++iter) {
    const double f = cumulative_[k] + adaptive_simpson(speed_, lo, u, panel_tol_) - s;
    const double step = f / speed_(u);
    u = std::clamp(u - step, lo, hi);
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(u))) break;
  }
  return u;
}

double laplace_transform(const std::function<double(double)>& f, double s) {
  if (!(s > 0.0)) throw Error(ErrorKind::Argument, "Laplace variable must be positive");
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate([&](double t) { return std::exp(-s * t) * f(t); }, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

}  // namespace hkt
