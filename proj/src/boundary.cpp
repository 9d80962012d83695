#include "hkt/detail/boundary.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "hkt/error.hpp"

namespace hkt::detail {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double wrap_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

// Roots of A tau^2 + B tau + C with cancellation-free formula.
int solve_quadratic(double A, double B, double C, double& r0, double& r1) {
  if (A == 0.0) return 0;
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return 0;
  const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
  if (q == 0.0) {
    r0 = r1 = 0.0;
    return 2;
  }
  r0 = q / A;
  r1 = C / q;
  if (r0 > r1) std::swap(r0, r1);
  return 2;
}

// Bracketed root of f with full double precision.
template <class F>
double bracket_root(F f, double lo, double hi, double flo, double fhi) {
  std::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

double Curve::wrap(double s) const {
  const double L = length();
  double r = std::fmod(s, L);
  if (r < 0.0) r += L;
  if (r >= L) r = 0.0;
  return r;
}

// ---------------------------------------------------------------- circle

double CircleCurve::length() const { return kTwoPi * r_; }

double CircleCurve::s_of_angle(double theta) const {
  return wrap(orient_ > 0 ? wrap_angle(theta) * r_ : wrap_angle(-theta) * r_);
}

CurveJet CircleCurve::jet(double s) const {
  const double theta = orient_ * wrap(s) / r_;
  const double c = std::cos(theta), sn = std::sin(theta);
  return {Point(r_ * c, r_ * sn), Point(-orient_ * sn, orient_ * c), orient_ / r_};
}

std::pair<double, double> CircleCurve::project(const Point& x) const {
  const double n = x.norm();
  const double theta = n > 0.0 ? std::atan2(x.y(), x.x()) : 0.0;
  return {s_of_angle(theta), std::abs(n - r_)};
}

void CircleCurve::ray_hits(const Point& o, const Point& d, std::vector<CurveHit>& out) const {
  double t0, t1;
  if (solve_quadratic(d.squaredNorm(), 2.0 * o.dot(d), o.squaredNorm() - r_ * r_, t0, t1) == 0)
    return;
  for (double tau : {t0, t1}) {
    const Point h = o + tau * d;
    out.push_back({tau, s_of_angle(std::atan2(h.y(), h.x()))});
  }
}

double CircleCurve::signed_area() const { return orient_ * std::numbers::pi * r_ * r_; }

// ---------------------------------------------------------------- ellipse

EllipseCurve::EllipseCurve(double a, double b) : a_(a), b_(b) {
  std::vector<double> breaks(65);
  for (int k = 0; k <= 64; ++k) breaks[static_cast<std::size_t>(k)] = kTwoPi * k / 64.0;
  breaks.back() = kTwoPi;
  table_ = ArcLengthTable(
      [a, b](double t) {
        const double sn = std::sin(t), c = std::cos(t);
        return std::sqrt(a * a * sn * sn + b * b * c * c);
      },
      std::move(breaks));
}

double EllipseCurve::angle_of(double s) const { return table_.param(wrap(s)); }

double EllipseCurve::s_of_angle(double theta) const {
  return wrap(table_.arclength(wrap_angle(theta)));
}

CurveJet EllipseCurve::jet(double s) const {
  const double t = angle_of(s);
  const double sn = std::sin(t), c = std::cos(t);
  const Point d1(-a_ * sn, b_ * c);
  const double sp = d1.norm();
  return {Point(a_ * c, b_ * sn), d1 / sp, a_ * b_ / (sp * sp * sp)};
}

std::pair<double, double> EllipseCurve::project(const Point& x) const {
  constexpr int n = 256;
  const double h = kTwoPi / n;
  auto dist2 = [&](double t) {
    return (Point(a_ * std::cos(t), b_ * std::sin(t)) - x).squaredNorm();
  };
  int best = 0;
  double best_d = dist2(0.0);
  for (int k = 1; k < n; ++k) {
    const double dk = dist2(k * h);
    if (dk < best_d) best_d = dk, best = k;
  }
  std::uintmax_t iters = 200;
  const double lo = best * h - h, hi = best * h + h;
  double t = boost::math::tools::brent_find_minima(dist2, lo, hi, 52, iters).first;
  for (int it = 0; it < 4; ++it) {
    const double sn = std::sin(t), c = std::cos(t);
    const Point p(a_ * c, b_ * sn), d1(-a_ * sn, b_ * c), d2(-a_ * c, -b_ * sn);
    const double f = (p - x).dot(d1);
    const double fp = d1.squaredNorm() + (p - x).dot(d2);
    if (fp <= 0.0) break;
    const double tn = t - f / fp;
    if (tn < lo || tn > hi || dist2(tn) > dist2(t)) break;
    t = tn;
  }
  return {s_of_angle(t), std::sqrt(dist2(t))};
}

void EllipseCurve::ray_hits(const Point& o, const Point& d, std::vector<CurveHit>& out) const {
  const Point os(o.x() / a_, o.y() / b_), ds(d.x() / a_, d.y() / b_);
  double t0, t1;
  if (solve_quadratic(ds.squaredNorm(), 2.0 * os.dot(ds), os.squaredNorm() - 1.0, t0, t1) == 0)
    return;
  for (double tau : {t0, t1}) {
    const Point h = os + tau * ds;
    out.push_back({tau, s_of_angle(std::atan2(h.y(), h.x()))});
  }
}

double EllipseCurve::signed_area() const { return std::numbers::pi * a_ * b_; }

// ---------------------------------------------------------------- polyline

PolylineCurve::PolylineCurve(std::vector<Point> vertices) : v_(std::move(vertices)) {
  cumulative_.assign(v_.size() + 1, 0.0);
  for (std::size_t i = 0; i < v_.size(); ++i)
    cumulative_[i + 1] = cumulative_[i] + (v_[(i + 1) % v_.size()] - v_[i]).norm();
}

CurveJet PolylineCurve::jet(double s) const {
  s = wrap(s);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  i = std::min(i, v_.size() - 1);
  const Point e = v_[(i + 1) % v_.size()] - v_[i];
  const Point T = e / e.norm();
  return {v_[i] + (s - cumulative_[i]) * T, T, 0.0};
}

std::pair<double, double> PolylineCurve::project(const Point& x) const {
  double best_s = 0.0, best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v_.size(); ++i) {
    const Point a = v_[i];
    const Point e = v_[(i + 1) % v_.size()] - a;
    const double len2 = e.squaredNorm();
    const double mu = std::clamp((x - a).dot(e) / len2, 0.0, 1.0);
    const double dist = (a + mu * e - x).norm();
    if (dist < best_d) {
      best_d = dist;
      best_s = cumulative_[i] + mu * std::sqrt(len2);
    }
  }
  return {wrap(best_s), best_d};
}

void PolylineCurve::ray_hits(const Point& o, const Point& d, std::vector<CurveHit>& out) const {
  for (std::size_t i = 0; i < v_.size(); ++i) {
    const Point a = v_[i];
    const Point e = v_[(i + 1) % v_.size()] - a;
    const double denom = cross(d, e);
    if (std::abs(denom) <= 1e-300) continue;
    const double tau = cross(a - o, e) / denom;
    const double mu = cross(a - o, d) / denom;
    if (mu < 0.0 || mu >= 1.0) continue;
    out.push_back({tau, cumulative_[i] + mu * (cumulative_[i + 1] - cumulative_[i])});
  }
}

double PolylineCurve::signed_area() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < v_.size(); ++i) acc += cross(v_[i], v_[(i + 1) % v_.size()]);
  return 0.5 * acc;
}

std::vector<double> PolylineCurve::corners() const {
  return {cumulative_.begin(), cumulative_.end() - 1};
}

// ---------------------------------------------------------------- hermite

HermiteCurve::HermiteCurve(const std::vector<BoundarySample>& samples) {
  u_.reserve(samples.size());
  for (const auto& smp : samples) {
    u_.push_back(smp.s);
    p_.push_back(smp.position);
    m_.push_back(smp.tangent.normalized());
  }
  table_ = ArcLengthTable([this](double u) { return eval_u(u).d1.norm(); }, u_);
}

std::size_t HermiteCurve::segment_of(double u) const {
  auto it = std::upper_bound(u_.begin(), u_.end(), u);
  std::size_t i = it == u_.begin() ? 0 : static_cast<std::size_t>(it - u_.begin()) - 1;
  return std::min(i, u_.size() - 2);
}

HermiteCurve::Derivs HermiteCurve::eval_u(double u) const {
  const double span = u_.back() - u_.front();
  u = u_.front() + std::fmod(u - u_.front(), span);
  if (u < u_.front()) u += span;
  const std::size_t i = segment_of(u);
  const double h = u_[i + 1] - u_[i];
  const double t = (u - u_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const Point& p0 = p_[i];
  const Point& p1 = p_[i + 1];
  const Point m0 = h * m_[i];
  const Point m1 = h * m_[i + 1];
  Derivs r;
  r.p = (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * p1 +
        (t3 - t2) * m1;
  r.d1 = ((6 * t2 - 6 * t) * p0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * p1 +
          (3 * t2 - 2 * t) * m1) /
         h;
  r.d2 = ((12 * t - 6) * p0 + (6 * t - 4) * m0 + (-12 * t + 6) * p1 + (6 * t - 2) * m1) / (h * h);
  return r;
}

CurveJet HermiteCurve::jet(double s) const {
  const Derivs dv = eval_u(table_.param(wrap(s)));
  const double sp = dv.d1.norm();
  return {dv.p, dv.d1 / sp, cross(dv.d1, dv.d2) / (sp * sp * sp)};
}

std::pair<double, double> HermiteCurve::project(const Point& x) const {
  const std::size_t nseg = u_.size() - 1;
  double best_u = u_.front(), best_d = std::numeric_limits<double>::infinity(), best_h = 0.0;
  for (std::size_t i = 0; i < nseg; ++i) {
    const double h = (u_[i + 1] - u_[i]) / kSub;
    for (int k = 0; k < kSub; ++k) {
      const double u = u_[i] + k * h;
      const double dd = (eval_u(u).p - x).squaredNorm();
      if (dd < best_d) best_d = dd, best_u = u, best_h = h;
    }
  }
  auto dist2 = [&](double u) { return (eval_u(u).p - x).squaredNorm(); };
  std::uintmax_t iters = 200;
  const double lo = best_u - best_h, hi = best_u + best_h;
  double u = boost::math::tools::brent_find_minima(dist2, lo, hi, 52, iters).first;
  for (int it = 0; it < 4; ++it) {
    const Derivs dv = eval_u(u);
    const double f = (dv.p - x).dot(dv.d1);
    const double fp = dv.d1.squaredNorm() + (dv.p - x).dot(dv.d2);
    if (fp <= 0.0) break;
    const double un = u - f / fp;
    if (un < lo || un > hi || dist2(un) > dist2(u)) break;
    u = un;
  }
  const double span = u_.back() - u_.front();
  double uw = u_.front() + std::fmod(u - u_.front(), span);
  if (uw < u_.front()) uw += span;
  return {wrap(table_.arclength(uw)), std::sqrt(dist2(u))};
}

void HermiteCurve::ray_hits(const Point& o, const Point& d, std::vector<CurveHit>& out) const {
  auto g = [&](double u) { return cross(eval_u(u).p - o, d); };
  const double dd = d.squaredNorm();
  for (std::size_t i = 0; i + 1 < u_.size(); ++i) {
    const double h = (u_[i + 1] - u_[i]) / kSub;
    double ulo = u_[i], glo = g(ulo);
    for (int k = 1; k <= kSub; ++k) {
      const double uhi = k == kSub ? u_[i + 1] : u_[i] + k * h;
      const double ghi = g(uhi);
      double root = std::numeric_limits<double>::quiet_NaN();
      if (glo == 0.0) {
        root = ulo;
      } else if ((glo < 0.0) != (ghi < 0.0) && ghi != 0.0) {
        root = bracket_root(g, ulo, uhi, glo, ghi);
      }
      if (!std::isnan(root)) {
        const Point p = eval_u(root).p;
        out.push_back({(p - o).dot(d) / dd, wrap(table_.arclength(root))});
      }
      ulo = uhi;
      glo = ghi;
    }
  }
}

double HermiteCurve::signed_area() const {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < u_.size(); ++i) {
    acc += adaptive_simpson(
        [this](double u) {
          const Derivs dv = eval_u(u);
          return cross(dv.p, dv.d1);
        },
        u_[i], u_[i + 1], 1e-14);
  }
  return 0.5 * acc;
}

// ---------------------------------------------------------------- boundary

Boundary::Boundary(std::vector<std::unique_ptr<Curve>> components) : comps_(std::move(components)) {
  offsets_.assign(comps_.size() + 1, 0.0);
  for (std::size_t i = 0; i < comps_.size(); ++i) offsets_[i + 1] = offsets_[i] + comps_[i]->length();
}

std::pair<int, double> Boundary::locate(double s) const {
  const double P = perimeter();
  double r = std::fmod(s, P);
  if (r < 0.0) r += P;
  if (r >= P) r = 0.0;
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), r);
  int i = static_cast<int>(it - offsets_.begin()) - 1;
  i = std::clamp(i, 0, size() - 1);
  return {i, r - offsets_[static_cast<std::size_t>(i)]};
}

BoundaryPoint Boundary::point(int comp, double local) const {
  const Curve& c = component(comp);
  local = c.wrap(local);
  const CurveJet j = c.jet(local);
  return {offset(comp) + local, j.p, j.normal(), j.kappa, comp};
}

double Boundary::corner_distance(double s) const {
  const auto [comp, local] = locate(s);
  const Curve& c = component(comp);
  const double L = c.length();
  double best = std::numeric_limits<double>::infinity();
  for (double cs : c.corners()) {
    const double d = std::abs(local - cs);
    best = std::min({best, d, L - d});
  }
  return best;
}

}  // namespace hkt::detail
