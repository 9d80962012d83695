#include "hkt/billiards.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "hkt/detail/boundary.hpp"
#include "hkt/error.hpp"

namespace hkt {
namespace {

using detail::Boundary;
using detail::Curve;
using detail::CurveJet;
using std::numbers::pi;

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double circular_distance(double a, double b, double L) {
  const double d = std::fmod(std::abs(a - b), L);
  return std::min(d, L - d);
}

bool is_smooth(const Domain& d) {
  switch (d.kind()) {
    case DomainKind::Disk:
    case DomainKind::Annulus:
    case DomainKind::Ellipse:
    case DomainKind::SmoothBoundary: return true;
    default: return false;
  }
}


// The open segment a -> b meets the boundary only at its ends.
bool segment_visible(const Domain& d, const Point& a, const Point& b) {
  const double l = (b - a).norm();
  const Point dir = (b - a) / l;
  const double tau = first_boundary_hit(d, a, dir, 1e-7 * l);
  if (tau >= 0.0 && tau < l * (1.0 - 1e-7)) return false;
  return d.contains(0.5 * (a + b));
}

// ---- double normals ----

// Cross product of the chord direction with the far-end normal; zero at a double normal.
double far_end_skew(const Domain& d, double s) {
  const ChordHit h = normal_chord_full(d, s);
  return cross(-h.origin.outward_normal, h.far.outward_normal);
}

bool same_chord(const PeriodicOrbit& a, const PeriodicOrbit& b, double tol) {
  if (std::abs(a.length - b.length) > tol) return false;
  const bool direct = (a.points[0] - b.points[0]).norm() < tol && (a.points[1] - b.points[1]).norm() < tol;
  const bool swapped = (a.points[0] - b.points[1]).norm() < tol && (a.points[1] - b.points[0]).norm() < tol;
  return direct || swapped;
}

PeriodicOrbit chord_orbit(const ChordHit& h, OrbitKind kind) {
  PeriodicOrbit o;
  o.bounce_params = {h.origin.s, h.far.s};
  o.points = {h.origin.position, h.far.position};
  o.length = 2.0 * h.length;
  o.kind = kind;
  o.reflections = 2;
  return o;
}

std::optional<PeriodicOrbit> refine_double_normal(const Domain& d, const ChordExtremum& e) {
  const Boundary& b = d.boundary();
  const Curve& c = b.component(e.component);
  const double off = b.offset(e.component);
  const double L = c.length();
  auto global = [&](double x) { return off + c.wrap(x); };
  auto g = [&](double x) { return far_end_skew(d, global(x)); };

  double lo = e.bracket_lo - off, hi = e.bracket_hi - off, mid = e.s - off;
  if (lo > mid) lo -= L;
  if (hi < mid) hi += L;
  const double gm = g(mid);
  if (std::abs(gm) > 1e-4) return std::nullopt;  // focal extremum: l * kappa = 1, far end oblique

  double root = mid;
  const double glo = g(lo), ghi = g(hi);
  if (gm != 0.0) {
    double a = lo, z = mid, ga = glo, gz = gm;
    if ((glo > 0) == (gm > 0)) a = mid, z = hi, ga = gm, gz = ghi;
    if ((ga > 0) != (gz > 0)) {
      std::uintmax_t it = 100;
      const auto r = boost::math::tools::toms748_solve(g, a, z, ga, gz, boost::math::tools::eps_tolerance<double>(52), it);
      root = 0.5 * (r.first + r.second);
    }
  }
  if (std::abs(g(root)) > 1e-10) return std::nullopt;
  return chord_orbit(normal_chord_full(d, global(root)), OrbitKind::DoubleNormal);
}

std::vector<PeriodicOrbit> parallel_edge_orbits(const Domain& d) {
  std::vector<Point> v;
  if (d.kind() == DomainKind::Rectangle) {
    const auto& r = std::get<Rectangle>(d.shape());
    const double x = 0.5 * r.a, y = 0.5 * r.b;
    v = {Point(-x, -y), Point(x, -y), Point(x, y), Point(-x, y)};
  } else {
    v = std::get<Polygon>(d.shape()).vertices;
  }
  const std::size_t n = v.size();
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + (v[(i + 1) % n] - v[i]).norm();

  std::vector<PeriodicOrbit> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a0 = v[i], a1 = v[(i + 1) % n];
    const Point ta = (a1 - a0).normalized();
    const Point na(ta.y(), -ta.x());
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point b0 = v[j], b1 = v[(j + 1) % n];
      const Point tb = (b1 - b0).normalized();
      if (ta.dot(tb) > -1.0 + 1e-12) continue;
      const double w = (b0 - a0).dot(-na);
      if (!(w > 0.0)) continue;
      const double la = (a1 - a0).norm();
      const double u0 = std::max(0.0, std::min((b0 - a0).dot(ta), (b1 - a0).dot(ta)));
      const double u1 = std::min(la, std::max((b0 - a0).dot(ta), (b1 - a0).dot(ta)));
      if (!(u1 - u0 > 1e-12 * la)) continue;
      const double u = 0.5 * (u0 + u1);
      const Point p = a0 + u * ta;
      const Point q = p - w * na;
      if (!segment_visible(d, p, q)) continue;
      PeriodicOrbit o;
      o.bounce_params = {cum[i] + u, cum[j] + (q - b0).norm()};
      o.points = {p, q};
      o.length = 2.0 * w;
      o.kind = OrbitKind::DoubleNormal;
      o.reflections = 2;
      out.push_back(o);
    }
  }
  return out;
}

// ---- polygon length functional ----

struct LoopEval {
  double length = 0.0;
  double min_edge = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
};

// Nodes are the free boundary points, optionally closed through a fixed anchor.
LoopEval evaluate_loop(const Curve& c, const Eigen::VectorXd& s, const std::optional<Point>& anchor) {
  const int n = static_cast<int>(s.size());
  std::vector<CurveJet> jets(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) jets[static_cast<std::size_t>(i)] = c.jet(c.wrap(s[i]));
  LoopEval ev;
  ev.g = Eigen::VectorXd::Zero(n);
  ev.H = Eigen::MatrixXd::Zero(n, n);
  ev.min_edge = std::numeric_limits<double>::infinity();

  // Node k in [0, m): k = 0 is the anchor when present.
  const int shift = anchor ? 1 : 0;
  const int m = n + shift;
  auto var = [&](int k) { return k - shift; };
  auto pos = [&](int k) { return var(k) < 0 ? *anchor : jets[static_cast<std::size_t>(var(k))].p; };

  for (int k = 0; k < m; ++k) {
    const int kb = (k + 1) % m;
    const Point pa = pos(k), pb = pos(kb);
    const double l = (pb - pa).norm();
    ev.length += l;
    ev.min_edge = std::min(ev.min_edge, l);
    if (!(l > 0.0)) continue;
    const Point e = (pb - pa) / l;
    const Eigen::Matrix2d P = Eigen::Matrix2d::Identity() - e * e.transpose();
    const int ia = var(k), ib = var(kb);
    if (ib >= 0) {
      const auto& jb = jets[static_cast<std::size_t>(ib)];
      ev.g[ib] += e.dot(jb.T);
      ev.H(ib, ib) += jb.second().dot(e) + jb.T.dot(P * jb.T) / l;
    }
    if (ia >= 0) {
      const auto& ja = jets[static_cast<std::size_t>(ia)];
      ev.g[ia] -= e.dot(ja.T);
      ev.H(ia, ia) += -ja.second().dot(e) + ja.T.dot(P * ja.T) / l;
    }
    if (ia >= 0 && ib >= 0) {
      const double h = -jets[static_cast<std::size_t>(ia)].T.dot(P * jets[static_cast<std::size_t>(ib)].T) / l;
      ev.H(ia, ib) += h;
      ev.H(ib, ia) += h;
    }
  }
  return ev;
}

struct Critical {
  Eigen::VectorXd s;
  LoopEval ev;
};

// Levenberg-Marquardt on grad L = 0 with the analytic Hessian as Jacobian.
std::optional<Critical> solve_critical(const Curve& c, Eigen::VectorXd s, const std::optional<Point>& anchor,
                                       double min_edge) {
  const double L = c.length();
  LoopEval ev = evaluate_loop(c, s, anchor);
  double mu = 1e-3;
  const int n = static_cast<int>(s.size());
  for (int it = 0; it < 400; ++it) {
    if (ev.min_edge < min_edge) return std::nullopt;
    const double gn = ev.g.norm();
    if (ev.g.lpNorm<Eigen::Infinity>() < 1e-13) break;
    const Eigen::MatrixXd A = ev.H * ev.H + mu * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd step = -A.ldlt().solve(ev.H * ev.g);
    const double cap = 0.1 * L;
    if (step.lpNorm<Eigen::Infinity>() > cap) step *= cap / step.lpNorm<Eigen::Infinity>();
    Eigen::VectorXd trial = s + step;
    for (int i = 0; i < n; ++i) trial[i] = c.wrap(trial[i]);
    LoopEval te = evaluate_loop(c, trial, anchor);
    if (te.g.norm() < gn && te.min_edge >= min_edge) {
      s = trial;
      ev = std::move(te);
      mu = std::max(mu / 3.0, 1e-15);
    } else {
      mu *= 4.0;
      if (mu > 1e12) break;
    }
  }
  if (ev.g.lpNorm<Eigen::Infinity>() > 1e-10) return std::nullopt;
  return Critical{s, ev};
}

bool degenerate_hessian(const Eigen::MatrixXd& H) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  const auto ev = es.eigenvalues().cwiseAbs();
  return ev.minCoeff() < 1e-6 * ev.maxCoeff();
}

// Rotate to start at the smallest parameter and pick the traversal direction whose second entry is smaller.
std::vector<double> canonical(std::vector<double> p) {
  auto rot = [](std::vector<double> v) {
    std::rotate(v.begin(), std::min_element(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<double> fwd = rot(p);
  std::reverse(p.begin(), p.end());
  std::vector<double> bwd = rot(p);
  return std::lexicographical_compare(fwd.begin(), fwd.end(), bwd.begin(), bwd.end()) ? fwd : bwd;
}

bool same_cycle(const std::vector<double>& a, const std::vector<double>& b, double tol, double L) {
  const std::size_t n = a.size();
  for (int dir : {1, -1})
    for (std::size_t sh = 0; sh < n; ++sh) {
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) {
        const std::size_t j = dir > 0 ? (i + sh) % n : (sh + n - i) % n;
        ok = circular_distance(a[i], b[j], L) < tol;
      }
      if (ok) return true;
    }
  return false;
}

std::vector<Eigen::VectorXd> seeds(const Curve& c, int N, const BilliardSearch& search, bool anchored) {
  const double L = c.length();
  std::vector<Eigen::VectorXd> out;
  for (double phase : {0.0, 0.25 * L, 0.125 * L, 0.0625 * L}) {
    for (int q = 1; q < N; ++q) {
      Eigen::VectorXd s(N);
      for (int i = 0; i < N; ++i) s[i] = c.wrap(phase + L * q * i / N);
      out.push_back(s);
    }
    if (anchored) {
      Eigen::VectorXd s(N);
      for (int i = 0; i < N; ++i) s[i] = c.wrap(phase + 0.5 * L * (i % 2));
      out.push_back(s);
    }
  }
  std::mt19937_64 rng(search.seed);
  std::uniform_real_distribution<double> u(0.0, L);
  for (int k = 0; k < search.n_starts; ++k) {
    Eigen::VectorXd s(N);
    for (int i = 0; i < N; ++i) s[i] = u(rng);
    out.push_back(s);
  }
  return out;
}

struct Candidate {
  std::vector<double> params;
  std::vector<Point> points;
  double length = 0.0;
  bool degenerate = false;
};

std::vector<Candidate> search_critical(const Domain& d, int N, const BilliardSearch& search,
                                       const std::optional<Point>& anchor, bool parallel) {
  const Boundary& b = d.boundary();
  const Curve& c = b.component(0);
  const double L = c.length();
  const auto starts = seeds(c, N, search, anchor.has_value());
  const long long ns = static_cast<long long>(starts.size());
  std::vector<std::optional<Candidate>> found(starts.size());

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long long k = 0; k < ns; ++k) {
    const auto r = solve_critical(c, starts[static_cast<std::size_t>(k)], anchor, 1e-6 * L);
    if (!r) continue;
    Candidate cand;
    cand.length = r->ev.length;
    cand.degenerate = degenerate_hessian(r->ev.H);
    for (int i = 0; i < N; ++i) {
      cand.params.push_back(b.offset(0) + c.wrap(r->s[i]));
      cand.points.push_back(c.jet(c.wrap(r->s[i])).p);
    }
    std::vector<Point> ring = cand.points;
    if (anchor) ring.insert(ring.begin(), *anchor);
    bool visible = true;
    for (std::size_t i = 0; i < ring.size() && visible; ++i)
      visible = segment_visible(d, ring[i], ring[(i + 1) % ring.size()]);
    if (!visible) continue;
    if (!anchor) cand.params = canonical(cand.params);
    found[static_cast<std::size_t>(k)] = std::move(cand);
  }

  std::vector<Candidate> all;
  for (auto& f : found)
    if (f) all.push_back(std::move(*f));
  std::sort(all.begin(), all.end(), [](const Candidate& x, const Candidate& y) {
    if (x.length != y.length) return x.length < y.length;
    return x.params < y.params;
  });
  std::vector<Candidate> merged;
  const double tol = 1e-6 * b.perimeter();
  for (auto& cand : all) {
    bool dup = false;
    for (const auto& m : merged) {
      if (std::abs(m.length - cand.length) > tol) continue;
      if (m.degenerate && cand.degenerate) dup = true;
      else if (anchor) {
        bool same = true;
        for (std::size_t i = 0; i < m.params.size() && same; ++i)
          same = circular_distance(m.params[i], cand.params[i], L) < tol;
        bool rev = true;
        for (std::size_t i = 0; i < m.params.size() && rev; ++i)
          rev = circular_distance(m.params[i], cand.params[m.params.size() - 1 - i], L) < tol;
        dup = same || rev;
      } else {
        dup = same_cycle(m.params, cand.params, tol, L);
      }
      if (dup) break;
    }
    if (!dup) merged.push_back(std::move(cand));
  }
  return merged;
}

std::vector<PeriodicOrbit> n_bounce_impl(const Domain& d, int N, const BilliardSearch& search, bool parallel) {
  if (d.dimension() != 2) throw Error(ErrorKind::UnsupportedDimension, "orbit search needs a 2-D domain");
  if (N < 2 || N > 12) throw Error(ErrorKind::Argument, "reflections must be in [2, 12]");
  if (search.n_starts < 0) throw Error(ErrorKind::Argument, "n_starts must be non-negative");
  if (!is_smooth(d)) throw Error(ErrorKind::Corner, "N-bounce orbits need a smooth boundary");
  std::vector<PeriodicOrbit> out;
  for (auto& c : search_critical(d, N, search, std::nullopt, parallel)) {
    PeriodicOrbit o;
    o.bounce_params = std::move(c.params);
    o.points.clear();
    for (double s : o.bounce_params) o.points.push_back(boundary_point(d, s).position);
    o.length = c.length;
    o.kind = c.degenerate ? OrbitKind::DegenerateFamily : OrbitKind::NBounce;
    o.reflections = N;
    if (reflection_residual(d, o) < 1e-8 && length_gradient_residual(d, o) < 1e-8) out.push_back(std::move(o));
  }
  return out;
}

struct BounceFrame {
  Point u_in, u_out, T, n;
};

std::vector<BounceFrame> frames(const Domain& d, const PeriodicOrbit& o) {
  const std::size_t n = o.bounce_params.size();
  std::vector<BounceFrame> out;
  for (std::size_t i = 0; i < n; ++i) {
    const BoundaryPoint bp = boundary_point(d, o.bounce_params[i]);
    const Point prev = o.points[(i + n - 1) % n], next = o.points[(i + 1) % n];
    const Point T(-bp.outward_normal.y(), bp.outward_normal.x());
    out.push_back({(bp.position - prev).normalized(), (next - bp.position).normalized(), T, bp.outward_normal});
  }
  return out;
}

}  // namespace

const char* to_string(OrbitKind k) noexcept {
  switch (k) {
    case OrbitKind::DoubleNormal: return "double-normal";
    case OrbitKind::NBounce: return "n-bounce";
    case OrbitKind::DegenerateFamily: return "degenerate-family";
  }
  return "unknown";
}

std::vector<PeriodicOrbit> double_normal_orbits(const Domain& domain, const ChordFunction& chord) {
  if (domain.dimension() != 2) throw Error(ErrorKind::UnsupportedDimension, "double normals need a 2-D domain");
  std::vector<PeriodicOrbit> out;
  const double tol = 1e-6 * domain.perimeter();

  if (domain.kind() == DomainKind::Rectangle || domain.kind() == DomainKind::Polygon) return parallel_edge_orbits(domain);

  const Boundary& b = domain.boundary();
  for (int c : chord.constant_components) {
    PeriodicOrbit o = chord_orbit(normal_chord_full(domain, b.offset(c)), OrbitKind::DegenerateFamily);
    const bool dup = std::any_of(out.begin(), out.end(), [&](const PeriodicOrbit& q) {
      return q.kind == OrbitKind::DegenerateFamily && std::abs(q.length - o.length) < tol;
    });
    if (!dup) out.push_back(std::move(o));
  }
  for (const auto& e : chord.extrema) {
    auto o = refine_double_normal(domain, e);
    if (!o) continue;
    if (std::none_of(out.begin(), out.end(), [&](const PeriodicOrbit& q) { return same_chord(q, *o, tol); }))
      out.push_back(std::move(*o));
  }
  std::sort(out.begin(), out.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& c) {
    return a.length != c.length ? a.length < c.length : a.bounce_params < c.bounce_params;
  });
  return out;
}

std::vector<PeriodicOrbit> n_bounce_orbits(const Domain& domain, int N, const BilliardSearch& search) {
  return n_bounce_impl(domain, N, search, true);
}

namespace serial {
std::vector<PeriodicOrbit> n_bounce_orbits(const Domain& domain, int N, const BilliardSearch& search) {
  return n_bounce_impl(domain, N, search, false);
}
}  // namespace serial

std::vector<ReturnLoop> return_loops(const Domain& domain, const Point& x, int K, const BilliardSearch& search) {
  if (domain.dimension() != 2) throw Error(ErrorKind::UnsupportedDimension, "return loops need a 2-D domain");
  if (K < 1 || K > 12) throw Error(ErrorKind::Argument, "reflections must be in [1, 12]");
  if (!is_smooth(domain)) throw Error(ErrorKind::Corner, "return loops need a smooth boundary");
  if (!domain.contains(x)) throw Error(ErrorKind::DomainMembership, "anchor must be inside the domain");
  std::vector<ReturnLoop> out;
  for (auto& c : search_critical(domain, K, search, x, true))
    out.push_back({std::move(c.params), std::move(c.points), c.length, c.degenerate});
  return out;
}

double length_gradient_residual(const Domain& domain, const PeriodicOrbit& orbit) {
  double worst = 0.0;
  for (const auto& f : frames(domain, orbit)) worst = std::max(worst, std::abs(f.T.dot(f.u_in - f.u_out)));
  return worst;
}

double reflection_residual(const Domain& domain, const PeriodicOrbit& orbit) {
  double worst = 0.0;
  for (const auto& f : frames(domain, orbit)) {
    const Point mirrored = f.u_in - 2.0 * f.u_in.dot(f.n) * f.n;
    worst = std::max(worst, (f.u_out - mirrored).norm());
  }
  return worst;
}

LengthSpectrum predict_length_spectrum(const Domain& domain, double delta_max, int n_max_reflections,
                                       const BilliardSearch& search) {
  if (!(delta_max > 0.0)) throw Error(ErrorKind::Argument, "delta_max must be positive");
  LengthSpectrum ls;
  if (domain.dimension() == 1) {
    const auto& lengths = std::get<IntervalSet>(domain.shape()).lengths;
    for (double l : lengths) {
      PeriodicOrbit o;
      o.bounce_params = {0.0, l};
      o.length = 2.0 * l;
      o.kind = OrbitKind::DoubleNormal;
      o.reflections = 2;
      ls.orbits.push_back(o);
    }
  } else {
    if (n_max_reflections < 2 || n_max_reflections > 12)
      throw Error(ErrorKind::Argument, "n_max_reflections must be in [2, 12]");
    ls.orbits = double_normal_orbits(domain, chord_function(domain, 512));
    if (is_smooth(domain))
      for (int N = 3; N <= n_max_reflections; ++N)
        for (auto& o : n_bounce_orbits(domain, N, search)) ls.orbits.push_back(std::move(o));
  }

  std::vector<LengthEntry> raw;
  for (std::size_t j = 0; j < ls.orbits.size(); ++j) {
    const auto& o = ls.orbits[j];
    const double d0 = 0.5 * o.length;
    for (int k = 1; k * d0 <= delta_max * (1.0 + 1e-12); ++k) {
      LengthEntry e;
      e.delta = k * d0;
      e.orbit_length = o.length;
      e.reflections = o.reflections;
      e.multiple = k;
      e.kind = o.kind;
      e.orbit_index = static_cast<int>(j);
      e.source = k == 1 ? "orbit " + std::to_string(j) : "multiple " + std::to_string(k) + " of orbit " + std::to_string(j);
      raw.push_back(e);
    }
  }
  std::stable_sort(raw.begin(), raw.end(), [](const LengthEntry& a, const LengthEntry& b) {
    if (a.delta != b.delta) return a.delta < b.delta;
    return a.multiple < b.multiple;
  });
  for (auto& e : raw) {
    if (!ls.entries.empty() && std::abs(e.delta - ls.entries.back().delta) <= 1e-9 * std::max(1.0, e.delta)) {
      auto& keep = ls.entries.back();
      ++keep.multiplicity;
      if (e.multiple < keep.multiple) {
        const int m = keep.multiplicity;
        keep = e;
        keep.multiplicity = m;
      }
      continue;
    }
    ls.entries.push_back(e);
  }
  return ls;
}

}  // namespace hkt
