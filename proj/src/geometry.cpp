#include "hkt/geometry.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "hkt/detail/boundary.hpp"
#include "hkt/error.hpp"

namespace hkt {
namespace {

using detail::Boundary;
using detail::CircleCurve;
using detail::Curve;
using detail::CurveHit;
using detail::EllipseCurve;
using detail::HermiteCurve;
using detail::PolylineCurve;

constexpr double kCornerGuard = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

void validate(const Shape& shape) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Geometry, m); };
  std::visit(
      overloaded{
          [&](const IntervalSet& s) {
            if (s.lengths.empty()) fail("interval set needs at least one length");
            for (double l : s.lengths)
              if (!positive_finite(l)) fail("interval lengths must be positive");
          },
          [&](const Rectangle& r) {
            if (!positive_finite(r.a) || !positive_finite(r.b)) fail("rectangle sides must be positive");
          },
          [&](const Disk& d) {
            if (!positive_finite(d.R)) fail("disk radius must be positive");
          },
          [&](const Annulus& a) {
            if (!positive_finite(a.a) || !positive_finite(a.b)) fail("annulus radii must be positive");
            if (!(a.a > a.b)) fail("annulus needs outer radius a > inner radius b");
          },
          [&](const Ellipse& e) {
            if (!positive_finite(e.a) || !positive_finite(e.b)) fail("ellipse semi-axes must be positive");
            if (e.a < e.b) fail("ellipse needs a >= b");
          },
          [&](const Polygon& p) {
            const auto& v = p.vertices;
            const std::size_t n = v.size();
            if (n < 3) fail("polygon needs at least three vertices");
            double area2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              if (!v[i].allFinite()) fail("polygon vertex is not finite");
              if ((v[(i + 1) % n] - v[i]).norm() == 0.0) fail("polygon has a zero-length edge");
              area2 += cross(v[i], v[(i + 1) % n]);
            }
            if (!(area2 > 0.0)) fail("polygon must be counterclockwise with positive area");
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;
                if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
                  fail("polygon is self-intersecting");
              }
          },
          [&](const SmoothBoundary& b) {
            const auto& s = b.samples;
            if (s.size() < 5) fail("smooth boundary needs at least five samples");
            double scale = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) {
              if (!s[i].position.allFinite() || !std::isfinite(s[i].s)) fail("smooth boundary sample is not finite");
              if (s[i].tangent.norm() == 0.0) fail("smooth boundary tangent is zero");
              if (i > 0 && !(s[i].s > s[i - 1].s)) fail("smooth boundary arclength must increase strictly");
              scale = std::max(scale, s[i].position.norm());
            }
            if ((s.front().position - s.back().position).norm() > 1e-12 * std::max(scale, 1.0))
              fail("smooth boundary is not closed");
          },
      },
      shape);
}

std::shared_ptr<const Boundary> build_boundary(const Shape& shape) {
  std::vector<std::unique_ptr<Curve>> c;
  std::visit(overloaded{
                 [&](const IntervalSet&) {},
                 [&](const Rectangle& r) {
                   const double x = 0.5 * r.a, y = 0.5 * r.b;
                   c.push_back(std::make_unique<PolylineCurve>(std::vector<Point>{
                       Point(-x, -y), Point(x, -y), Point(x, y), Point(-x, y)}));
                 },
                 [&](const Disk& d) { c.push_back(std::make_unique<CircleCurve>(d.R, 1)); },
                 [&](const Annulus& a) {
                   c.push_back(std::make_unique<CircleCurve>(a.a, 1));
                   c.push_back(std::make_unique<CircleCurve>(a.b, -1));
                 },
                 [&](const Ellipse& e) { c.push_back(std::make_unique<EllipseCurve>(e.a, e.b)); },
                 [&](const Polygon& p) { c.push_back(std::make_unique<PolylineCurve>(p.vertices)); },
                 [&](const SmoothBoundary& b) { c.push_back(std::make_unique<HermiteCurve>(b.samples)); },
             },
             shape);
  if (c.empty()) return nullptr;
  return std::make_shared<const Boundary>(std::move(c));
}

void require_2d(const Domain& d) {
  if (d.dimension() != 2)
    throw Error(ErrorKind::UnsupportedDimension, "operation needs a 2-D domain, got " + d.describe());
}

double scale_of(const Domain& d) { return d.bounding_box().diagonal().norm(); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(DomainKind k) noexcept {
  switch (k) {
    case DomainKind::IntervalSet: return "interval_set";
    case DomainKind::Rectangle: return "rectangle";
    case DomainKind::Disk: return "disk";
    case DomainKind::Annulus: return "annulus";
    case DomainKind::Ellipse: return "ellipse";
    case DomainKind::Polygon: return "polygon";
    case DomainKind::SmoothBoundary: return "smooth_boundary";
  }
  return "unknown";
}

Domain::Domain(Shape shape) : shape_(std::move(shape)) {
  validate(shape_);
  boundary_ = build_boundary(shape_);
  if (boundary_) {
    const double a = boundary_->component(0).signed_area();
    if (kind() == DomainKind::SmoothBoundary && !(a > 0.0))
      throw Error(ErrorKind::Geometry, "smooth boundary must be counterclockwise");
  }
}

DomainKind Domain::kind() const { return static_cast<DomainKind>(shape_.index()); }

int Domain::dimension() const { return kind() == DomainKind::IntervalSet ? 1 : 2; }

double Domain::area() const {
  return std::visit(
      overloaded{
          [](const IntervalSet& s) {
            double acc = 0.0;
            for (double l : s.lengths) acc += l;
            return acc;
          },
          [](const Rectangle& r) { return r.a * r.b; },
          [](const Disk& d) { return std::numbers::pi * d.R * d.R; },
          [](const Annulus& a) { return std::numbers::pi * (a.a * a.a - a.b * a.b); },
          [](const Ellipse& e) { return std::numbers::pi * e.a * e.b; },
          [this](const Polygon&) { return boundary_->component(0).signed_area(); },
          [this](const SmoothBoundary&) { return boundary_->component(0).signed_area(); },
      },
      shape_);
}

double Domain::perimeter() const {
  if (const auto* s = std::get_if<IntervalSet>(&shape_)) return 2.0 * static_cast<double>(s->lengths.size());
  return boundary_->perimeter();
}

int Domain::connected_components() const {
  if (const auto* s = std::get_if<IntervalSet>(&shape_)) return static_cast<int>(s->lengths.size());
  return 1;
}

int Domain::boundary_components() const {
  if (const auto* s = std::get_if<IntervalSet>(&shape_)) return 2 * static_cast<int>(s->lengths.size());
  return boundary_->size();
}

Eigen::AlignedBox2d Domain::bounding_box() const {
  require_2d(*this);
  return std::visit(
      overloaded{
          [](const IntervalSet&) { return Eigen::AlignedBox2d(); },
          [](const Rectangle& r) {
            return Eigen::AlignedBox2d(Point(-0.5 * r.a, -0.5 * r.b), Point(0.5 * r.a, 0.5 * r.b));
          },
          [](const Disk& d) { return Eigen::AlignedBox2d(Point(-d.R, -d.R), Point(d.R, d.R)); },
          [](const Annulus& a) { return Eigen::AlignedBox2d(Point(-a.a, -a.a), Point(a.a, a.a)); },
          [](const Ellipse& e) { return Eigen::AlignedBox2d(Point(-e.a, -e.b), Point(e.a, e.b)); },
          [](const Polygon& p) {
            Eigen::AlignedBox2d box;
            for (const auto& v : p.vertices) box.extend(v);
            return box;
          },
          [this](const SmoothBoundary&) {
            Eigen::AlignedBox2d box;
            const Curve& c = boundary_->component(0);
            const int n = 4096;
            for (int i = 0; i < n; ++i) box.extend(c.jet(c.length() * i / n).p);
            const Point pad = Point::Constant(0.01 * box.diagonal().norm());
            return Eigen::AlignedBox2d(box.min() - pad, box.max() + pad);
          },
      },
      shape_);
}

bool Domain::contains(const Point& x) const {
  require_2d(*this);
  return std::visit(
      overloaded{
          [](const IntervalSet&) { return false; },
          [&](const Rectangle& r) { return std::abs(x.x()) < 0.5 * r.a && std::abs(x.y()) < 0.5 * r.b; },
          [&](const Disk& d) { return x.squaredNorm() < d.R * d.R; },
          [&](const Annulus& a) {
            const double r2 = x.squaredNorm();
            return r2 < a.a * a.a && r2 > a.b * a.b;
          },
          [&](const Ellipse& e) {
            const double u = x.x() / e.a, v = x.y() / e.b;
            return u * u + v * v < 1.0;
          },
          [&](const Polygon& p) {
            const auto& v = p.vertices;
            const std::size_t n = v.size();
            bool inside = false;
            for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
              if ((v[i].y() > x.y()) != (v[j].y() > x.y())) {
                const double xc = v[j].x() + (x.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
                if (x.x() < xc) inside = !inside;
              }
            }
            return inside && boundary_->component(0).project(x).second > 0.0;
          },
          [&](const SmoothBoundary&) {
            const Curve& c = boundary_->component(0);
            const auto [s, dist] = c.project(x);
            if (!(dist > 0.0)) return false;
            const auto j = c.jet(s);
            return (x - j.p).dot(j.normal()) < 0.0;
          },
      },
      shape_);
}

std::string Domain::describe() const {
  return std::visit(
      overloaded{
          [](const IntervalSet& s) {
            std::string out = "interval_set lengths=[";
            for (std::size_t i = 0; i < s.lengths.size(); ++i) out += (i ? "," : "") + fmt(s.lengths[i]);
            return out + "]";
          },
          [](const Rectangle& r) { return "rectangle a=" + fmt(r.a) + " b=" + fmt(r.b); },
          [](const Disk& d) { return "disk R=" + fmt(d.R); },
          [](const Annulus& a) { return "annulus a=" + fmt(a.a) + " b=" + fmt(a.b); },
          [](const Ellipse& e) { return "ellipse a=" + fmt(e.a) + " b=" + fmt(e.b); },
          [](const Polygon& p) {
            std::string out = "polygon vertices=[";
            for (std::size_t i = 0; i < p.vertices.size(); ++i)
              out += (i ? ",(" : "(") + fmt(p.vertices[i].x()) + "," + fmt(p.vertices[i].y()) + ")";
            return out + "]";
          },
          [](const SmoothBoundary& b) {
            std::string out = "smooth_boundary samples=[";
            for (std::size_t i = 0; i < b.samples.size(); ++i) {
              const auto& s = b.samples[i];
              out += (i ? ",(" : "(") + fmt(s.s) + "," + fmt(s.position.x()) + "," + fmt(s.position.y()) +
                     "," + fmt(s.tangent.x()) + "," + fmt(s.tangent.y()) + ")";
            }
            return out + "]";
          },
      },
      shape_);
}

std::uint64_t Domain::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : describe()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

const detail::Boundary& Domain::boundary() const {
  require_2d(*this);
  return *boundary_;
}

BoundaryPoint boundary_point(const Domain& domain, double s) {
  require_2d(domain);
  const Boundary& b = domain.boundary();
  if (!(s >= 0.0 && s < b.perimeter()))
    throw Error(ErrorKind::Argument, "arclength " + fmt(s) + " outside [0, " + fmt(b.perimeter()) + ")");
  if (b.corner_distance(s) < kCornerGuard)
    throw Error(ErrorKind::Corner, "boundary normal undefined at corner s=" + fmt(s));
  const auto [comp, local] = b.locate(s);
  return b.point(comp, local);
}

BoundaryPoint project_to_boundary(const Domain& domain, const Point& x) {
  require_2d(domain);
  const Boundary& b = domain.boundary();
  int best_c = 0;
  double best_s = 0.0, best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < b.size(); ++c) {
    const auto [s, d] = b.component(c).project(x);
    if (d < best_d) best_d = d, best_s = s, best_c = c;
  }
  return b.point(best_c, best_s);
}

DistanceResult distance_to_boundary(const Domain& domain, const Point& x) {
  require_2d(domain);
  if (!domain.contains(x))
    throw Error(ErrorKind::DomainMembership,
                "point (" + fmt(x.x()) + "," + fmt(x.y()) + ") is not strictly inside " + domain.describe());
  BoundaryPoint p = project_to_boundary(domain, x);
  const double r1 = (x - p.position).norm();
  if (!(r1 > 0.0)) throw Error(ErrorKind::DomainMembership, "point lies on the boundary");
  return {r1, p};
}

double first_boundary_hit(const Domain& domain, const Point& o, const Point& d, double tau_min,
                          BoundaryPoint* hit) {
  const Boundary& b = domain.boundary();
  std::vector<CurveHit> hits;
  double best = -1.0;
  for (int c = 0; c < b.size(); ++c) {
    hits.clear();
    b.component(c).ray_hits(o, d, hits);
    for (const auto& h : hits) {
      if (h.tau > tau_min && (best < 0.0 || h.tau < best)) {
        best = h.tau;
        if (hit) *hit = b.point(c, h.s);
      }
    }
  }
  return best;
}

ChordHit normal_chord_full(const Domain& domain, double s) {
  ChordHit out;
  out.origin = boundary_point(domain, s);
  const double scale = scale_of(domain);
  const Point dir = -out.origin.outward_normal;
  const double tau = first_boundary_hit(domain, out.origin.position, dir, 1e-9 * scale, &out.far);
  if (!(tau > 0.0) || tau > 4.0 * scale)
    throw Error(ErrorKind::Geometry, "inward normal at s=" + fmt(s) + " does not re-enter the boundary");
  out.length = tau;
  return out;
}

double normal_chord(const Domain& domain, double s) { return normal_chord_full(domain, s).length; }

ChordFunction chord_function(const Domain& domain, int n_samples) {
  require_2d(domain);
  if (n_samples < 16) throw Error(ErrorKind::Argument, "chord_function needs n_samples >= 16");
  const Boundary& b = domain.boundary();
  ChordFunction cf;
  cf.domain_perimeter = b.perimeter();
  const double P = b.perimeter();

  std::vector<std::vector<ChordSample>> per_comp(static_cast<std::size_t>(b.size()));
  for (int i = 0; i < n_samples; ++i) {
    const double s = P * i / n_samples;
    if (b.corner_distance(s) < kCornerGuard) continue;
    const ChordSample smp{s, normal_chord(domain, s)};
    cf.samples.push_back(smp);
    per_comp[static_cast<std::size_t>(b.locate(s).first)].push_back(smp);
  }

  for (int c = 0; c < b.size(); ++c) {
    const auto& v = per_comp[static_cast<std::size_t>(c)];
    if (v.size() < 3) continue;
    double lo = v.front().l, hi = v.front().l;
    for (const auto& smp : v) lo = std::min(lo, smp.l), hi = std::max(hi, smp.l);
    if (hi - lo <= 1e-10 * hi) {
      cf.constant_components.push_back(c);
      continue;
    }
    if (!b.component(c).corners().empty()) continue;

    const double L = b.component(c).length();
    const double off = b.offset(c);
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& prev = v[(i + n - 1) % n];
      const auto& cur = v[i];
      const auto& next = v[(i + 1) % n];
      const bool is_max = cur.l > prev.l && cur.l >= next.l;
      const bool is_min = cur.l < prev.l && cur.l <= next.l;
      if (!is_max && !is_min) continue;
      double a = prev.s - off, z = next.s - off;
      const double mid = cur.s - off;
      if (a > mid) a -= L;
      if (z < mid) z += L;
      const double sign = is_max ? -1.0 : 1.0;
      auto f = [&](double x) {
        return sign * normal_chord(domain, off + b.component(c).wrap(x));
      };
      std::uintmax_t iters = 200;
      const auto r = boost::math::tools::brent_find_minima(f, a, z, 52, iters);
      ChordExtremum e;
      e.s = off + b.component(c).wrap(r.first);
      e.l = sign * r.second;
      e.bracket_lo = off + b.component(c).wrap(a);
      e.bracket_hi = off + b.component(c).wrap(z);
      e.maximum = is_max;
      e.component = c;
      cf.extrema.push_back(e);
    }
  }
  return cf;
}

namespace {

std::vector<Point> sampled_locus(const Domain& domain) {
  const Boundary& b = domain.boundary();
  const Eigen::AlignedBox2d box = domain.bounding_box();
  const double P = b.perimeter();
  const int G = 64;
  const Point lo = box.min(), span = box.sizes();

  struct Cell {
    bool inside = false;
    BoundaryPoint proj;
  };
  std::vector<Cell> grid(static_cast<std::size_t>(G * G));
  auto at = [&](int i, int j) -> Cell& { return grid[static_cast<std::size_t>(i * G + j)]; };
  auto pos = [&](int i, int j) {
    return Point(lo.x() + span.x() * (i + 0.5) / G, lo.y() + span.y() * (j + 0.5) / G);
  };
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j) {
      const Point x = pos(i, j);
      Cell& c = at(i, j);
      c.inside = domain.contains(x);
      if (c.inside) c.proj = project_to_boundary(domain, x);
    }

  auto separation = [&](const BoundaryPoint& p, const BoundaryPoint& q) {
    if (p.component != q.component) return std::numeric_limits<double>::infinity();
    const double L = b.component(p.component).length();
    const double d = std::abs(p.s - q.s);
    return std::min(d, L - d);
  };
  const double sep_min = 1e-3 * P;

  std::vector<Point> out;
  auto refine = [&](Point xa, BoundaryPoint pa, Point xb, BoundaryPoint pb) {
    for (int it = 0; it < 60; ++it) {
      const Point xm = 0.5 * (xa + xb);
      const BoundaryPoint pm = project_to_boundary(domain, xm);
      if (separation(pm, pa) <= separation(pm, pb)) {
        xa = xm;
        pa = pm;
      } else {
        xb = xm;
        pb = pm;
      }
    }
    const Point xm = 0.5 * (xa + xb);
    const double da = (xm - pa.position).norm();
    const double db = (xm - pb.position).norm();
    if (separation(pa, pb) > sep_min && std::abs(da - db) <= 1e-6 * std::min(da, db) &&
        domain.contains(xm))
      out.push_back(xm);
  };

  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j) {
      const Cell& c = at(i, j);
      if (!c.inside) continue;
      if (i + 1 < G && at(i + 1, j).inside && separation(c.proj, at(i + 1, j).proj) > sep_min)
        refine(pos(i, j), c.proj, pos(i + 1, j), at(i + 1, j).proj);
      if (j + 1 < G && at(i, j + 1).inside && separation(c.proj, at(i, j + 1).proj) > sep_min)
        refine(pos(i, j), c.proj, pos(i, j + 1), at(i, j + 1).proj);
    }
  return out;
}

}  // namespace

std::vector<CriticalLocus> critical_locus(const Domain& domain) {
  require_2d(domain);
  using Rep = CriticalLocus::Representation;
  std::vector<CriticalLocus> out;
  switch (domain.kind()) {
    case DomainKind::Disk:
      out.push_back({Rep::Point, {Point::Zero()}, 0, false});
      break;
    case DomainKind::Annulus:
      out.push_back({Rep::Empty, {}, 0, false});
      out.push_back({Rep::Empty, {}, 1, false});
      break;
    case DomainKind::Ellipse: {
      const auto& e = std::get<Ellipse>(domain.shape());
      if (e.a == e.b) {
        out.push_back({Rep::Point, {Point::Zero()}, 0, false});
      } else {
        const double x = (e.a * e.a - e.b * e.b) / e.a;
        out.push_back({Rep::Segment, {Point(-x, 0.0), Point(x, 0.0)}, 0, false});
      }
      break;
    }
    default: {
      CriticalLocus c;
      c.points = sampled_locus(domain);
      c.representation = c.points.empty() ? Rep::Empty : Rep::Sampled;
      c.approximate = true;
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace hkt
