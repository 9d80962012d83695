#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hkt/detail/boundary.hpp"
#include "hkt/error.hpp"
#include "hkt/geometry.hpp"

using namespace hkt;
using std::numbers::pi;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an hkt::Error");
  return ErrorKind::Argument;
}

// Arclength of the ellipse from theta = 0, independent of the library's table.
double ellipse_arc(double a, double b, double theta) {
  auto speed = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(speed, 0.0, theta, 20, 1e-15);
}

SmoothBoundary sampled_circle(double R, int n) {
  SmoothBoundary sb;
  for (int i = 0; i <= n; ++i) {
    const double t = 2 * pi * i / n;
    sb.samples.push_back({R * t, Point(R * std::cos(t), R * std::sin(t)), Point(-std::sin(t), std::cos(t))});
  }
  sb.samples.back().position = sb.samples.front().position;
  return sb;
}

}  // namespace

TEST_CASE("boundary points on the disk, ellipse and rectangle") {
  const Domain disk = Disk{1.0};
  auto p = boundary_point(disk, 0.0);
  CHECK(p.position.x() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.outward_normal.x() == doctest::Approx(1.0));
  CHECK(p.curvature == doctest::Approx(1.0));

  const Domain ell = Ellipse{2.0, 1.0};
  p = boundary_point(ell, 0.0);
  CHECK((p.position - Point(2, 0)).norm() < 1e-14);
  CHECK((p.outward_normal - Point(1, 0)).norm() < 1e-14);
  CHECK(p.curvature == doctest::Approx(2.0).epsilon(1e-13));

  const Domain rect = Rectangle{1.0, 2.0};
  p = boundary_point(rect, 2.0);  // midpoint of the right side (length 2)
  CHECK((p.position - Point(0.5, 0.0)).norm() < 1e-15);
  CHECK((p.outward_normal - Point(1, 0)).norm() < 1e-15);
  CHECK(p.curvature == 0.0);
}

TEST_CASE("ellipse arclength matches an independent quadrature") {
  const double a = 2.0, b = 1.0;
  const Domain ell = Ellipse{a, b};
  const double P = 4.0 * a * std::comp_ellint_2(std::sqrt(1.0 - b * b / (a * a)));
  CHECK(ell.perimeter() == doctest::Approx(P).epsilon(1e-12));
  for (double theta : {0.3, 1.0, 1.7, 2.9, 4.0, 5.5}) {
    const double s = ellipse_arc(a, b, theta);
    const auto bp = boundary_point(ell, s);
    CHECK((bp.position - Point(a * std::cos(theta), b * std::sin(theta))).norm() < 1e-11);
    const double k = a * b / std::pow(a * a * std::sin(theta) * std::sin(theta) +
                                           b * b * std::cos(theta) * std::cos(theta), 1.5);
    CHECK(bp.curvature == doctest::Approx(k).epsilon(1e-10));
    CHECK(std::abs(bp.outward_normal.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("annulus inner circle has inward-pointing outward normal and negative curvature") {
  const Domain ann = Annulus{2.0, 1.0};
  CHECK(ann.perimeter() == doctest::Approx(6 * pi));
  const auto p = boundary_point(ann, 4 * pi);
  CHECK(p.component == 1);
  CHECK((p.position - Point(1, 0)).norm() < 1e-15);
  CHECK((p.outward_normal - Point(-1, 0)).norm() < 1e-15);
  CHECK(p.curvature == doctest::Approx(-1.0));
}

TEST_CASE("boundary_point errors") {
  const Domain rect = Rectangle{1.0, 2.0};
  CHECK(kind_of([&] { boundary_point(rect, 0.0); }) == ErrorKind::Corner);
  CHECK(kind_of([&] { boundary_point(rect, 1.0 + 1e-10); }) == ErrorKind::Corner);
  CHECK_NOTHROW(boundary_point(rect, 1.0 + 1e-8));
  const Domain seg = IntervalSet{{1.0}};
  CHECK(kind_of([&] { boundary_point(seg, 0.0); }) == ErrorKind::UnsupportedDimension);
  CHECK(kind_of([&] { boundary_point(Domain(Disk{1.0}), 7.0); }) == ErrorKind::Argument);
}

TEST_CASE("distance to boundary examples") {
  auto r = distance_to_boundary(Domain(Disk{1.0}), Point(0.25, 0));
  CHECK(r.r1 == doctest::Approx(0.75));
  CHECK((r.projection.position - Point(1, 0)).norm() < 1e-15);

  r = distance_to_boundary(Domain(Annulus{2.0, 1.0}), Point(1.4, 0));
  CHECK(r.r1 == doctest::Approx(0.4));
  CHECK(r.projection.component == 1);
  CHECK((r.projection.position - Point(1, 0)).norm() < 1e-14);

  r = distance_to_boundary(Domain(Ellipse{2.0, 1.0}), Point(0, 0));
  CHECK(r.r1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(std::abs(r.projection.position.y()) - 1.0) < 1e-9);
  CHECK(std::abs(r.projection.position.x()) < 1e-7);

  const Domain disk = Disk{1.0};
  CHECK(kind_of([&] { distance_to_boundary(disk, Point(2, 0)); }) == ErrorKind::DomainMembership);
  CHECK(kind_of([&] { distance_to_boundary(disk, Point(1, 0)); }) == ErrorKind::DomainMembership);
}

TEST_CASE("distance to boundary is minimal over random boundary samples") {
  const std::vector<Domain> domains = {
      Domain(Ellipse{2.0, 1.0}), Domain(Annulus{2.0, 1.0}), Domain(Rectangle{1.0, 2.0}),
      Domain(Polygon{{Point(0, 0), Point(3, 0), Point(3, 1), Point(1, 1), Point(1, 3), Point(0, 3)}}),
      Domain(sampled_circle(1.0, 64))};
  std::mt19937_64 rng(7);
  for (const auto& d : domains) {
    const auto box = d.bounding_box();
    std::uniform_real_distribution<double> ux(box.min().x(), box.max().x()), uy(box.min().y(), box.max().y());
    std::uniform_real_distribution<double> us(0.0, d.perimeter());
    std::vector<Point> ys;
    for (int k = 0; k < 10000; ++k) {
      const double s = us(rng);
      const auto& b = d.boundary();
      const auto [c, loc] = b.locate(s);
      ys.push_back(b.point(c, loc).position);
    }
    int tested = 0;
    while (tested < 20) {
      const Point x(ux(rng), uy(rng));
      if (!d.contains(x)) continue;
      ++tested;
      const double r1 = distance_to_boundary(d, x).r1;
      double m = 1e300;
      for (const auto& y : ys) m = std::min(m, (x - y).norm());
      CHECK(r1 <= m + 1e-12);
    }
  }
}

TEST_CASE("normal chord examples and far-end invariants") {
  const Domain disk = Disk{1.5};
  for (double s : {0.0, 1.0, 4.0, 9.0}) CHECK(normal_chord(disk, s) == doctest::Approx(3.0).epsilon(1e-14));

  const double a = 2.0, b = 1.0;
  const Domain ell = Ellipse{a, b};
  const double quarter = ellipse_arc(a, b, pi / 2);
  CHECK(normal_chord(ell, quarter) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(normal_chord(ell, 0.0) == doctest::Approx(4.0).epsilon(1e-12));

  for (int i = 0; i < 50; ++i) {
    const double s = ell.perimeter() * (i + 0.37) / 50.0;
    const auto h = normal_chord_full(ell, s);
    const Point q = h.far.position;
    CHECK(std::abs(q.x() * q.x() / (a * a) + q.y() * q.y() / (b * b) - 1.0) < 1e-9);
    const Point dir = (q - h.origin.position).normalized();
    CHECK((dir + h.origin.outward_normal).norm() < 1e-9);
  }

  const Domain ann = Annulus{2.0, 1.0};
  CHECK(normal_chord(ann, 0.3) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(normal_chord(ann, 4 * pi + 0.3) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("chord function on circle-like and elliptic boundaries") {
  auto cf = chord_function(Domain(Disk{1.0}), 64);
  CHECK(cf.samples.size() == 64);
  for (const auto& s : cf.samples) CHECK(s.l == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(cf.constant_components == std::vector<int>{0});
  CHECK(cf.extrema.empty());

  cf = chord_function(Domain(Ellipse{1.0, 1.0}), 64);
  for (const auto& s : cf.samples) CHECK(s.l == doctest::Approx(2.0).epsilon(1e-12));

  const Domain ell = Ellipse{2.0, 1.0};
  cf = chord_function(ell, 512);
  double lo = 1e300, hi = 0.0;
  for (const auto& s : cf.samples) lo = std::min(lo, s.l), hi = std::max(hi, s.l);
  CHECK(hi == doctest::Approx(4.0).epsilon(1e-4));
  // The global minimum sits where the chord reaches the centre of curvature, below the minor axis.
  CHECK(lo < 2.0);
  int n_major = 0, n_minor = 0, n_focal = 0;
  for (const auto& e : cf.extrema) {
    if (e.maximum && std::abs(e.l - 4.0) < 1e-12) {
      ++n_major;
    } else if (e.maximum && std::abs(e.l - 2.0) < 1e-12) {
      ++n_minor;
    } else if (!e.maximum) {
      ++n_focal;
      CHECK(e.l * boundary_point(ell, e.s).curvature == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  CHECK(n_major == 2);
  CHECK(n_minor == 2);
  CHECK(n_focal == 4);
  CHECK(cf.extrema.size() == 8);

  CHECK_THROWS_AS(chord_function(ell, 8), Error);
}

TEST_CASE("ellipse chord function is symmetric under reflection") {
  const Domain ell = Ellipse{2.0, 1.0};
  const double P = ell.perimeter();
  for (int i = 1; i < 40; ++i) {
    const double s = P * i / 40.0 + 0.013;
    CHECK(std::abs(normal_chord(ell, s) - normal_chord(ell, P - s)) < 1e-9);
  }
}

TEST_CASE("critical locus closed forms") {
  using Rep = CriticalLocus::Representation;
  auto loc = critical_locus(Domain(Ellipse{2.0, 1.0}));
  REQUIRE(loc.size() == 1);
  CHECK(loc[0].representation == Rep::Segment);
  CHECK(std::abs(loc[0].points[0].x() + 1.5) < 1e-12);
  CHECK(std::abs(loc[0].points[1].x() - 1.5) < 1e-12);

  // Evolute (ax)^(2/3) + (by)^(2/3) = (a^2 - b^2)^(2/3) at y = 0.
  for (auto [a, b] : {std::pair{2.0, 1.0}, std::pair{3.0, 0.5}, std::pair{1.3, 1.2}}) {
    const double x = std::pow(a * a - b * b, 1.0) / a;
    const auto l = critical_locus(Domain(Ellipse{a, b}));
    const double ax = a * l[0].points[1].x();
    CHECK(std::abs(std::pow(ax, 2.0 / 3.0) - std::pow(a * a - b * b, 2.0 / 3.0)) < 1e-12);
    CHECK(std::abs(l[0].points[1].x() - x) < 1e-12);
  }

  loc = critical_locus(Domain(Disk{1.0}));
  CHECK(loc[0].representation == Rep::Point);
  CHECK(loc[0].points[0].norm() == 0.0);

  loc = critical_locus(Domain(Annulus{2.0, 1.0}));
  REQUIRE(loc.size() == 2);
  CHECK(loc[0].representation == Rep::Empty);
  CHECK(loc[1].representation == Rep::Empty);
  CHECK(loc[1].component_index == 1);
}

TEST_CASE("sampled critical locus of a rectangle lies on its medial axis") {
  const Domain rect = Rectangle{1.0, 2.0};
  const auto loc = critical_locus(rect);
  REQUIRE(loc.size() == 1);
  CHECK(loc[0].approximate);
  REQUIRE(loc[0].points.size() > 20);
  bool central = false;
  for (const auto& x : loc[0].points) {
    CHECK(rect.contains(x));
    std::array<double, 4> d = {0.5 - x.x(), 0.5 + x.x(), 1.0 - x.y(), 1.0 + x.y()};
    std::sort(d.begin(), d.end());
    CHECK(std::abs(d[0] - d[1]) <= 1e-6 * d[0]);
    if (std::abs(x.x()) < 1e-6 && std::abs(x.y()) < 0.4) central = true;
  }
  CHECK(central);
}

TEST_CASE("smooth boundary from circle samples approximates the disk") {
  const Domain sb = sampled_circle(1.0, 128);
  CHECK(sb.area() == doctest::Approx(pi).epsilon(1e-6));
  CHECK(sb.perimeter() == doctest::Approx(2 * pi).epsilon(1e-6));
  CHECK(distance_to_boundary(sb, Point(0.25, 0)).r1 == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(normal_chord(sb, 0.5) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(boundary_point(sb, 1.0).curvature == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(Domain(Disk{-1.0}), Error);
  CHECK_THROWS_AS(Domain(Annulus{1.0, 2.0}), Error);
  CHECK_THROWS_AS(Domain(Ellipse{1.0, 2.0}), Error);
  CHECK_THROWS_AS(Domain(IntervalSet{{}}), Error);
  CHECK_THROWS_AS(Domain(Polygon{{Point(0, 0), Point(0, 1), Point(1, 1), Point(1, 0)}}), Error);  // clockwise
  CHECK_THROWS_AS(Domain(Polygon{{Point(0, 0), Point(1, 1), Point(1, 0), Point(0, 1)}}), Error);  // bowtie
  auto sb = sampled_circle(1.0, 16);
  sb.samples.back().position = Point(0.9, 0.0);
  CHECK_THROWS_AS(Domain{sb}, Error);
}

TEST_CASE("geometry results are reproducible") {
  const Domain ell = Ellipse{2.0, 1.0};
  const auto a = chord_function(ell, 64);
  const auto b = chord_function(ell, 64);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].l == b.samples[i].l);
  CHECK(Domain(Disk{1.0}).digest() == Domain(Disk{1.0}).digest());
  CHECK(Domain(Disk{1.0}).digest() != Domain(Disk{2.0}).digest());
}
