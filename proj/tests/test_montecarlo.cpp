#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hkt/error.hpp"
#include "hkt/montecarlo.hpp"
#include "hkt/spectra.hpp"

using namespace hkt;
using std::numbers::pi;

namespace {
McConfig config(long long n, int steps = 64, std::uint64_t seed = 7) {
  McConfig c;
  c.n_paths = n;
  c.n_steps = steps;
  c.seed = seed;
  return c;
}

double exact_trace(const Domain& d, double t) { return trace_value(eigenvalues(d, BC::Dirichlet, 4e4), t); }
}  // namespace

TEST_CASE("straight wall: survival is 1 - exp(-d^2/t)") {
  // Far walls of a 40 x 40 square contribute below 1e-100.
  const Domain sq = Rectangle{40.0, 40.0};
  const double t = 0.25;
  for (double ratio : {0.25, 1.0, 2.0}) {
    const double d = std::sqrt(ratio * t);
    const auto e = bridge_survival(sq, Point(-20.0 + d, 0.0), t, config(200000));
    const double oracle = 1.0 - std::exp(-d * d / t);
    CHECK(std::abs(e.mean - oracle) <= 4 * e.std_error);
  }
  CHECK(1.0 - std::exp(-1.0) == doctest::Approx(0.63212055882855767).epsilon(1e-15));
}

TEST_CASE("disk centre survival matches the eigenfunction series") {
  const double t = 0.1;
  const double oracle = 4 * pi * t * disk_center_kernel(1.0, t);
  const auto e = bridge_survival(Domain(Disk{1.0}), Point(0.0, 0.0), t, config(200000));
  CHECK(std::abs(e.mean - oracle) <= 3 * e.std_error);

  // Short-time series oracle check: 4 pi t G(0,0,t) tends to 1.
  CHECK(4 * pi * 1e-3 * disk_center_kernel(1.0, 1e-3) == doctest::Approx(1.0).epsilon(1e-12));
  // Long-time: single mode 1 / (pi J1(j01)^2) exp(-j01^2 t).
  const double j01 = 2.404825557695773;
  const double j1 = 0.5191474972894669;
  CHECK(disk_center_kernel(1.0, 3.0) == doctest::Approx(std::exp(-j01 * j01 * 3.0) / (pi * j1 * j1)).epsilon(1e-9));
}

TEST_CASE("bridge survival limits") {
  const Domain d = Ellipse{2.0, 1.0};
  CHECK(bridge_survival(d, Point(0.3, 0.1), 1e-4, config(1000)).mean == 1.0);
  CHECK(bridge_survival(d, Point(0.3, 0.1), 50.0, config(1000)).mean == 0.0);
  CHECK(mc_trace(Domain(Disk{1.0}), 20.0, config(2000)).mean == 0.0);
}

TEST_CASE("trace estimates agree with exact traces") {
  const double t = 0.1;
  for (const Domain& d : {Domain(Disk{1.0}), Domain(Rectangle{1.0, 2.0})}) {
    const auto e = mc_trace(d, t, config(200000));
    const double exact = exact_trace(d, t);
    CHECK(std::abs(e.mean - exact) <= 3 * e.std_error);
    CHECK(e.std_error / e.mean < 0.02);
    CHECK(e.n_effective == 200000);
  }
}

TEST_CASE("domains without exact spectra") {
  // Polygon square through the bounding-box sampler against the rectangle series.
  const Domain poly = Polygon{{Point(-0.5, -0.5), Point(0.5, -0.5), Point(0.5, 0.5), Point(-0.5, 0.5)}};
  const auto e = mc_trace(poly, 0.05, config(100000));
  CHECK(std::abs(e.mean - exact_trace(Domain(Rectangle{1.0, 1.0}), 0.05)) <= 3 * e.std_error);

  // Ellipse{1,1} is the unit disk.
  const auto c = mc_trace(Domain(Ellipse{1.0, 1.0}), 0.05, config(100000));
  CHECK(std::abs(c.mean - exact_trace(Domain(Disk{1.0}), 0.05)) <= 3 * c.std_error);

  // Annulus: short-time two-term expansion with area 3 pi and perimeter 6 pi.
  const double t = 0.002;
  const auto a = mc_trace(Domain(Annulus{2.0, 1.0}), t, config(100000));
  const double two_term = 3 * pi / (4 * pi * t) - 6 * pi / (8 * std::sqrt(pi * t));
  CHECK(std::abs(a.mean - two_term) <= 3 * a.std_error + 0.01 * two_term);
}

TEST_CASE("stderr scales as n^-1/2") {
  const Domain d = Disk{1.0};
  const double s4 = mc_trace(d, 0.1, config(10000)).std_error;
  const double s5 = mc_trace(d, 0.1, config(100000)).std_error;
  const double s6 = mc_trace(d, 0.1, config(1000000)).std_error;
  for (double r : {s4 / s5, s5 / s6}) {
    CHECK(r >= std::sqrt(10.0) / 1.5);
    CHECK(r <= std::sqrt(10.0) * 1.5);
  }
}

TEST_CASE("refining the bridge moves the estimate by less than one stderr") {
  const Domain d = Disk{1.0};
  const auto coarse = mc_trace(d, 0.1, config(1000000, 64));
  const auto fine = mc_trace(d, 0.1, config(1000000, 128));
  CHECK(std::abs(fine.mean - coarse.mean) < fine.std_error);
}

TEST_CASE("seeded runs are reproducible and serial equals parallel") {
  const Domain d = Ellipse{1.5, 1.0};
  const auto a = mc_trace(d, 0.07, config(5000, 32, 99));
  const auto b = mc_trace(d, 0.07, config(5000, 32, 99));
  const auto s = serial::mc_trace(d, 0.07, config(5000, 32, 99));
  CHECK(a.mean == b.mean);
  CHECK(a.mean == s.mean);
  CHECK(a.std_error == s.std_error);
  const auto c = mc_trace(d, 0.07, config(5000, 32, 100));
  CHECK(c.mean != a.mean);

  // n_steps rounds up to a power of two.
  CHECK(mc_trace(d, 0.07, config(3000, 17, 5)).mean == mc_trace(d, 0.07, config(3000, 32, 5)).mean);
}

TEST_CASE("Monte Carlo errors") {
  auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Argument;
  };
  const Domain disk = Disk{1.0};
  CHECK(kind_of([&] { mc_trace(disk, 0.1, config(1000), BC::Neumann); }) == ErrorKind::BackendUnavailable);
  CHECK(kind_of([&] { bridge_survival(disk, Point(1.0 - 1e-10, 0.0), 0.1, config(1000)); }) == ErrorKind::DegenerateInput);
  CHECK(kind_of([&] { bridge_survival(disk, Point(2.0, 0.0), 0.1, config(1000)); }) == ErrorKind::DomainMembership);
  CHECK(kind_of([&] { mc_trace(Domain(IntervalSet{{1.0}}), 0.1, config(1000)); }) == ErrorKind::UnsupportedDimension);
  CHECK_THROWS_AS(mc_trace(disk, 0.1, config(99)), Error);
  CHECK_THROWS_AS(mc_trace(disk, 0.1, config(1000, 8)), Error);
  CHECK_THROWS_AS(mc_trace(disk, -1.0, config(1000)), Error);

  const std::vector<double> grid = {0.05, 0.1};
  const auto ts = mc_trace_samples(disk, BC::Dirichlet, grid, config(2000));
  CHECK(ts.backend == Backend::MonteCarlo);
  CHECK(ts.abs_error[0] > 0.0);
}
