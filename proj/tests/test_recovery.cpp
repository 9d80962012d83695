#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "doctest.h"
#include "hkt/billiards.hpp"
#include "hkt/error.hpp"
#include "hkt/images.hpp"
#include "hkt/quadrature.hpp"
#include "hkt/recovery.hpp"
#include "hkt/spectra.hpp"

using namespace hkt;
using std::numbers::pi;

namespace {

TraceSamples synthetic(const std::vector<double>& grid, const std::function<double(double)>& f, int dimension,
                       double rel = 1e-15) {
  TraceSamples tr;
  tr.dimension = dimension;
  for (double t : grid) {
    tr.t.push_back(t);
    tr.values.push_back(f(t));
    tr.abs_error.push_back(rel * std::abs(f(t)));
  }
  return tr;
}

Residual synthetic_residual(const std::vector<double>& grid, const std::function<double(double)>& f, int dimension = 2) {
  Residual r;
  r.dimension = dimension;
  for (double t : grid) {
    r.t.push_back(t);
    r.r.push_back(f(t));
    r.sigma.push_back(1e-15 * std::abs(f(t)) + 1e-300);
  }
  return r;
}

const TraceSamples& interval_trace(std::vector<double> lengths, BC bc = BC::Dirichlet) {
  static std::map<std::pair<std::vector<double>, int>, TraceSamples> cache;
  auto key = std::make_pair(lengths, static_cast<int>(bc));
  auto it = cache.find(key);
  if (it == cache.end()) {
    const auto grid = log_grid(1e-3, 1.0, 400);
    it = cache.emplace(key, trace_series(eigenvalues(Domain(IntervalSet{lengths}), bc, 1e7), grid)).first;
  }
  return it->second;
}

const TraceSamples& planar_trace(const Domain& d, BC bc = BC::Dirichlet) {
  static std::map<std::pair<std::uint64_t, int>, TraceSamples> cache;
  auto key = std::make_pair(d.digest(), static_cast<int>(bc));
  auto it = cache.find(key);
  if (it == cache.end()) {
    const auto grid = log_grid(1e-3, 1.0, 300);
    it = cache.emplace(key, trace_series(eigenvalues(d, bc, 4e4), grid, 1e-9)).first;
  }
  return it->second;
}

}  // namespace

TEST_CASE("algebraic fit is exact on a pure power series") {
  const auto grid = log_grid(1e-3, 0.1, 120);
  const double c[5] = {0.7, -1.3, 0.25, 0.4, -0.08};
  const auto tr = synthetic(grid, [&](double t) {
    return c[0] / t + c[1] / std::sqrt(t) + c[2] + c[3] * std::sqrt(t) + c[4] * t;
  }, 2);
  const auto sw = fit_algebraic(tr, 5, {1e-3, 0.1});
  for (int n = 0; n < 5; ++n) CHECK(std::abs(sw.coefficient(n) - c[n]) < 1e-10 * (1.0 + std::abs(c[n])));
  CHECK(sw.area() == doctest::Approx(4 * pi * 0.7).epsilon(1e-12));
  CHECK(sw.perimeter() == doctest::Approx(8 * std::sqrt(pi) * 1.3).epsilon(1e-12));
  CHECK(sw.constant() == doctest::Approx(0.25).epsilon(1e-10));

  const auto one = synthetic(grid, [](double t) { return 2.0 / std::sqrt(t) - 0.5 + 0.1 * std::sqrt(t); }, 1);
  const auto s1 = fit_algebraic(one, 3, {1e-3, 0.1});
  CHECK(s1.a0 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s1.constant() == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(s1.exponent(0) == -0.5);
  CHECK(sw.exponent(0) == -1.0);
}

TEST_CASE("Kac coefficients of the disk and the rectangle") {
  const auto& disk = planar_trace(Domain(Disk{1.0}));
  const auto sw = fit_algebraic(disk, 5, {1e-3, 2e-2});
  CHECK(std::abs(sw.area() - pi) < 1e-3);
  CHECK(std::abs(sw.perimeter() - 2 * pi) < 1e-2);
  CHECK(std::abs(sw.constant() - 1.0 / 6.0) < 1e-2);

  const auto& rect = planar_trace(Domain(Rectangle{1.0, 2.0}));
  const auto sr = fit_algebraic_auto(rect, 5);
  CHECK(std::abs(sr.area() - 2.0) < 1e-4);
  CHECK(std::abs(sr.perimeter() - 6.0) < 1e-3);
  CHECK(std::abs(sr.constant() - 0.25) < 1e-3);

  // Neumann changes only the sign of the boundary term.
  const auto sn = fit_algebraic_auto(planar_trace(Domain(Rectangle{1.0, 2.0}), BC::Neumann), 5);
  CHECK(sn.a1 > 0.0);
  CHECK(sr.a1 < 0.0);
  CHECK(std::abs(sn.perimeter() - 6.0) < 1e-3);
}

TEST_CASE("sequential limits") {
  const auto& I = interval_trace({1.0});
  const auto li = limit_extract(I);
  CHECK(li.area == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(li.perimeter == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(li.constant == doctest::Approx(-0.5).epsilon(1e-10));

  const auto ld = limit_extract(planar_trace(Domain(Disk{1.0})));
  CHECK(std::abs(ld.area - pi) < 1e-6);
  CHECK(std::abs(ld.perimeter - 2 * pi) < 1e-6);
  CHECK(std::abs(ld.constant - 1.0 / 6.0) < 1e-6);

  const auto grid = log_grid(1e-4, 1e-2, 60);
  const auto tr = synthetic(grid, [](double t) { return 3.0 / (4 * pi * t) - 5.0 / (8 * std::sqrt(pi * t)) + 0.2; }, 2);
  const auto ls = limit_extract(tr);
  CHECK(std::abs(ls.area - 3.0) < 1e-8);
  CHECK(std::abs(ls.perimeter - 5.0) < 1e-8);
  CHECK(std::abs(ls.constant - 0.2) < 1e-8);

  TraceSamples few = tr;
  few.t.resize(3);
  few.values.resize(3);
  few.abs_error.resize(3);
  CHECK_THROWS_AS(limit_extract(few), Error);
}

TEST_CASE("fit and limits agree within their uncertainties") {
  for (const TraceSamples* tr : {&interval_trace({1.0}), &interval_trace({1.0, 1.5}), &planar_trace(Domain(Rectangle{1.0, 2.0}))}) {
    const auto sw = fit_algebraic_auto(*tr, 5);
    const auto lim = limit_extract(*tr);
    CHECK(std::abs(sw.area() - lim.area) <= 2.0 * (sw.area_sigma() + lim.area_error) + 1e-12);
    CHECK(std::abs(sw.perimeter() - lim.perimeter) <= 2.0 * (sw.perimeter_sigma() + lim.perimeter_error) + 1e-12);
  }
}

TEST_CASE("exponent of a constructed signal") {
  const auto grid = log_grid(1e-2, 0.1, 80);
  const auto r = synthetic_residual(grid, [](double t) { return std::sqrt(t) * std::exp(-1.0 / t); });
  const auto e = extract_exponent(r, {0.01, 0.1});
  CHECK(std::abs(e.delta_sq - 1.0) < 1e-6);
  CHECK(e.amplitude_sign == 1);
  CHECK(e.quality > 0.999);
  CHECK(e.nu == doctest::Approx(0.5).epsilon(1e-4));

  const auto neg = synthetic_residual(grid, [](double t) { return -2.0 * std::exp(-0.49 / t); });
  const auto en = extract_exponent(neg);
  CHECK(en.amplitude_sign == -1);
  CHECK(std::abs(en.delta_sq - 0.49) < 1e-6);
}

TEST_CASE("two constructed exponentials are peeled apart") {
  const auto grid = log_grid(1e-2, 2.0, 300);
  const auto r = synthetic_residual(grid, [](double t) {
    return std::sqrt(t) * (std::exp(-1.0 / t) + 0.3 * std::exp(-1.8 / t));
  });
  const auto p = peel_spectrum(r, 2);
  REQUIRE(p.exponents.size() == 2);
  CHECK(std::abs(p.exponents[0].delta_sq - 1.0) < 1e-3);
  CHECK(std::abs(p.exponents[1].delta_sq - 1.8) < 1e-3);
}

TEST_CASE("interval exponents from the exact series") {
  const auto& I = interval_trace({1.0});
  const auto p = peel_spectrum(I, fit_algebraic_auto(I, 5), 2);
  REQUIRE(p.exponents.size() == 2);
  CHECK(std::abs(p.exponents[0].delta_sq - 1.0) < 1e-3);
  CHECK(std::abs(p.exponents[1].delta_sq - 4.0) < 5e-2);

  const auto& J = interval_trace({1.0, 1.5});
  const auto q = peel_spectrum(J, fit_algebraic_auto(J, 5), 2);
  REQUIRE(q.exponents.size() == 2);
  CHECK(std::abs(q.exponents[0].delta_sq - 1.0) < 1e-3);
  CHECK(std::abs(q.exponents[1].delta_sq - 2.25) < 1e-2);

  const auto& R = planar_trace(Domain(Rectangle{1.0, 2.0}));
  const auto e = extract_exponent(R, fit_algebraic_auto(R, 5));
  CHECK(std::abs(e.delta_sq - 1.0) < 1e-2);
}

TEST_CASE("peeling leaves only the next exponential scale") {
  for (auto lengths : {std::vector<double>{1.0}, std::vector<double>{1.0, 1.5}}) {
    const auto& tr = interval_trace(lengths);
    const auto p = peel_spectrum(tr, fit_algebraic_auto(tr, 5), 1);
    REQUIRE(p.exponents.size() == 1);
    // Next predicted exponent: (2 l_1)^2 for one interval, l_2^2 for two.
    const double next = lengths.size() == 1 ? 4.0 : 2.25;
    const auto& w = p.exponents[0].window;
    for (std::size_t i = 0; i < p.remaining.t.size(); ++i) {
      const double t = p.remaining.t[i];
      if (t < w.t_lo || t > w.t_hi) continue;
      CHECK(std::abs(p.remaining.r[i]) <= std::max(10.0 * std::exp(-next / w.t_hi), 10.0 * p.remaining.sigma[i]));
    }
  }
}

TEST_CASE("reflecting ends keep the exponent and the sign of the leading image") {
  // The image sums give +exp(-a^2/t)/sqrt(pi t) for both conditions, so only the constant flips.
  const auto& D = interval_trace({1.0}, BC::Dirichlet);
  const auto& N = interval_trace({1.0}, BC::Neumann);
  const auto ed = extract_exponent(D, fit_algebraic_auto(D, 5));
  const auto en = extract_exponent(N, fit_algebraic_auto(N, 5));
  CHECK(std::abs(ed.delta_sq - en.delta_sq) < 1e-6);
  CHECK(ed.amplitude_sign == 1);
  CHECK(en.amplitude_sign == 1);
  CHECK(fit_algebraic_auto(D, 5).constant() == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(fit_algebraic_auto(N, 5).constant() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("Laplace transform of the one-sided heat profile") {
  for (double k : {0.5, 1.0, 2.0}) {
    const auto f = [k](double t) { return t > 0.0 ? std::erfc(k / (2.0 * std::sqrt(t))) : 0.0; };
    for (double s : {1.0, 2.5, 10.0, 37.0, 100.0})
      CHECK(std::abs(laplace_transform(f, s) - std::exp(-k * std::sqrt(s)) / s) < 1e-8);
  }
}

TEST_CASE("matching recovered exponents to predicted lengths") {
  LengthSpectrum one;
  one.entries.push_back({1.0, 2.0, 2, 1, OrbitKind::DoubleNormal, 0, 1, "width"});
  auto m = match_spectrum({1.0}, one, 0.02);
  CHECK(m.matches.size() == 1);
  CHECK(m.unexplained.empty());

  LengthSpectrum four;
  for (double d : {1.0, 1.5, 2.0, 2.25}) four.entries.push_back({d, 2 * d, 2, 1, OrbitKind::DoubleNormal, 0, 1, ""});
  // Recovered values are delta^2 and compared through their square roots.
  m = match_spectrum({1.0, 2.26 * 2.26}, four, 0.02);
  REQUIRE(m.matches.size() == 2);
  CHECK(m.matches[0].predicted.delta == 1.0);
  CHECK(m.matches[1].predicted.delta == 2.25);
  m = match_spectrum({1.0, 2.26}, four, 0.02);
  REQUIRE(m.matches.size() == 2);
  CHECK(m.matches[1].predicted.delta == 1.5);

  // Each predicted entry is used once.
  m = match_spectrum({1.0, 1.0001}, one, 0.02);
  CHECK(m.matches.size() == 1);
  CHECK(m.unexplained.size() == 1);

  m = match_spectrum({1.0, 4.0}, LengthSpectrum{}, 0.02);
  CHECK(m.matches.empty());
  CHECK(m.unexplained.size() == 2);
}

TEST_CASE("end-to-end report for the rectangle") {
  const Domain d = Rectangle{1.0, 2.0};
  const auto spec = predict_length_spectrum(d, 3.0, 2);
  RecoveryConfig cfg;
  cfg.k_max = 1;
  const auto rep = recover(planar_trace(d), cfg, &spec);
  CHECK(std::abs(rep.area - 2.0) < 1e-3);
  CHECK(std::abs(rep.perimeter - 6.0) < 1e-2);
  REQUIRE(rep.exponents.size() == 1);
  REQUIRE(rep.matches.size() == 1);
  CHECK(rep.matches[0].predicted.delta == doctest::Approx(1.0));
  CHECK(rep.matches[0].predicted.kind == OrbitKind::DoubleNormal);
  CHECK(rep.unexplained.empty());
  REQUIRE(rep.limits);
  CHECK(std::abs(rep.limits->constant - 0.25) < 1e-3);
}

TEST_CASE("recovery errors") {
  const auto grid = log_grid(1e-2, 1.0, 50);
  Residual noise = synthetic_residual(grid, [](double) { return 1e-20; });
  for (auto& s : noise.sigma) s = 1e-18;
  try {
    (void)extract_exponent(noise);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SignalTooSmall);
    CHECK(std::string(e.what()).find("attainable delta_sq") != std::string::npos);
  }

  const auto& I = interval_trace({1.0});
  CHECK_THROWS_AS(fit_algebraic(I, 2, {1e-3, 1e-2}), Error);
  try {
    (void)fit_algebraic(I, 5, {0.1, 0.05});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Window);
  }
  try {
    // Nearly collinear columns on a narrow window.
    const auto narrow = synthetic(linear_grid(0.5, 0.51, 100), [](double t) { return 1.0 / t; }, 2);
    (void)fit_algebraic(narrow, 8, {0.5, 0.51});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Window);
  }
  const auto r = synthetic_residual(grid, [](double t) { return std::sin(20 * t) * std::exp(-0.1 / t); });
  try {
    (void)extract_exponent(r, {0.01, 1.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Window);
  }
  CHECK_THROWS_AS(peel_spectrum(r, 0), Error);
}
