// One line per acceptance criterion. Exit status counts failures outside the known-unattainable set.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hkt/billiards.hpp"
#include "hkt/images.hpp"
#include "hkt/montecarlo.hpp"
#include "hkt/recovery.hpp"
#include "hkt/serialize.hpp"
#include "hkt/spectra.hpp"

using namespace hkt;
using std::numbers::pi;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
  bool diagnostic = false;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool has_length(const std::vector<double>& L, double x, double tol) {
  for (double v : L)
    if (std::abs(v - x) <= tol) return true;
  return false;
}

std::vector<double> lengths(const std::vector<PeriodicOrbit>& orbits) {
  std::vector<double> out;
  for (const auto& o : orbits) out.push_back(o.length);
  return out;
}

// Every recovered delta_sq is matched and the matched deltas are exactly `expected`.
bool matched_to(const std::vector<Exponent>& ex, const Domain& d, const std::vector<double>& expected, double rel_tol,
                std::string& detail) {
  std::vector<double> ds;
  double dmax = 0.0;
  for (const auto& e : ex) {
    ds.push_back(e.delta_sq);
    dmax = std::max(dmax, 1.5 * std::sqrt(e.delta_sq));
  }
  const auto m = match_spectrum(ds, predict_length_spectrum(d, dmax, 4), rel_tol);
  bool ok = m.matches.size() >= expected.size();
  for (std::size_t k = 0; k < expected.size() && ok; ++k) {
    bool found = false;
    for (const auto& x : m.matches)
      if (x.recovered_index == static_cast<int>(k)) found = std::abs(x.predicted.delta - expected[k]) < 1e-12;
    ok = found;
  }
  detail += ok ? ", matched" : ", NOT matched";
  return ok;
}

Outcome theta_identity() {
  const auto grid = log_grid(0.01, 1.0, 50);
  double worst = 0.0;
  for (double a : {1.0, pi})
    for (BC bc : {BC::Dirichlet, BC::Neumann}) {
      const auto tr = trace_series(eigenvalues(Domain(IntervalSet{{a}}), bc, 1e6), grid);
      for (std::size_t i = 0; i < grid.size(); ++i)
        worst = std::max(worst, std::abs(images_trace_1d(grid[i], {a, bc, 8}) - tr.values[i]));
    }
  return {worst < 1e-10, fmt("max |images - series| = %.3e (tol 1e-10)", worst)};
}

Outcome kac_disk() {
  const auto tr = trace_series(eigenvalues(Domain(Disk{1.0}), BC::Dirichlet, 4e4), log_grid(1e-3, 1.0, 300), 1e-9);
  const auto sw = fit_algebraic(tr, 5, {1e-3, 2e-2});
  const double ea = std::abs(sw.area() - pi), ep = std::abs(sw.perimeter() - 2 * pi),
               ec = std::abs(sw.constant() - 1.0 / 6.0);
  return {ea <= 1e-3 && ep <= 1e-2 && ec <= 1e-2,
          fmt("area %.6f (err %.1e), perimeter %.6f (err %.1e), constant %.6f (err %.1e)", sw.area(), ea,
              sw.perimeter(), ep, sw.constant(), ec)};
}

Outcome corner_rectangle() {
  const auto tr = trace_series(eigenvalues(Domain(Rectangle{1.0, 2.0}), BC::Dirichlet, 4e4), log_grid(1e-3, 1.0, 300), 1e-9);
  const auto rep = recover(tr, {5, 1, 0.02, std::nullopt});
  const double ea = std::abs(rep.area - 2.0), ep = std::abs(rep.perimeter - 6.0), ec = std::abs(rep.constant - 0.25);
  return {ea <= 1e-4 && ep <= 1e-3 && ec <= 1e-3,
          fmt("area %.8f (err %.1e), perimeter %.8f (err %.1e), constant %.8f (err %.1e)", rep.area, ea, rep.perimeter,
              ep, rep.constant, ec)};
}

TraceSamples interval_trace(std::vector<double> lengths, BC bc = BC::Dirichlet) {
  return trace_series(eigenvalues(Domain(IntervalSet{lengths}), bc, 1e7), log_grid(1e-3, 1.0, 400));
}

Outcome interval_exponents() {
  const auto tr = interval_trace({1.0});
  const auto p = peel_spectrum(tr, fit_algebraic_auto(tr, 5), 2);
  if (p.exponents.size() < 2) return {false, fmt("only %zu exponents peeled", p.exponents.size())};
  const double d1 = p.exponents[0].delta_sq, d2 = p.exponents[1].delta_sq;
  std::string detail = fmt("delta_sq {%.8f, %.5f} vs {1 +- 1e-3, 4 +- 5e-2}", d1, d2);
  const bool ok = std::abs(d1 - 1.0) <= 1e-3 && std::abs(d2 - 4.0) <= 5e-2;
  return {ok, detail};
}

Outcome bottleneck() {
  const Domain d = Rectangle{1.0, 2.0};
  const auto tr = trace_series(eigenvalues(d, BC::Dirichlet, 4e4), log_grid(1e-3, 1.0, 300), 1e-9);
  const auto e = extract_exponent(tr, fit_algebraic_auto(tr, 5));
  std::string detail = fmt("leading delta_sq %.6f (tol 1e-2)", e.delta_sq);
  const bool m = matched_to({e}, d, {1.0}, 0.02, detail);
  return {std::abs(e.delta_sq - 1.0) <= 1e-2 && m, detail};
}

Outcome multi_interval() {
  const Domain d = IntervalSet{{1.0, 1.5}};
  const auto tr = interval_trace({1.0, 1.5});
  const auto p = peel_spectrum(tr, fit_algebraic_auto(tr, 5), 2);
  if (p.exponents.size() < 2) return {false, fmt("only %zu exponents peeled", p.exponents.size())};
  const double d1 = p.exponents[0].delta_sq, d2 = p.exponents[1].delta_sq;
  std::string detail = fmt("delta_sq {%.8f, %.5f} vs {1 +- 1e-3, 2.25 +- 1e-2}", d1, d2);
  const bool m = matched_to(p.exponents, d, {1.0, 1.5}, 0.02, detail);
  return {std::abs(d1 - 1.0) <= 1e-3 && std::abs(d2 - 2.25) <= 1e-2 && m, detail};
}

Outcome circle_billiards() {
  const Domain d = Disk{1.0};
  const double tol = 1e-8;
  const bool l2 = has_length(lengths(n_bounce_orbits(d, 2)), 4.0, tol);
  const bool l3 = has_length(lengths(n_bounce_orbits(d, 3)), 3 * std::sqrt(3.0), tol);
  const bool l4 = has_length(lengths(n_bounce_orbits(d, 4)), 4 * std::sqrt(2.0), tol);
  std::vector<double> loops;
  for (const auto& r : return_loops(d, Point(0.0, 0.0), 3)) loops.push_back(r.length);
  const bool l6 = has_length(loops, 6.0, tol);
  return {l2 && l3 && l4 && l6, fmt("4R %s, 3sqrt3R %s, 4sqrt2R %s, 6R (3-reflection diameter loop) %s", l2 ? "ok" : "missing",
                                    l3 ? "ok" : "missing", l4 ? "ok" : "missing", l6 ? "ok" : "missing")};
}

Outcome ellipse_geometry() {
  const Domain d = Ellipse{2.0, 1.0};
  const auto dn = lengths(double_normal_orbits(d, chord_function(d, 512)));
  const bool l4 = has_length(dn, 4.0, 1e-8), l8 = has_length(dn, 8.0, 1e-8);
  const auto loc = critical_locus(d);
  bool ends = !loc.empty() && loc[0].points.size() == 2;
  double e0 = 1.0, e1 = 1.0;
  if (ends) {
    e0 = std::abs(loc[0].points[0].x() + 1.5) + std::abs(loc[0].points[0].y());
    e1 = std::abs(loc[0].points[1].x() - 1.5) + std::abs(loc[0].points[1].y());
    ends = e0 <= 1e-12 && e1 <= 1e-12;
  }
  return {l4 && l8 && ends, fmt("double normals 4 %s, 8 %s; locus endpoint errors %.1e, %.1e", l4 ? "ok" : "missing",
                                l8 ? "ok" : "missing", e0, e1)};
}

Outcome disk_triangle() {
  double worst = 0.0;
  for (double R : {1.0, 0.5, 3.0}) {
    worst = std::max(worst, std::abs(disk_triangle_eikonal(0.0, R) - 4 * R) / (4 * R));
    worst = std::max(worst, std::abs(disk_triangle_eikonal(R, R) - 3 * std::sqrt(3.0) * R) / (3 * std::sqrt(3.0) * R));
  }
  return {worst <= 1e-12, fmt("max relative endpoint error %.1e (tol 1e-12)", worst)};
}

Outcome monte_carlo() {
  bool ok = true;
  std::string detail;
  for (const Domain& d : {Domain(Disk{1.0}), Domain(Rectangle{1.0, 2.0})}) {
    const auto sp = eigenvalues(d, BC::Dirichlet, 4e4);
    for (double t : {0.05, 0.1, 0.2}) {
      McConfig cfg;
      cfg.n_paths = 1000000;
      cfg.seed = 20240917;
      const auto e = mc_trace(d, t, cfg);
      const double exact = trace_value(sp, t);
      const double z = std::abs(e.mean - exact) / e.std_error, rel = e.std_error / e.mean;
      ok = ok && z <= 3.0 && rel <= 0.01;
      detail += fmt("%s%s t=%.2f z=%.2f rel=%.4f", detail.empty() ? "" : "; ", d.kind() == DomainKind::Disk ? "disk" : "rect",
                    t, z, rel);
    }
  }
  return {ok, detail};
}

Outcome neumann_sign() {
  const auto D = interval_trace({1.0}, BC::Dirichlet), N = interval_trace({1.0}, BC::Neumann);
  const auto ed = extract_exponent(D, fit_algebraic_auto(D, 5));
  const auto en = extract_exponent(N, fit_algebraic_auto(N, 5));
  const double gap = std::abs(ed.delta_sq - en.delta_sq);
  return {ed.amplitude_sign == -1 && en.amplitude_sign == 1 && gap <= 1e-6,
          fmt("sign D %+d (want -1), sign N %+d (want +1), |delta_sq gap| %.1e (tol 1e-6)", ed.amplitude_sign,
              en.amplitude_sign, gap)};
}

Outcome disk_leading_exponent() {
  const auto tr = trace_series(eigenvalues(Domain(Disk{1.0}), BC::Dirichlet, 4e4), log_grid(1e-3, 1.0, 300), 1e-9);
  std::string detail;
  for (const TimeWindow w : {TimeWindow{1e-3, 2e-2}, TimeWindow{0.0, 0.0}}) {
    const auto sw = w.t_hi > 0.0 ? fit_algebraic(tr, 5, w) : fit_algebraic_auto(tr, 5);
    std::string tag = w.t_hi > 0.0 ? "window [1e-3,2e-2]" : "auto window";
    try {
      const auto e = extract_exponent(tr, sw);
      const char* verdict = std::abs(e.delta_sq - 1.0) <= 0.05   ? "R^2"
                            : std::abs(e.delta_sq - 4.0) <= 0.2 ? "4R^2"
                                                                 : "neither";
      detail += fmt("%s%s: delta_sq %.4f sign %+d -> %s", detail.empty() ? "" : "; ", tag.c_str(), e.delta_sq,
                    e.amplitude_sign, verdict);
    } catch (const std::exception& ex) {
      detail += fmt("%s%s: %s", detail.empty() ? "" : "; ", tag.c_str(), ex.what());
    }
  }
  return {true, detail, true};
}

}  // namespace

int main(int argc, char** argv) {
  // Criterion 11 contradicts the image-sum identity; it is run as written and kept out of the exit status.
  const std::set<int> known_unattainable{11};
  const std::vector<Criterion> criteria{
      {1, "theta identity", 1.0, theta_identity},
      {2, "Kac coefficients, disk", 30.0, kac_disk},
      {3, "corner constant, rectangle", 5.0, corner_rectangle},
      {4, "exponent extraction, 1-D", 5.0, interval_exponents},
      {5, "bottleneck width", 10.0, bottleneck},
      {6, "multi-interval spectrum", 10.0, multi_interval},
      {7, "billiard closed forms, circle", 10.0, circle_billiards},
      {8, "ellipse geometry", 5.0, ellipse_geometry},
      {9, "disk triangle eikonal", 1.0, disk_triangle},
      {10, "Monte Carlo forward validation", 120.0, monte_carlo},
      {11, "Neumann sign flip", 5.0, neumann_sign},
      {12, "disk leading exponent (diagnostic)", 30.0, disk_leading_exponent},
  };

  int unexpected = 0;
  Json report = Json::array();
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool pass = o.passed && in_time;
    const char* tag = o.diagnostic ? "DIAG" : pass ? "PASS" : "FAIL";
    std::printf("%s  [%2d] %-36s %s (%.2fs, limit %.0fs%s)\n", tag, c.id, c.name, o.detail.c_str(), secs,
                c.time_limit_s, in_time ? "" : ", OVER TIME");
    if (!pass && !o.diagnostic) {
      if (known_unattainable.count(c.id))
        std::printf("      [%2d] known unattainable: both boundary conditions have a positive leading image term\n", c.id);
      else
        ++unexpected;
    }
    report.push_back({{"criterion", c.id},
                      {"name", c.name},
                      {"status", tag},
                      {"detail", o.detail},
                      {"seconds", secs},
                      {"time_limit", c.time_limit_s}});
  }
  if (argc > 1) std::ofstream(argv[1]) << report.dump(2) << "\n";
  std::printf("%d unexpected failure(s)\n", unexpected);
  return unexpected == 0 ? 0 : 1;
}
