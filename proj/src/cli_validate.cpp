#include <cmath>
#include <numbers>
#include <sstream>

#include "hkt/bessel.hpp"
#include "hkt/cli.hpp"
#include "hkt/error.hpp"
#include "hkt/images.hpp"
#include "hkt/montecarlo.hpp"

namespace hkt::cli {
namespace {

using std::numbers::pi;

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

ValidationCheck theta_identity() {
  double worst = 0.0;
  const auto grid = log_grid(0.01, 1.0, 50);
  for (double a : {1.0, pi})
    for (BC bc : {BC::Dirichlet, BC::Neumann}) {
      const auto sp = eigenvalues(Domain(IntervalSet{{a}}), bc, 1e6);
      const auto tr = trace_series(sp, grid);
      for (std::size_t i = 0; i < grid.size(); ++i)
        worst = std::max(worst, std::abs(images_trace_1d(grid[i], {a, bc, 8}) - tr.values[i]));
    }
  return {"theta identity (images vs series, 1-D)", worst < 1e-10, "max |diff| " + sci(worst) + " < 1e-10"};
}

ValidationCheck rectangle_separability() {
  const auto grid = log_grid(0.01, 1.0, 30);
  double worst = 0.0;
  for (BC bc : {BC::Dirichlet, BC::Neumann}) {
    const auto r = trace_series(eigenvalues(Domain(Rectangle{1.0, 2.0}), bc, 4e4), grid);
    const auto x = trace_series(eigenvalues(Domain(IntervalSet{{1.0}}), bc, 4e4), grid);
    const auto y = trace_series(eigenvalues(Domain(IntervalSet{{2.0}}), bc, 4e4), grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      worst = std::max(worst, std::abs(r.values[i] - x.values[i] * y.values[i]) / r.values[i]);
  }
  return {"rectangle separability (series)", worst < 1e-12, "max rel diff " + sci(worst) + " < 1e-12"};
}

ValidationCheck disk_weyl() {
  const auto tr = trace_series(eigenvalues(Domain(Disk{1.0}), BC::Dirichlet, 4e4), log_grid(1e-3, 1.0, 120), 1e-9);
  const auto lim = limit_extract(tr);
  const double ea = std::abs(lim.area - pi), ep = std::abs(lim.perimeter - 2 * pi);
  return {"disk Bessel spectrum limits", ea < 1e-6 && ep < 1e-6,
          "|area - pi| " + sci(ea) + ", |perimeter - 2pi| " + sci(ep) + " < 1e-6"};
}

ValidationCheck disk_monte_carlo() {
  const Domain d = Disk{1.0};
  const auto sp = eigenvalues(d, BC::Dirichlet, 4e4);
  bool ok = true;
  std::string detail;
  for (double t : {0.05, 0.2}) {
    const double exact = trace_value(sp, t);
    const auto mc = mc_trace(d, t, {200000, 64, 11, 4096});
    const double z = std::abs(mc.mean - exact) / mc.std_error;
    ok = ok && z <= 4.0;
    detail += (detail.empty() ? "" : ", ") + std::string("t=") + sci(t) + " z=" + sci(z);
  }
  return {"disk Monte Carlo vs series", ok, detail + " (<= 4)"};
}

}  // namespace

std::vector<ValidationCheck> validation_suite(bool quick) {
  std::vector<ValidationCheck> out;
  auto guarded = [&](ValidationCheck (*f)(), const char* name) {
    try {
      out.push_back(f());
    } catch (const std::exception& e) {
      out.push_back({name, false, e.what()});
    }
  };
  guarded(theta_identity, "theta identity (images vs series, 1-D)");
  guarded(rectangle_separability, "rectangle separability (series)");
  guarded(disk_weyl, "disk Bessel spectrum limits");
  if (!quick) guarded(disk_monte_carlo, "disk Monte Carlo vs series");
  return out;
}

}  // namespace hkt::cli
