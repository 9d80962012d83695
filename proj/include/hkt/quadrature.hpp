#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hkt {

// Adaptive Simpson with Richardson correction. abs_tol is the target
// absolute error over [a, b]; max_depth bounds the bisection tree.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 48);

// Cumulative arclength of a parametrized curve, tabulated at panel
// breakpoints and inverted by Newton. The table is monotone and the
// inverse is reproducible to ~1e-13 relative.
// int_0^inf exp(-s t) f(t) dt by double-exponential quadrature.
double laplace_transform(const std::function<double(double)>& f, double s);

class ArcLengthTable {
 public:
  ArcLengthTable() = default;

  // speed(u) = |dp/du| on [breaks.front(), breaks.back()]; breaks strictly increasing.
  ArcLengthTable(std::function<double(double)> speed, std::vector<double> breaks,
                 double rel_tol = 1e-12);

  double total() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  double arclength(double u) const;  // u within the tabulated range
  double param(double s) const;      // inverse of arclength
  std::span<const double> breaks() const { return breaks_; }

 private:
  std::function<double(double)> speed_;
  std::vector<double> breaks_;
  std::vector<double> cumulative_;
  double panel_tol_ = 0.0;
};

}  // namespace hkt
