#pragma once

#include <span>
#include <vector>

#include "hkt/geometry.hpp"
#include "hkt/spectra.hpp"

namespace hkt {

// Truncated image sum on [0, a]: |n| <= n_images. Dirichlet images carry sign -1, Neumann +1.
struct ImageExpansion {
  double a = 1.0;
  BC bc = BC::Dirichlet;
  int n_images = 8;
};

double images_green_1d(double y, double x, double t, const ImageExpansion& cfg);

// a/(2 sqrt(pi t)) -+ 1/2 + a/(2 sqrt(pi t)) * sum_{0<|n|<=N} exp(-(n a)^2 / t).
// The constant is -1/2 for Dirichlet and +1/2 for Neumann.
double images_trace_1d(double t, const ImageExpansion& cfg);
// Bound on the omitted images |n| > N.
double images_truncation_bound(double t, const ImageExpansion& cfg);

struct DominantWidth {
  double r = 0.0;  // shortest interval
  int m = 0;       // number of intervals of that length
};

struct MultiIntervalTrace {
  double value = 0.0;
  DominantWidth dominant;
};

MultiIntervalTrace multi_interval_trace(std::span<const double> lengths, BC bc, double t, int n_images = 8);

// Image-sum trace for IntervalSet, or the separable product for Rectangle.
TraceSamples images_trace(const Domain& domain, BC bc, std::span<const double> t_grid, int n_images = 8);

// Axis eikonals in the disk of radius R for points (x1, 0), (x2, 0):
// direct |x1 - x2|, one reflection through (R, 0), two reflections through (-R, 0) and (R, 0).
struct DiskAxisEikonals {
  double S0 = 0.0;
  double S1 = 0.0;
  double S2 = 0.0;
};
DiskAxisEikonals disk_axis_eikonals(double x1, double x2, double R);

struct DiskAxisApproximation {
  double G0 = 0.0;
  double G1 = 0.0;
  double G2 = 0.0;
  double boundary_error_plusR = 0.0;   // G0 - G1 - G2 at x2 = R
  double boundary_error_minusR = 0.0;  // G0 - G1 - G2 at x2 = -R
};
// Ray approximations with leading amplitudes 1/(4 pi t) matched at the reflecting endpoints.
DiskAxisApproximation disk_axis_approximation(double x1, double x2, double R, double t);

// Length of the closed two-reflection ray from x back to x in the disk, as a function of |x|.
double disk_triangle_eikonal(double r, double R);

}  // namespace hkt
