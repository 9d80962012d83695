#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hkt/geometry.hpp"

namespace hkt {

enum class OrbitKind { DoubleNormal, NBounce, DegenerateFamily };
const char* to_string(OrbitKind k) noexcept;

// bounce_params are global boundary arclengths. For 1-D intervals they are the two endpoints.
struct PeriodicOrbit {
  std::vector<double> bounce_params;
  std::vector<Point> points;
  double length = 0.0;
  OrbitKind kind = OrbitKind::NBounce;
  int reflections = 0;
};

struct LengthEntry {
  double delta = 0.0;
  double orbit_length = 0.0;
  int reflections = 0;
  int multiple = 1;      // delta = multiple * orbit_length / 2
  OrbitKind kind = OrbitKind::DoubleNormal;
  int orbit_index = -1;  // into LengthSpectrum::orbits
  int multiplicity = 1;  // sources merged into this delta
  std::string source;
};

struct LengthSpectrum {
  std::vector<LengthEntry> entries;
  std::vector<PeriodicOrbit> orbits;
};

// Chords orthogonal to the boundary at both ends. Constant-chord components give one
// degenerate-family orbit; polygons contribute their mutually visible parallel edge pairs,
// each reported once with its representative chord at the middle of the overlap.
std::vector<PeriodicOrbit> double_normal_orbits(const Domain& domain, const ChordFunction& chord);

struct BilliardSearch {
  int n_starts = 32;
  std::uint64_t seed = 1;
};

// Critical points of the closed polygon length through N boundary points (N in [2, 12]).
// Only the outer boundary component carries bounces; segments must stay inside the domain.
std::vector<PeriodicOrbit> n_bounce_orbits(const Domain& domain, int N, const BilliardSearch& search = {});

// Critical points of |p_1 - x| + sum |p_{i+1} - p_i| + |x - p_K|: closed rays from x with K reflections.
struct ReturnLoop {
  std::vector<double> bounce_params;
  std::vector<Point> points;
  double length = 0.0;
  bool degenerate = false;
};
std::vector<ReturnLoop> return_loops(const Domain& domain, const Point& x, int K, const BilliardSearch& search = {});

// Largest |T.(u_in - u_out)| over the bounces, i.e. the length gradient.
double length_gradient_residual(const Domain& domain, const PeriodicOrbit& orbit);
// Largest |u_out - (u_in - 2 (u_in.n) n)| over the bounces.
double reflection_residual(const Domain& domain, const PeriodicOrbit& orbit);

LengthSpectrum predict_length_spectrum(const Domain& domain, double delta_max, int n_max_reflections,
                                       const BilliardSearch& search = {});

namespace serial {
std::vector<PeriodicOrbit> n_bounce_orbits(const Domain& domain, int N, const BilliardSearch& search = {});
}

}  // namespace hkt
