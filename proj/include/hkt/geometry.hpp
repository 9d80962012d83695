#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace hkt {

using Point = Eigen::Vector2d;

struct IntervalSet {
  std::vector<double> lengths;
};
struct Rectangle {
  double a = 1.0;
  double b = 1.0;
};
struct Disk {
  double R = 1.0;
};
// Outer radius a, inner radius b, concentric about the origin.
struct Annulus {
  double a = 2.0;
  double b = 1.0;
};
// Semi-axes a (along x) and b (along y).
struct Ellipse {
  double a = 1.0;
  double b = 1.0;
};
// Simple polygon, counterclockwise.
struct Polygon {
  std::vector<Point> vertices;
};
struct BoundarySample {
  double s = 0.0;
  Point position = Point::Zero();
  Point tangent = Point::UnitX();
};
// Closed counterclockwise curve sampled over arclength; first sample repeats as last.
// Interpolated by cubic Hermite segments.
struct SmoothBoundary {
  std::vector<BoundarySample> samples;
};

using Shape =
    std::variant<IntervalSet, Rectangle, Disk, Annulus, Ellipse, Polygon, SmoothBoundary>;

enum class DomainKind { IntervalSet, Rectangle, Disk, Annulus, Ellipse, Polygon, SmoothBoundary };

const char* to_string(DomainKind k) noexcept;

namespace detail {
class Boundary;
}

class Domain {
 public:
  explicit Domain(Shape shape);
  template <class T>
    requires std::is_constructible_v<Shape, T> && (!std::is_same_v<std::decay_t<T>, Shape>)
  Domain(T shape) : Domain(Shape(std::move(shape))) {}

  const Shape& shape() const { return shape_; }
  DomainKind kind() const;
  int dimension() const;

  // 2-D: area and boundary length. 1-D: total length and the number of endpoints.
  double area() const;
  double perimeter() const;

  int connected_components() const;
  int boundary_components() const;
  // Axis-aligned box containing a 2-D domain.
  Eigen::AlignedBox2d bounding_box() const;

  // Strict interior test (2-D only).
  bool contains(const Point& x) const;

  std::string describe() const;
  std::uint64_t digest() const;

  const detail::Boundary& boundary() const;

 private:
  Shape shape_;
  std::shared_ptr<const detail::Boundary> boundary_;
};

struct BoundaryPoint {
  double s = 0.0;
  Point position = Point::Zero();
  Point outward_normal = Point::UnitX();
  double curvature = 0.0;
  int component = 0;
};

struct DistanceResult {
  double r1 = 0.0;
  BoundaryPoint projection;
};

struct ChordSample {
  double s = 0.0;
  double l = 0.0;
};

// Local extremum of the normal chord, refined inside [bracket_lo, bracket_hi].
struct ChordExtremum {
  double s = 0.0;
  double l = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool maximum = false;
  int component = 0;
};

struct ChordFunction {
  std::vector<ChordSample> samples;
  double domain_perimeter = 0.0;
  std::vector<ChordExtremum> extrema;
  // Boundary components on which l(s) is constant (circle-like degeneracy).
  std::vector<int> constant_components;
};

struct CriticalLocus {
  enum class Representation { Empty, Point, Segment, Sampled };
  Representation representation = Representation::Empty;
  std::vector<Point> points;  // Point: 1 entry; Segment: 2 endpoints; Sampled: cloud
  int component_index = 0;
  bool approximate = false;
};

struct ChordHit {
  double length = 0.0;
  BoundaryPoint origin;
  BoundaryPoint far;
};

BoundaryPoint boundary_point(const Domain& domain, double s);
DistanceResult distance_to_boundary(const Domain& domain, const Point& x);
double normal_chord(const Domain& domain, double s);
ChordHit normal_chord_full(const Domain& domain, double s);
ChordFunction chord_function(const Domain& domain, int n_samples);
std::vector<CriticalLocus> critical_locus(const Domain& domain);

// Nearest boundary point with no membership check; valid for any x in the plane.
BoundaryPoint project_to_boundary(const Domain& domain, const Point& x);

// First boundary crossing of the ray o + tau*d for tau > tau_min, or tau < 0 if none.
double first_boundary_hit(const Domain& domain, const Point& o, const Point& d,
                          double tau_min, BoundaryPoint* hit = nullptr);

}  // namespace hkt
