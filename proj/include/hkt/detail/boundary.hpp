#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "hkt/geometry.hpp"
#include "hkt/quadrature.hpp"

namespace hkt::detail {

// Arclength-parametrized position, unit tangent and signed curvature.
// The domain lies to the left of the tangent; outward normal is (T.y, -T.x).
struct CurveJet {
  Point p;
  Point T;
  double kappa = 0.0;

  Point normal() const { return Point(T.y(), -T.x()); }
  Point second() const { return kappa * Point(-T.y(), T.x()); }
};

struct CurveHit {
  double tau = 0.0;  // ray parameter
  double s = 0.0;    // local arclength of the hit
};

class Curve {
 public:
  virtual ~Curve() = default;
  virtual double length() const = 0;
  virtual CurveJet jet(double s) const = 0;
  // Nearest point: (local s, distance).
  virtual std::pair<double, double> project(const Point& x) const = 0;
  virtual void ray_hits(const Point& o, const Point& d, std::vector<CurveHit>& out) const = 0;
  virtual double signed_area() const = 0;
  virtual std::vector<double> corners() const { return {}; }

  double wrap(double s) const;
};

class CircleCurve final : public Curve {
 public:
  // orientation +1 counterclockwise, -1 clockwise; s = 0 at (r, 0).
  CircleCurve(double r, int orientation) : r_(r), orient_(orientation) {}
  double length() const override;
  CurveJet jet(double s) const override;
  std::pair<double, double> project(const Point& x) const override;
  void ray_hits(const Point& o, const Point& d, std::vector<CurveHit>& out) const override;
  double signed_area() const override;

 private:
  double s_of_angle(double theta) const;
  double r_;
  int orient_;
};

class EllipseCurve final : public Curve {
 public:
  EllipseCurve(double a, double b);
  double length() const override { return table_.total(); }
  CurveJet jet(double s) const override;
  std::pair<double, double> project(const Point& x) const override;
  void ray_hits(const Point& o, const Point& d, std::vector<CurveHit>& out) const override;
  double signed_area() const override;

  double angle_of(double s) const;
  double s_of_angle(double theta) const;

 private:
  double a_, b_;
  ArcLengthTable table_;
};

class PolylineCurve final : public Curve {
 public:
  explicit PolylineCurve(std::vector<Point> vertices);
  double length() const override { return cumulative_.back(); }
  CurveJet jet(double s) const override;
  std::pair<double, double> project(const Point& x) const override;
  void ray_hits(const Point& o, const Point& d, std::vector<CurveHit>& out) const override;
  double signed_area() const override;
  std::vector<double> corners() const override;

  const std::vector<Point>& vertices() const { return v_; }

 private:
  std::vector<Point> v_;
  std::vector<double> cumulative_;  // size n+1
};

class HermiteCurve final : public Curve {
 public:
  explicit HermiteCurve(const std::vector<BoundarySample>& samples);
  double length() const override { return table_.total(); }
  CurveJet jet(double s) const override;
  std::pair<double, double> project(const Point& x) const override;
  void ray_hits(const Point& o, const Point& d, std::vector<CurveHit>& out) const override;
  double signed_area() const override;

 private:
  struct Derivs {
    Point p, d1, d2;
  };
  Derivs eval_u(double u) const;
  std::size_t segment_of(double u) const;

  std::vector<double> u_;
  std::vector<Point> p_;
  std::vector<Point> m_;
  ArcLengthTable table_;
  static constexpr int kSub = 16;
};

class Boundary {
 public:
  explicit Boundary(std::vector<std::unique_ptr<Curve>> components);

  int size() const { return static_cast<int>(comps_.size()); }
  const Curve& component(int i) const { return *comps_[static_cast<std::size_t>(i)]; }
  double offset(int i) const { return offsets_[static_cast<std::size_t>(i)]; }
  double perimeter() const { return offsets_.back(); }

  // Split a global arclength into (component, local s).
  std::pair<int, double> locate(double s) const;
  BoundaryPoint point(int comp, double local) const;
  // Arc distance from global s to the nearest corner, or +inf if none.
  double corner_distance(double s) const;

 private:
  std::vector<std::unique_ptr<Curve>> comps_;
  std::vector<double> offsets_;
};

}  // namespace hkt::detail
