#include "hkt/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "hkt/detail/boundary.hpp"
#include "hkt/error.hpp"

namespace hkt {
namespace {

using std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** with its state derived from (seed, stream) through splitmix64.
class PathRng {
 public:
  using result_type = std::uint64_t;
  PathRng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t k = stream;
    std::uint64_t sm = seed ^ splitmix64(k);
    for (auto& w : s_) w = splitmix64(sm);
  }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    const std::uint64_t r = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return r;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

double seg_distance(const Point& x, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double l2 = ab.squaredNorm();
  const double u = l2 > 0.0 ? std::clamp((x - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return (x - a - u * ab).norm();
}

// Fast membership and local wall distances for the path kernel.
class WallModel {
 public:
  explicit WallModel(const Domain& d) : kind_(d.kind()) {
    switch (kind_) {
      case DomainKind::Rectangle: {
        const auto& r = std::get<Rectangle>(d.shape());
        p0_ = 0.5 * r.a;
        p1_ = 0.5 * r.b;
        break;
      }
      case DomainKind::Disk: p0_ = std::get<Disk>(d.shape()).R; break;
      case DomainKind::Annulus: {
        const auto& a = std::get<Annulus>(d.shape());
        p0_ = a.a;
        p1_ = a.b;
        break;
      }
      case DomainKind::Ellipse: {
        const auto& e = std::get<Ellipse>(d.shape());
        p0_ = e.a;
        p1_ = e.b;
        break;
      }
      case DomainKind::Polygon: poly_ = std::get<Polygon>(d.shape()).vertices; break;
      case DomainKind::SmoothBoundary: {
        const auto& c = d.boundary().component(0);
        const int n = 16 * static_cast<int>(std::get<SmoothBoundary>(d.shape()).samples.size());
        for (int i = 0; i < n; ++i) poly_.push_back(c.jet(c.length() * i / n).p);
        break;
      }
      default: throw Error(ErrorKind::UnsupportedDimension, "Monte Carlo needs a 2-D domain");
    }
  }

  bool inside(const Point& x) const {
    switch (kind_) {
      case DomainKind::Rectangle: return std::abs(x.x()) < p0_ && std::abs(x.y()) < p1_;
      case DomainKind::Disk: return x.squaredNorm() < p0_ * p0_;
      case DomainKind::Annulus: {
        const double r2 = x.squaredNorm();
        return r2 < p0_ * p0_ && r2 > p1_ * p1_;
      }
      case DomainKind::Ellipse: {
        const double u = x.x() / p0_, v = x.y() / p1_;
        return u * u + v * v < 1.0;
      }
      default: {
        bool in = false;
        const std::size_t n = poly_.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
          const Point& a = poly_[i];
          const Point& b = poly_[j];
          if ((a.y() > x.y()) != (b.y() > x.y())) {
            const double xc = b.x() + (x.y() - b.y()) * (a.x() - b.x()) / (a.y() - b.y());
            if (x.x() < xc) in = !in;
          }
        }
        return in;
      }
    }
  }

  // Probability that the bridge segment p -> q over dt avoids every local wall.
  double crossing_survival(const Point& p, const Point& q, double dt) const {
    switch (kind_) {
      case DomainKind::Rectangle:
        return wall(p0_ - p.x(), p0_ - q.x(), dt) * wall(p0_ + p.x(), p0_ + q.x(), dt) *
               wall(p1_ - p.y(), p1_ - q.y(), dt) * wall(p1_ + p.y(), p1_ + q.y(), dt);
      case DomainKind::Disk: return wall(p0_ - p.norm(), p0_ - q.norm(), dt);
      case DomainKind::Annulus: {
        const double rp = p.norm(), rq = q.norm();
        return wall(p0_ - rp, p0_ - rq, dt) * wall(rp - p1_, rq - p1_, dt);
      }
      case DomainKind::Ellipse: return wall(ellipse_distance(p), ellipse_distance(q), dt);
      default: return wall(poly_distance(p), poly_distance(q), dt);
    }
  }

 private:
  static double wall(double d0, double d1, double dt) {
    const double e = d0 * d1 / dt;
    return e > 40.0 ? 1.0 : 1.0 - std::exp(-e);
  }

  // First-order distance from the degree-one gauge sqrt((x/a)^2 + (y/b)^2); exact for circles.
  double ellipse_distance(const Point& x) const {
    const double u = x.x() / p0_, v = x.y() / p1_;
    const double g = std::sqrt(u * u + v * v);
    if (g == 0.0) return p1_;
    const double gx = u / (p0_ * g), gy = v / (p1_ * g);
    return (1.0 - g) / std::hypot(gx, gy);
  }

  double poly_distance(const Point& x) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = poly_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) best = std::min(best, seg_distance(x, poly_[j], poly_[i]));
    return best;
  }

  DomainKind kind_;
  double p0_ = 0.0, p1_ = 0.0;
  std::vector<Point> poly_;
};

// Uniform start points from the unit square, mapped area-preservingly where a map exists.
class InteriorSampler {
 public:
  explicit InteriorSampler(const Domain& d) : d_(d) {
    switch (d.kind()) {
      case DomainKind::Rectangle:
      case DomainKind::Disk:
      case DomainKind::Annulus:
      case DomainKind::Ellipse: area_ = d.area(); break;
      default: {
        box_ = d.bounding_box();
        area_ = box_.volume();
      }
    }
  }
  double area() const { return area_; }

  Point map(double u, double v) const {
    const double th = 2.0 * pi * v;
    switch (d_.kind()) {
      case DomainKind::Rectangle: {
        const auto& r = std::get<Rectangle>(d_.shape());
        return Point((u - 0.5) * r.a, (v - 0.5) * r.b);
      }
      case DomainKind::Disk: {
        const double r = std::get<Disk>(d_.shape()).R * std::sqrt(u);
        return Point(r * std::cos(th), r * std::sin(th));
      }
      case DomainKind::Annulus: {
        const auto& a = std::get<Annulus>(d_.shape());
        const double r = std::sqrt(a.b * a.b + u * (a.a * a.a - a.b * a.b));
        return Point(r * std::cos(th), r * std::sin(th));
      }
      case DomainKind::Ellipse: {
        const auto& e = std::get<Ellipse>(d_.shape());
        const double r = std::sqrt(u);
        return Point(e.a * r * std::cos(th), e.b * r * std::sin(th));
      }
      default: return box_.min() + Point(u, v).cwiseProduct(box_.sizes());
    }
  }

 private:
  const Domain& d_;
  Eigen::AlignedBox2d box_;
  double area_ = 0.0;
};

int levels_for(int n_steps) {
  int L = 0;
  while ((1 << L) < n_steps) ++L;
  return L;
}

void validate(const Domain& domain, double t, const McConfig& cfg) {
  if (domain.dimension() != 2) throw Error(ErrorKind::UnsupportedDimension, "Monte Carlo needs a 2-D domain");
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorKind::Argument, "t must be positive and finite");
  if (cfg.n_paths < 100) throw Error(ErrorKind::Argument, "n_paths must be at least 100");
  if (cfg.n_steps < 16) throw Error(ErrorKind::Argument, "n_steps must be at least 16");
  if (cfg.n_steps > (1 << 20)) throw Error(ErrorKind::Argument, "n_steps must be at most 2^20");
  if (cfg.stratification < 1) throw Error(ErrorKind::Argument, "stratification must be at least 1");
}

bool bridge_survives(const WallModel& m, const Point& x, double t, int levels, PathRng& rng, std::vector<Point>& pts) {
  const int n = 1 << levels;
  const double dt = t / n;
  std::normal_distribution<double> gauss;
  pts[0] = x;
  pts[static_cast<std::size_t>(n)] = x;
  for (int step = n; step > 1; step /= 2) {
    const int half = step / 2;
    const double sd = std::sqrt(step * dt / 2.0);
    for (int k = half; k < n; k += step) {
      const auto i = static_cast<std::size_t>(k);
      const double gx = gauss(rng);
      const double gy = gauss(rng);
      pts[i] = 0.5 * (pts[i - half] + pts[i + half]) + sd * Point(gx, gy);
      if (!m.inside(pts[i])) return false;
    }
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double f = m.crossing_survival(pts[i], pts[i + 1], dt);
    if (f < 1.0 && unif(rng) >= f) return false;
  }
  return true;
}

McEstimate bernoulli(long long hits, long long n, double scale) {
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {scale * p, scale * std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
}

McEstimate survival_impl(const Domain& domain, const Point& x, double t, const McConfig& cfg, bool parallel) {
  validate(domain, t, cfg);
  const BoundaryPoint bp = project_to_boundary(domain, x);
  if ((x - bp.position).norm() < 1e-9)
    throw Error(ErrorKind::DegenerateInput, "start point lies within 1e-9 of the boundary");
  if (!domain.contains(x)) throw Error(ErrorKind::DomainMembership, "start point is outside the domain");
  const WallModel model(domain);
  const int levels = levels_for(cfg.n_steps);
  long long hits = 0;
#pragma omp parallel if (parallel)
  {
    std::vector<Point> pts(static_cast<std::size_t>((1 << levels) + 1));
#pragma omp for schedule(static) reduction(+ : hits)
    for (long long i = 0; i < cfg.n_paths; ++i) {
      PathRng rng(cfg.seed, static_cast<std::uint64_t>(i));
      if (bridge_survives(model, x, t, levels, rng, pts)) ++hits;
    }
  }
  return bernoulli(hits, cfg.n_paths, 1.0);
}

McEstimate trace_impl(const Domain& domain, double t, const McConfig& cfg, BC bc, bool parallel) {
  if (bc != BC::Dirichlet)
    throw Error(ErrorKind::BackendUnavailable, "the montecarlo backend supports Dirichlet only");
  validate(domain, t, cfg);
  const WallModel model(domain);
  const InteriorSampler sampler(domain);
  const int levels = levels_for(cfg.n_steps);
  const int m = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(cfg.stratification))));
  const long long cells = static_cast<long long>(m) * m;
  long long hits = 0;
#pragma omp parallel if (parallel)
  {
    std::vector<Point> pts(static_cast<std::size_t>((1 << levels) + 1));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
#pragma omp for schedule(static) reduction(+ : hits)
    for (long long i = 0; i < cfg.n_paths; ++i) {
      PathRng rng(cfg.seed, static_cast<std::uint64_t>(i));
      const long long cell = i % cells;
      const double u = (static_cast<double>(cell % m) + unif(rng)) / m;
      const double v = (static_cast<double>(cell / m) + unif(rng)) / m;
      const Point x = sampler.map(u, v);
      if (!model.inside(x)) continue;
      if (bridge_survives(model, x, t, levels, rng, pts)) ++hits;
    }
  }
  return bernoulli(hits, cfg.n_paths, sampler.area() / (4.0 * pi * t));
}

}  // namespace

McEstimate bridge_survival(const Domain& domain, const Point& x, double t, const McConfig& cfg) {
  return survival_impl(domain, x, t, cfg, true);
}

McEstimate mc_trace(const Domain& domain, double t, const McConfig& cfg, BC bc) {
  return trace_impl(domain, t, cfg, bc, true);
}

TraceSamples mc_trace_samples(const Domain& domain, BC bc, std::span<const double> t_grid, const McConfig& cfg) {
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw Error(ErrorKind::Argument, "t grid must increase strictly");
  TraceSamples out;
  out.backend = Backend::MonteCarlo;
  out.bc = bc;
  out.domain_digest = domain.digest();
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    McConfig c = cfg;
    std::uint64_t k = i;
    c.seed = cfg.seed ^ splitmix64(k);
    const McEstimate e = mc_trace(domain, t_grid[i], c, bc);
    out.t.push_back(t_grid[i]);
    out.values.push_back(e.mean);
    out.abs_error.push_back(e.std_error);
  }
  return out;
}

namespace serial {
McEstimate bridge_survival(const Domain& domain, const Point& x, double t, const McConfig& cfg) {
  return survival_impl(domain, x, t, cfg, false);
}
McEstimate mc_trace(const Domain& domain, double t, const McConfig& cfg, BC bc) {
  return trace_impl(domain, t, cfg, bc, false);
}
}  // namespace serial

}  // namespace hkt
