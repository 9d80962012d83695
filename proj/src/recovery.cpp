#include "hkt/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hkt/error.hpp"

namespace hkt {
namespace {

using std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Lsq {
  Eigen::VectorXd x;
  Eigen::MatrixXd cov;
  double condition = 0.0;
  double chi2 = 0.0;
  int dof = 0;
};

// Column-equilibrated SVD solve of min || (A x - y) / sigma ||.
Lsq weighted_lsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const Eigen::VectorXd& sigma) {
  const Eigen::Index m = A.rows(), n = A.cols();
  Eigen::MatrixXd W = A;
  Eigen::VectorXd b = y;
  for (Eigen::Index i = 0; i < m; ++i) {
    W.row(i) /= sigma[i];
    b[i] /= sigma[i];
  }
  Eigen::VectorXd scale(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    scale[j] = W.col(j).norm();
    if (scale[j] > 0.0) W.col(j) /= scale[j];
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Lsq out;
  out.condition = s[n - 1] > 0.0 ? s[0] / s[n - 1] : std::numeric_limits<double>::infinity();
  Eigen::VectorXd inv = s.cwiseInverse();
  const Eigen::VectorXd xs = svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().transpose() * b));
  const Eigen::MatrixXd covs = svd.matrixV() * inv.cwiseAbs2().asDiagonal() * svd.matrixV().transpose();
  out.x = xs.cwiseQuotient(scale);
  out.cov = covs.array() / (scale * scale.transpose()).array();
  out.dof = static_cast<int>(m - n);
  out.chi2 = (W * xs - b).squaredNorm();
  return out;
}

double data_sigma(const TraceSamples& tr, std::size_t i) {
  return std::max(tr.abs_error[i], 8.0 * kEps * std::abs(tr.values[i]));
}

void check_traces(const TraceSamples& tr) {
  if (tr.t.empty() || tr.t.size() != tr.values.size() || tr.t.size() != tr.abs_error.size())
    throw Error(ErrorKind::Argument, "trace samples are empty or inconsistent");
  if (tr.dimension != 1 && tr.dimension != 2) throw Error(ErrorKind::UnsupportedDimension, "dimension must be 1 or 2");
}

// ---- Neville extrapolation to h = 0 ----

struct Extrapolated {
  double value = 0.0;
  double error = 0.0;
};

Extrapolated neville_to_zero(const std::vector<double>& h, const std::vector<double>& v, const char* what) {
  const std::size_t K = h.size();
  std::vector<double> p = v;
  std::vector<double> diag;  // estimates using the first m + 1 nodes
  diag.push_back(p[0]);
  for (std::size_t m = 1; m < K; ++m) {
    for (std::size_t i = 0; i + m < K; ++i) p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
    diag.push_back(p[0]);
  }
  std::size_t best = 1;
  double best_err = std::abs(diag[1] - diag[0]);
  for (std::size_t m = 2; m < diag.size(); ++m) {
    const double e = std::abs(diag[m] - diag[m - 1]);
    if (e < best_err) best = m, best_err = e;
  }
  const double first = std::abs(diag[1] - diag[0]);
  if (diag.size() > 2 && !(best_err <= 0.5 * first) && !(best_err <= 1e-12 * std::abs(diag[best])))
    throw Error(ErrorKind::InsufficientRange,
                std::string("extrapolation table for the ") + what + " does not contract; sample smaller t");
  return {diag[best], best_err};
}

// Samples roughly geometric in t (ratio 1.5) starting at the smallest t.
std::vector<std::size_t> limit_nodes(const std::vector<double>& t, std::size_t K) {
  std::vector<std::size_t> idx(t.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
  std::vector<std::size_t> out;
  double target = t[idx[0]];
  for (std::size_t i : idx) {
    if (t[i] >= target * (1.0 - 1e-12)) {
      out.push_back(i);
      target = t[i] * 1.5;
      if (out.size() == K) break;
    }
  }
  return out;
}

// ---- exponent fits ----

// y = -t log|r| = delta_sq - t log C - nu t log t + kappa t^{3/2}, i.e. |r| = C t^nu exp(-delta_sq/t - kappa sqrt(t)).
// The sqrt(t) term is the first correction of a prefactor polynomial in sqrt(t).
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

Vec4 basis4(double t) { return Vec4(1.0, t, t * std::log(t), t * std::sqrt(t)); }

struct LogFit {
  Exponent e;
  Mat4 cov = Mat4::Zero();  // of (delta_sq, -log C, -nu, kappa)
};

LogFit log_linear_fit(const std::vector<double>& t, const std::vector<double>& r, const std::vector<double>& sr,
                      std::optional<double> fixed_nu, bool with_kappa = true) {
  std::vector<int> cols = {0, 1};
  if (!fixed_nu) cols.push_back(2);
  if (with_kappa) cols.push_back(3);
  const Eigen::Index m = static_cast<Eigen::Index>(t.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd A(m, nc);
  Eigen::VectorXd y(m), s(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double ti = t[k];
    y[i] = -ti * std::log(std::abs(r[k]));
    if (fixed_nu) y[i] -= *fixed_nu * ti * std::log(ti);
    s[i] = ti * sr[k] / std::abs(r[k]);
    const Vec4 b = basis4(ti);
    for (Eigen::Index c = 0; c < nc; ++c) A(i, c) = b[cols[static_cast<std::size_t>(c)]];
  }
  const Lsq f = weighted_lsq(A, y, s);
  Vec4 x = Vec4::Zero();
  if (fixed_nu) x[2] = -*fixed_nu;
  const double inflate = std::max(1.0, f.dof > 0 ? f.chi2 / f.dof : 1.0);
  LogFit out;
  for (Eigen::Index c = 0; c < nc; ++c) {
    x[cols[static_cast<std::size_t>(c)]] = f.x[c];
    for (Eigen::Index d = 0; d < nc; ++d)
      out.cov(cols[static_cast<std::size_t>(c)], cols[static_cast<std::size_t>(d)]) = f.cov(c, d) * inflate;
  }
  out.e.delta_sq = x[0];
  out.e.log_amplitude = -x[1];
  out.e.nu = -x[2];
  out.e.sqrt_correction = x[3];

  double mean = 0.0, wsum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) mean += y[i] / (s[i] * s[i]), wsum += 1.0 / (s[i] * s[i]);
  mean /= wsum;
  double tot = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) tot += std::pow((y[i] - mean) / s[i], 2);
  out.e.quality = tot > 0.0 ? 1.0 - f.chi2 / tot : 1.0;
  return out;
}

double model_chi2(const Exponent& e, const std::vector<double>& t, const std::vector<double>& r,
                  const std::vector<double>& sr) {
  double c = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) c += std::pow((std::abs(r[i]) - std::abs(e.model(t[i]))) / sr[i], 2);
  return c;
}

// Levenberg-Marquardt on (delta_sq, nu, log C, kappa) in the linear residual, nu kept in [-2, 2].
Exponent refine_amplitude(Exponent e, const std::vector<double>& t, const std::vector<double>& r,
                          const std::vector<double>& sr, bool with_kappa) {
  const std::size_t m = t.size();
  double chi = model_chi2(e, t, r, sr);
  double mu = 1e-3;
  for (int it = 0; it < 100; ++it) {
    Eigen::MatrixXd J(static_cast<Eigen::Index>(m), 4);
    Eigen::VectorXd res(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double mv = std::abs(e.model(t[i]));
      res[k] = (std::abs(r[i]) - mv) / sr[i];
      J(k, 0) = -mv / t[i] / sr[i];
      J(k, 1) = mv * std::log(t[i]) / sr[i];
      J(k, 2) = mv / sr[i];
      J(k, 3) = with_kappa ? -mv * std::sqrt(t[i]) / sr[i] : 0.0;
    }
    Mat4 A = J.transpose() * J;
    const Vec4 g = J.transpose() * res;
    A.diagonal() *= (1.0 + mu);
    if (!with_kappa) A(3, 3) = 1.0;
    const Vec4 step = A.ldlt().solve(g);
    Exponent trial = e;
    trial.delta_sq += step[0];
    trial.nu = std::clamp(trial.nu + step[1], -2.0, 2.0);
    trial.log_amplitude += step[2];
    trial.sqrt_correction += step[3];
    const double tc = model_chi2(trial, t, r, sr);
    if (std::isfinite(tc) && tc < chi) {
      const bool done = chi - tc <= 1e-14 * chi;
      e = trial;
      chi = tc;
      mu = std::max(mu / 5.0, 1e-12);
      if (done) break;
    } else {
      mu *= 10.0;
      if (mu > 1e10) break;
    }
  }
  return e;
}

double detectable_delta_sq(const Residual& res) {
  double best = 0.0;
  for (std::size_t i = 0; i < res.t.size(); ++i)
    if (res.sigma[i] > 0.0) best = std::max(best, -res.t[i] * std::log(10.0 * res.sigma[i]));
  return best;
}

struct WindowFit {
  Exponent e;
  Mat4 cov;
};

std::vector<std::size_t> select_window(const Residual& res, const TimeWindow& window) {
  std::vector<std::size_t> pick;
  if (window.t_hi > window.t_lo) {
    for (std::size_t i = 0; i < res.t.size(); ++i)
      if (res.t[i] >= window.t_lo && res.t[i] <= window.t_hi) pick.push_back(i);
    if (pick.size() < 5) throw Error(ErrorKind::Window, "exponent window holds fewer than 5 samples");
    for (std::size_t i : pick)
      if (!(std::abs(res.r[i]) > 10.0 * res.sigma[i]))
        throw Error(ErrorKind::SignalTooSmall,
                    "residual below 10x its uncertainty at t=" + std::to_string(res.t[i]) +
                        "; attainable delta_sq <= " + std::to_string(detectable_delta_sq(res)));
    const bool pos = res.r[pick[0]] > 0.0;
    for (std::size_t i : pick)
      if ((res.r[i] > 0.0) != pos) throw Error(ErrorKind::Window, "residual changes sign inside the exponent window");
    return pick;
  }
  std::vector<std::size_t> order(res.t.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return res.t[a] < res.t[b]; });
  auto valid = [&](std::size_t i) { return std::isfinite(res.r[i]) && std::abs(res.r[i]) > 10.0 * res.sigma[i]; };
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!valid(order[k])) continue;
    const bool pos = res.r[order[k]] > 0.0;
    const double t_end = 3.0 * res.t[order[k]];
    std::vector<std::size_t> run;
    for (std::size_t j = k; j < order.size(); ++j) {
      const std::size_t i = order[j];
      if (!valid(i) || (res.r[i] > 0.0) != pos) break;
      if (res.t[i] > t_end && run.size() >= 8) break;
      run.push_back(i);
    }
    if (run.size() >= 6) return run;
  }
  throw Error(ErrorKind::SignalTooSmall, "no run of 6 samples with residual above 10x its uncertainty; attainable delta_sq <= " +
                                             std::to_string(detectable_delta_sq(res)));
}

WindowFit fit_with(const std::vector<double>& t, const std::vector<double>& r, const std::vector<double>& s,
                   bool with_kappa) {
  LogFit lf = log_linear_fit(t, r, s, std::nullopt, with_kappa);
  if (lf.e.nu < -2.0 || lf.e.nu > 2.0) lf = log_linear_fit(t, r, s, std::clamp(lf.e.nu, -2.0, 2.0), with_kappa);

  // Multi-start amplitude refinement; the best chi^2 wins, ties to the lowest start.
  const std::vector<double> nus = {lf.e.nu, -0.5, 0.5, 1.0, 1.5};
  std::vector<Exponent> cand(nus.size());
  std::vector<double> chi(nus.size());
  const int ns = static_cast<int>(nus.size());
#pragma omp parallel for schedule(static)
  for (int k = 0; k < ns; ++k) {
    const auto u = static_cast<std::size_t>(k);
    const Exponent start = k == 0 ? lf.e : log_linear_fit(t, r, s, nus[u], with_kappa).e;
    cand[u] = refine_amplitude(start, t, r, s, with_kappa);
    chi[u] = model_chi2(cand[u], t, r, s);
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < cand.size(); ++k)
    if (chi[k] < chi[best]) best = k;
  Exponent e = chi[best] < model_chi2(lf.e, t, r, s) ? cand[best] : lf.e;
  e.quality = lf.e.quality;
  return {e, lf.cov};
}

WindowFit fit_on(const Residual& res, const std::vector<std::size_t>& pick) {
  std::vector<double> t, r, s;
  for (std::size_t i : pick) t.push_back(res.t[i]), r.push_back(res.r[i]), s.push_back(res.sigma[i]);
  // 1-D image sums carry pure t^nu prefactors. In 2-D the sqrt(t) correction is kept only when
  // it pays for itself (Akaike).
  WindowFit wf = fit_with(t, r, s, false);
  if (res.dimension == 2) {
    const WindowFit wk = fit_with(t, r, s, true);
    if (model_chi2(wk.e, t, r, s) + 2.0 < model_chi2(wf.e, t, r, s)) wf = wk;
  }
  Exponent& e = wf.e;
  e.amplitude_sign = r[0] > 0.0 ? 1 : -1;
  e.window = {t.front(), t.back()};
  double rel = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) rel += std::pow((std::abs(r[i]) - std::abs(e.model(t[i]))) / r[i], 2);
  e.fit_residual = std::sqrt(rel / static_cast<double>(t.size()));
  return wf;
}

double model_sigma(const WindowFit& wf, double t) {
  const Vec4 b = basis4(t);
  const double s_log = std::sqrt(std::max(0.0, b.dot(wf.cov * b))) / t;
  const double m = std::abs(wf.e.model(t));
  return m * std::min(s_log, 1e3) + 4.0 * kEps * m;
}

}  // namespace

double SWCoefficients::coefficient(int n) const {
  if (n == 0) return a0;
  if (n == 1) return a1;
  if (n == 2) return a2;
  return higher.at(static_cast<std::size_t>(n - 3));
}

double SWCoefficients::exponent(int n) const { return 0.5 * n - (dimension == 1 ? 0.5 : 1.0); }

double SWCoefficients::evaluate(double t) const {
  double acc = 0.0;
  for (int n = n_terms - 1; n >= 0; --n) acc += coefficient(n) * std::pow(t, exponent(n));
  return acc;
}

double SWCoefficients::sigma(double t) const {
  if (covariance.rows() != n_terms) return 0.0;
  Eigen::VectorXd b(n_terms);
  double mag = 0.0;
  for (int n = 0; n < n_terms; ++n) {
    b[n] = std::pow(t, exponent(n));
    mag += std::abs(coefficient(n) * b[n]);
  }
  return std::sqrt(std::max(0.0, b.dot(covariance * b))) + 4.0 * kEps * mag;
}

double SWCoefficients::area() const { return dimension == 1 ? 2.0 * std::sqrt(pi) * a0 : 4.0 * pi * a0; }
double SWCoefficients::perimeter() const { return dimension == 1 ? 4.0 * std::abs(a1) : 8.0 * std::sqrt(pi) * std::abs(a1); }
double SWCoefficients::constant() const { return dimension == 1 ? a1 : a2; }
double SWCoefficients::area_sigma() const {
  const double f = dimension == 1 ? 2.0 * std::sqrt(pi) : 4.0 * pi;
  return covariance.rows() > 0 ? f * std::sqrt(covariance(0, 0)) : 0.0;
}
double SWCoefficients::perimeter_sigma() const {
  const double f = dimension == 1 ? 4.0 : 8.0 * std::sqrt(pi);
  return covariance.rows() > 1 ? f * std::sqrt(covariance(1, 1)) : 0.0;
}

SWCoefficients fit_algebraic(const TraceSamples& traces, int n_terms, const TimeWindow& window) {
  check_traces(traces);
  if (n_terms < 3) throw Error(ErrorKind::Argument, "n_terms must be at least 3");
  if (!(window.t_lo > 0.0) || !(window.t_hi > window.t_lo)) throw Error(ErrorKind::Window, "invalid t window");
  std::vector<std::size_t> pick;
  for (std::size_t i = 0; i < traces.t.size(); ++i)
    if (traces.t[i] >= window.t_lo && traces.t[i] <= window.t_hi) pick.push_back(i);
  if (pick.size() < static_cast<std::size_t>(2 * n_terms))
    throw Error(ErrorKind::Window, "window [" + std::to_string(window.t_lo) + ", " + std::to_string(window.t_hi) +
                                       "] holds " + std::to_string(pick.size()) + " samples; " +
                                       std::to_string(2 * n_terms) + " are needed");
  SWCoefficients sw;
  sw.n_terms = n_terms;
  sw.dimension = traces.dimension;
  sw.window = window;
  const Eigen::Index m = static_cast<Eigen::Index>(pick.size());
  Eigen::MatrixXd A(m, n_terms);
  Eigen::VectorXd y(m), s(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t k = pick[static_cast<std::size_t>(i)];
    for (int n = 0; n < n_terms; ++n) A(i, n) = std::pow(traces.t[k], sw.exponent(n));
    y[i] = traces.values[k];
    s[i] = data_sigma(traces, k);
  }
  const Lsq f = weighted_lsq(A, y, s);
  sw.condition = f.condition;
  if (!(f.condition <= 1e12))
    throw Error(ErrorKind::Window, "design matrix condition " + std::to_string(f.condition) +
                                       " exceeds 1e12; use a narrower t-range or fewer terms");
  sw.a0 = f.x[0];
  sw.a1 = f.x[1];
  sw.a2 = f.x[2];
  for (int n = 3; n < n_terms; ++n) sw.higher.push_back(f.x[n]);
  sw.chi2_per_dof = f.dof > 0 ? f.chi2 / f.dof : 0.0;
  sw.covariance = f.cov * std::max(1.0, sw.chi2_per_dof);
  return sw;
}

SWCoefficients fit_algebraic_auto(const TraceSamples& traces, int n_terms) {
  check_traces(traces);
  const double t_lo = *std::min_element(traces.t.begin(), traces.t.end());
  double t_hi = *std::max_element(traces.t.begin(), traces.t.end());
  std::optional<SWCoefficients> prev;
  std::string last_error;
  while (t_hi > t_lo) {
    SWCoefficients cur;
    try {
      cur = fit_algebraic(traces, n_terms, {t_lo, t_hi});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Window) throw;
      last_error = e.what();
      if (prev) return *prev;
      t_hi /= 1.5;
      continue;
    }
    if (prev) {
      bool stable = true;
      for (int n = 0; n < 3; ++n) {
        const double sig = std::sqrt(std::max(cur.covariance(n, n), prev->covariance(n, n)));
        stable = stable && std::abs(cur.coefficient(n) - prev->coefficient(n)) <= sig;
      }
      if (stable) return cur;
    }
    prev = cur;
    t_hi /= 1.5;
  }
  if (prev) return *prev;
  throw Error(ErrorKind::Window, "no admissible fit window: " + last_error);
}

LimitEstimate limit_extract(const TraceSamples& traces) {
  check_traces(traces);
  const auto nodes = limit_nodes(traces.t, 8);
  if (nodes.size() < 4) throw Error(ErrorKind::InsufficientRange, "limit extraction needs at least 4 well-spread small-t samples");
  std::vector<double> h, A, B, C;
  for (std::size_t i : nodes) h.push_back(std::sqrt(traces.t[i]));
  const bool one_d = traces.dimension == 1;
  LimitEstimate out;

  for (std::size_t i : nodes) {
    const double t = traces.t[i];
    A.push_back(one_d ? 2.0 * std::sqrt(pi * t) * traces.values[i] : 4.0 * pi * t * traces.values[i]);
  }
  const auto a = neville_to_zero(h, A, "area");
  out.area = a.value;
  out.area_error = a.error;

  if (one_d) {
    for (std::size_t i : nodes) C.push_back(traces.values[i] - out.area / (2.0 * std::sqrt(pi * traces.t[i])));
    const auto c = neville_to_zero(h, C, "constant");
    out.constant = c.value;
    out.constant_error = c.error;
    out.perimeter = 4.0 * std::abs(c.value);
    out.perimeter_error = 4.0 * c.error;
    return out;
  }
  for (std::size_t i : nodes) {
    const double t = traces.t[i];
    B.push_back(-8.0 * std::sqrt(pi * t) * (traces.values[i] - out.area / (4.0 * pi * t)));
  }
  const auto p = neville_to_zero(h, B, "perimeter");
  out.perimeter = std::abs(p.value);
  out.perimeter_error = p.error;
  for (std::size_t i : nodes) {
    const double t = traces.t[i];
    C.push_back(traces.values[i] - out.area / (4.0 * pi * t) + out.perimeter / (8.0 * std::sqrt(pi * t)));
  }
  const auto c = neville_to_zero(h, C, "constant");
  out.constant = c.value;
  out.constant_error = c.error;
  return out;
}

double Exponent::model(double t) const {
  return amplitude_sign * std::exp(log_amplitude + nu * std::log(t) - delta_sq / t - sqrt_correction * std::sqrt(t));
}

Residual transcendental_residual(const TraceSamples& traces, const SWCoefficients& sw) {
  check_traces(traces);
  Residual res;
  res.dimension = traces.dimension;
  for (std::size_t i = 0; i < traces.t.size(); ++i) {
    const double t = traces.t[i];
    res.t.push_back(t);
    res.r.push_back(traces.values[i] - sw.evaluate(t));
    res.sigma.push_back(std::hypot(data_sigma(traces, i), sw.sigma(t)));
  }
  return res;
}

Exponent extract_exponent(const Residual& residual, const TimeWindow& window) {
  return fit_on(residual, select_window(residual, window)).e;
}

Exponent extract_exponent(const TraceSamples& traces, const SWCoefficients& sw, const TimeWindow& window) {
  return extract_exponent(transcendental_residual(traces, sw), window);
}

PeelResult peel_spectrum(const Residual& residual, int k_max) {
  if (k_max < 1) throw Error(ErrorKind::Argument, "k_max must be at least 1");
  PeelResult out;
  std::vector<WindowFit> fits;
  std::vector<std::vector<std::size_t>> windows;

  // residual minus every fitted term except `skip`, with the uncertainty of the subtracted models
  auto residual_without = [&](std::size_t skip) {
    Residual r = residual;
    for (std::size_t j = 0; j < fits.size(); ++j) {
      if (j == skip) continue;
      for (std::size_t i = 0; i < r.t.size(); ++i) {
        r.r[i] -= fits[j].e.model(r.t[i]);
        r.sigma[i] = std::hypot(r.sigma[i], model_sigma(fits[j], r.t[i]));
      }
    }
    return r;
  };

  // Two look-ahead terms are fitted as well so that backfitting can clear the next exponents out
  // of the upper end of the reported windows; only the first k_max are returned.
  const int k_fit = k_max + 2;
  for (int k = 0; k < k_fit; ++k) {
    const Residual cur = residual_without(fits.size());
    WindowFit wf;
    std::vector<std::size_t> pick;
    try {
      pick = select_window(cur, {});
      wf = fit_on(cur, pick);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SignalTooSmall && e.kind() != ErrorKind::Window) throw;
      if (k < k_max) out.diagnostics.push_back("peel " + std::to_string(k + 1) + " stopped: " + e.what());
      break;
    }
    if (!fits.empty() && !(wf.e.delta_sq > fits.back().e.delta_sq * (1.0 + 1e-6))) {
      if (k < k_max)
        out.diagnostics.push_back("peel " + std::to_string(k + 1) + " stopped: exponent " + std::to_string(wf.e.delta_sq) +
                                " does not exceed the previous one");
      break;
    }
    fits.push_back(wf);
    windows.push_back(pick);

    // Backfitting: refit each term on its own window with the others removed.
    for (int sweep = 0; sweep < 8 && fits.size() > 1; ++sweep) {
      double change = 0.0;
      for (std::size_t j = 0; j < fits.size(); ++j) {
        Residual rj = residual;
        for (std::size_t q = 0; q < fits.size(); ++q)
          if (q != j)
            for (std::size_t i = 0; i < rj.t.size(); ++i) rj.r[i] -= fits[q].e.model(rj.t[i]);
        bool usable = true;
        for (std::size_t i : windows[j]) usable = usable && (rj.r[i] > 0.0) == (fits[j].e.amplitude_sign > 0) && rj.r[i] != 0.0;
        if (!usable) continue;
        const WindowFit nf = fit_on(rj, windows[j]);
        change = std::max(change, std::abs(nf.e.delta_sq - fits[j].e.delta_sq));
        fits[j] = nf;
      }
      if (change < 1e-12) break;
    }
  }
  if (fits.size() > static_cast<std::size_t>(k_max)) fits.resize(static_cast<std::size_t>(k_max));
  for (const auto& f : fits) out.exponents.push_back(f.e);
  out.remaining = residual_without(fits.size());
  return out;
}

PeelResult peel_spectrum(const TraceSamples& traces, const SWCoefficients& sw, int k_max) {
  return peel_spectrum(transcendental_residual(traces, sw), k_max);
}

MatchResult match_spectrum(const std::vector<double>& recovered_delta_sq, const LengthSpectrum& predicted, double rel_tol) {
  MatchResult out;
  std::vector<std::size_t> order(recovered_delta_sq.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return recovered_delta_sq[a] < recovered_delta_sq[b]; });
  std::vector<bool> used(predicted.entries.size(), false);
  for (std::size_t i : order) {
    const double d = std::sqrt(std::max(0.0, recovered_delta_sq[i]));
    int best = -1;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < predicted.entries.size(); ++j) {
      if (used[j]) continue;
      const double g = std::abs(d - predicted.entries[j].delta) / predicted.entries[j].delta;
      if (g < gap) gap = g, best = static_cast<int>(j);
    }
    if (best >= 0 && gap <= rel_tol) {
      used[static_cast<std::size_t>(best)] = true;
      out.matches.push_back({static_cast<int>(i), predicted.entries[static_cast<std::size_t>(best)], gap});
    } else {
      out.unexplained.push_back(static_cast<int>(i));
    }
  }
  return out;
}

RecoveryReport recover(const TraceSamples& traces, const RecoveryConfig& cfg, const LengthSpectrum* predicted) {
  RecoveryReport rep;
  rep.sw = cfg.sw_window ? fit_algebraic(traces, cfg.n_terms, *cfg.sw_window) : fit_algebraic_auto(traces, cfg.n_terms);
  rep.area = rep.sw.area();
  rep.perimeter = rep.sw.perimeter();
  rep.constant = rep.sw.constant();
  rep.holes_if_smooth = 1.0 - 6.0 * rep.constant;
  if (traces.dimension == 2)
    rep.diagnostics.push_back("constant " + std::to_string(rep.constant) + ": smooth boundary reading gives " +
                              std::to_string(rep.holes_if_smooth) + " holes; with corners it is a sum of corner terms");
  try {
    rep.limits = limit_extract(traces);
  } catch (const Error& e) {
    rep.diagnostics.push_back(std::string("limit extraction: ") + e.what());
  }
  if (cfg.k_max > 0) {
    const PeelResult pr = peel_spectrum(traces, rep.sw, cfg.k_max);
    rep.exponents = pr.exponents;
    rep.diagnostics.insert(rep.diagnostics.end(), pr.diagnostics.begin(), pr.diagnostics.end());
  }
  if (predicted) {
    std::vector<double> ds;
    for (const auto& e : rep.exponents) ds.push_back(e.delta_sq);
    const MatchResult mr = match_spectrum(ds, *predicted, cfg.rel_tol);
    rep.matches = mr.matches;
    rep.unexplained = mr.unexplained;
  }
  return rep;
}

}  // namespace hkt
