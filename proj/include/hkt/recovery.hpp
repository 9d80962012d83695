#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "hkt/billiards.hpp"
#include "hkt/spectra.hpp"

namespace hkt {

struct TimeWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

// Short-time algebraic expansion. In 2-D the basis is t^{n/2-1} (a0/t + a1/sqrt(t) + a2 + ...);
// in 1-D it is t^{n/2-1/2} (a0/sqrt(t) + a1 + a2 sqrt(t) + ...).
struct SWCoefficients {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  std::vector<double> higher;
  int n_terms = 0;
  int dimension = 2;
  TimeWindow window;
  Eigen::MatrixXd covariance;
  double condition = 0.0;
  double chi2_per_dof = 0.0;

  double coefficient(int n) const;
  double exponent(int n) const;  // power of t carried by coefficient n
  double evaluate(double t) const;
  double sigma(double t) const;  // propagated coefficient uncertainty

  double area() const;
  double perimeter() const;
  double constant() const;  // t^0 coefficient
  double area_sigma() const;
  double perimeter_sigma() const;
};

SWCoefficients fit_algebraic(const TraceSamples& traces, int n_terms, const TimeWindow& window);
// Shrinks t_hi by 1.5 until the three leading coefficients repeat within one standard deviation.
SWCoefficients fit_algebraic_auto(const TraceSamples& traces, int n_terms);

struct LimitEstimate {
  double area = 0.0;
  double perimeter = 0.0;
  double constant = 0.0;
  double area_error = 0.0;
  double perimeter_error = 0.0;
  double constant_error = 0.0;
};

// Sequential t -> 0 limits by Neville extrapolation in sqrt(t) over the smallest-t samples.
LimitEstimate limit_extract(const TraceSamples& traces);

struct Exponent {
  double delta_sq = 0.0;
  int amplitude_sign = 1;
  double fit_residual = 0.0;  // weighted rms of the amplitude model in the window
  double quality = 0.0;       // R^2 of the -t log|r| fit
  double nu = 0.0;            // |r| ~ C t^nu exp(-delta_sq / t - kappa sqrt(t))
  double log_amplitude = 0.0;
  double sqrt_correction = 0.0;  // kappa
  TimeWindow window;

  double model(double t) const;
};

// Residual r = P - P_SW with its pointwise uncertainty.
struct Residual {
  std::vector<double> t;
  std::vector<double> r;
  std::vector<double> sigma;
  int dimension = 2;  // 1-D residuals are fitted without the sqrt(t) amplitude correction
};

Residual transcendental_residual(const TraceSamples& traces, const SWCoefficients& sw);

// Leading exponent of the residual from -t log|r| on the lowest-t run above the noise floor.
// window = {0, 0} selects it automatically.
Exponent extract_exponent(const TraceSamples& traces, const SWCoefficients& sw, const TimeWindow& window = {});
Exponent extract_exponent(const Residual& residual, const TimeWindow& window = {});

struct PeelResult {
  std::vector<Exponent> exponents;
  std::vector<std::string> diagnostics;
  Residual remaining;
};

PeelResult peel_spectrum(const TraceSamples& traces, const SWCoefficients& sw, int k_max);
PeelResult peel_spectrum(const Residual& residual, int k_max);

struct Match {
  int recovered_index = 0;
  LengthEntry predicted;
  double relative_gap = 0.0;
};

struct MatchResult {
  std::vector<Match> matches;
  std::vector<int> unexplained;
};

// Greedy nearest matching of sqrt(delta_sq) against predicted delta, one predicted entry per recovered value.
MatchResult match_spectrum(const std::vector<double>& recovered_delta_sq, const LengthSpectrum& predicted, double rel_tol);

struct RecoveryConfig {
  int n_terms = 5;
  int k_max = 2;
  double rel_tol = 0.02;
  std::optional<TimeWindow> sw_window;
};

struct RecoveryReport {
  double area = 0.0;
  double perimeter = 0.0;
  double constant = 0.0;
  double holes_if_smooth = 0.0;  // r from constant = (1 - r) / 6
  SWCoefficients sw;
  std::optional<LimitEstimate> limits;
  std::vector<Exponent> exponents;
  std::vector<Match> matches;
  std::vector<int> unexplained;
  std::vector<std::string> diagnostics;
};

RecoveryReport recover(const TraceSamples& traces, const RecoveryConfig& cfg, const LengthSpectrum* predicted = nullptr);

}  // namespace hkt
