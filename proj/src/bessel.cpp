#include "hkt/bessel.hpp"

#include <atomic>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "hkt/error.hpp"

namespace hkt {
namespace {

std::atomic<bool> g_fault{false};

constexpr double kScanStep = 0.5;

double series_j(int n, double x) {
  const double h = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= h / k;
  double sum = term;
  const double h2 = h * h;
  for (int k = 1; k < 200; ++k) {
    term *= -h2 / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Backward recurrence from a start order well above max(n, x), normalized with
// J_0 + 2 sum J_2k = 1.
void miller(int n, double x, double& jm1, double& j0, double& jp1) {
  const double big = std::max(static_cast<double>(n), x);
  int m = static_cast<int>(big + 20.0 + 6.0 * std::sqrt(big + 1.0)) + 8;
  if (m % 2) ++m;
  double next = 0.0, cur = 1e-300, norm = 0.0;
  double vm1 = 0.0, v0 = 0.0, vp1 = 0.0;
  const double inv_x = 1.0 / x;
  for (int k = m; k >= 1; --k) {
    const double prev = 2.0 * k * inv_x * cur - next;  // J_{k-1}
    next = cur;
    cur = prev;
    const int order = k - 1;
    if (order == n + 1) vp1 = cur;
    if (order == n) v0 = cur;
    if (order == n - 1) vm1 = cur;
    if (order % 2 == 0) norm += (order == 0 ? 1.0 : 2.0) * cur;
    if (std::abs(cur) > 1e250) {
      const double s = 1e-250;
      cur *= s;
      next *= s;
      norm *= s;
      vm1 *= s;
      v0 *= s;
      vp1 *= s;
    }
  }
  // n + 1 == m is impossible by construction; n - 1 == -1 uses J_{-1} = -J_1.
  if (n == 0) vm1 = -vp1;
  jm1 = vm1 / norm;
  j0 = v0 / norm;
  jp1 = vp1 / norm;
}

double eval(int n, double x, bool derivative) {
  return derivative ? bessel_j_prime(n, x) : bessel_j(n, x);
}

double refine(int n, double lo, double hi, bool derivative) {
  auto f = [&](double x) { return eval(n, x, derivative); };
  std::uintmax_t iters = 50;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  if (iters >= 50)
    throw Error(ErrorKind::Numeric, "Bessel zero refinement did not converge for order " + std::to_string(n) +
                                        " in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return 0.5 * (r.first + r.second);
}

double scan_start(int n, bool derivative) {
  if (derivative) return std::max(1e-3, n - 0.5);
  return std::max(0.5, static_cast<double>(n));
}

// McMahon expansion, used to bracket large-index zeros.
double mcmahon(int n, int k, bool derivative) {
  const double mu = 4.0 * n * n;
  const double pi = std::numbers::pi;
  if (!derivative) {
    const double b = (k + 0.5 * n - 0.25) * pi;
    const double e = 8.0 * b;
    return b - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e * e * e);
  }
  const double b = (k + 0.5 * n - 0.75) * pi;
  const double e = 8.0 * b;
  return b - (mu + 3.0) / e - 4.0 * (7.0 * mu * mu + 82.0 * mu - 9.0) / (3.0 * e * e * e);
}

double apply_fault(double z) { return g_fault.load() ? z * (1.0 + 1e-4) : z; }

}  // namespace

void set_bessel_fault(bool enabled) { g_fault.store(enabled); }
bool bessel_fault() { return g_fault.load(); }

double bessel_j(int n, double x) {
  if (n < 0) throw Error(ErrorKind::Argument, "negative Bessel order");
  if (x < 0.0) throw Error(ErrorKind::Argument, "negative Bessel argument");
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x <= 2.0) return series_j(n, x);
  double a, b, c;
  miller(n, x, a, b, c);
  return b;
}

double bessel_j_prime(int n, double x) {
  if (n < 0) throw Error(ErrorKind::Argument, "negative Bessel order");
  if (x == 0.0) return n == 1 ? 0.5 : 0.0;
  if (x <= 2.0) {
    if (n == 0) return -series_j(1, x);
    return 0.5 * (series_j(n - 1, x) - series_j(n + 1, x));
  }
  double jm1, j0, jp1;
  miller(n, x, jm1, j0, jp1);
  return 0.5 * (jm1 - jp1);
}

std::vector<double> bessel_j_zeros_below(int order, double x_max, bool derivative) {
  if (order < 0) throw Error(ErrorKind::Argument, "negative Bessel order");
  std::vector<double> out;
  if (derivative && order == 0) {
    for (double z : bessel_j_zeros_below(1, x_max, false)) out.push_back(z);
    return out;
  }
  double lo = scan_start(order, derivative);
  double flo = eval(order, lo, derivative);
  while (lo < x_max) {
    const double hi = lo + kScanStep;
    const double fhi = eval(order, hi, derivative);
    if ((flo < 0.0) != (fhi < 0.0) || fhi == 0.0) {
      const double z = fhi == 0.0 ? hi : refine(order, lo, hi, derivative);
      if (z < x_max) out.push_back(apply_fault(z));
    }
    lo = hi;
    flo = fhi;
  }
  return out;
}

double bessel_j_zero(int order, int index, bool derivative) {
  if (order < 0 || order > 200) throw Error(ErrorKind::Argument, "Bessel order must be in [0, 200]");
  if (index < 1 || index > 10000) throw Error(ErrorKind::Argument, "Bessel zero index must be in [1, 10000]");
  if (derivative && order == 0) return bessel_j_zero(1, index, false);

  if (index <= order + 50) {
    double lo = scan_start(order, derivative);
    double flo = eval(order, lo, derivative);
    int found = 0;
    for (;;) {
      const double hi = lo + kScanStep;
      const double fhi = eval(order, hi, derivative);
      if ((flo < 0.0) != (fhi < 0.0) || fhi == 0.0) {
        if (++found == index) return apply_fault(fhi == 0.0 ? hi : refine(order, lo, hi, derivative));
      }
      lo = hi;
      flo = fhi;
    }
  }
  const double guess = mcmahon(order, index, derivative);
  double lo = guess - 0.75, hi = guess + 0.75;
  double flo = eval(order, lo, derivative), fhi = eval(order, hi, derivative);
  if ((flo < 0.0) == (fhi < 0.0))
    throw Error(ErrorKind::Numeric, "McMahon bracket failed for order " + std::to_string(order) + " index " +
                                        std::to_string(index));
  return apply_fault(refine(order, lo, hi, derivative));
}

}  // namespace hkt
