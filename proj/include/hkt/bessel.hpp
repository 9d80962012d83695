#pragma once

#include <vector>

namespace hkt {

// J_n(x) for x >= 0 by Miller's backward recurrence (ascending series for small x).
double bessel_j(int n, double x);
// dJ_n/dx.
double bessel_j_prime(int n, double x);

// k-th positive zero of J_n, or of J_n' when derivative is set (x = 0 is not counted).
double bessel_j_zero(int order, int index, bool derivative);

// All positive zeros of J_n (or J_n') below x_max, ascending.
std::vector<double> bessel_j_zeros_below(int order, double x_max, bool derivative);

// Testing hook: when enabled, every zero is scaled by (1 + 1e-4).
void set_bessel_fault(bool enabled);
bool bessel_fault();

}  // namespace hkt
