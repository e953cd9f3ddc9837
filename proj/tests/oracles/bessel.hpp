#pragma once

// Integer-order Bessel functions by power series, for moderate arguments
// (x <= ~12). Long double keeps the cancellation in the series harmless.

#include <cmath>

namespace oracle {

inline constexpr long double kEulerGamma = 0.577215664901532860606512090082402431L;
inline constexpr long double kPiL = 3.141592653589793238462643383279502884L;

inline long double bessel_j(int n, long double x) {
  const long double q = -0.25L * x * x;
  long double term = std::pow(0.5L * x, n);
  for (int i = 1; i <= n; ++i) term /= i;
  long double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * (k + n));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
  }
  return sum;
}

inline long double bessel_y0(long double x) {
  const long double q = -0.25L * x * x;
  long double term = 1.0L, harmonic = 0.0L, sum = 0.0L;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    harmonic += 1.0L / k;
    const long double t = -term * harmonic;
    sum += t;
    if (std::fabs(t) < 1e-22L * (1.0L + std::fabs(sum))) break;
  }
  return 2.0L / kPiL * ((std::log(0.5L * x) + kEulerGamma) * bessel_j(0, x) + sum);
}

inline long double bessel_y1(long double x) {
  const long double h = 0.5L * x, q = -h * h;
  long double term = h;  // (x/2)^{2k+1} (-1)^k / (k! (k+1)!) at k = 0
  long double hk = 0.0L, hk1 = 1.0L;
  long double sum = term * (hk + hk1);
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * (k + 1));
    hk += 1.0L / k;
    hk1 += 1.0L / (k + 1);
    const long double t = term * (hk + hk1);
    sum += t;
    if (std::fabs(t) < 1e-22L * (1.0L + std::fabs(sum))) break;
  }
  return 2.0L / kPiL * (std::log(h) + kEulerGamma) * bessel_j(1, x) - 2.0L / (kPiL * x) - sum / kPiL;
}

}  // namespace oracle
