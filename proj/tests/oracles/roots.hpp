#pragma once

// Scalar root finding for the transcendental oracle equations: a scan for the
// first sign change followed by Newton steps safeguarded by bisection.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oracles/bessel.hpp"

namespace oracle {

template <class F>
double first_root(F&& f, double lo, double hi, int samples = 4000) {
  double xa = lo, fxa = f(lo);
  for (int i = 1; i <= samples; ++i) {
    const double xb = lo + (hi - lo) * i / samples;
    const double fxb = f(xb);
    if (fxa == 0.0) return xa;
    if ((fxa < 0.0) != (fxb < 0.0)) {
      double a = xa, b = xb, fa = fxa;
      double x = 0.5 * (a + b);
      for (int it = 0; it < 200; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx < 0.0) == (fa < 0.0)) {
          a = x;
          fa = fx;
        } else {
          b = x;
        }
        const double d = 1e-7 * std::max(1.0, std::fabs(x));
        const double slope = (f(x + d) - f(x - d)) / (2.0 * d);
        double next = slope != 0.0 ? x - fx / slope : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::fabs(next - x) < 1e-16 * std::max(1.0, std::fabs(x)) || b - a < 1e-15) return next;
        x = next;
      }
      return x;
    }
    xa = xb;
    fxa = fxb;
  }
  throw std::runtime_error("oracle: no sign change in the scan interval");
}

/// Inner Dirichlet, outer Neumann at half flux on (R0, R1): u = sin(k(r - R0)) / sqrt(r),
/// so the outer condition reads tan(k L) = 2 k R1 with L = R1 - R0.
inline double halfflux_dirichlet_k(double R0, double R1) {
  const double L = R1 - R0;
  return first_root([&](double k) { return std::tan(k * L) - 2.0 * k * R1; }, 1e-9, 0.5 * M_PI / L - 1e-9);
}

/// Both conditions of Neumann type at half flux: u = cos(k (r - R0) - atan(1 / (2 k R0))) / sqrt(r).
inline double halfflux_neumann_k(double R0, double R1) {
  const double L = R1 - R0;
  return first_root([&](double k) { return std::atan(2.0 * k * R1) - std::atan(2.0 * k * R0) - k * L; }, 1e-6,
                    M_PI / L);
}

/// Disk with the Friedrichs (regular) half-flux state sin(k r) / sqrt(r): tan(x) = 2x, x = k R1.
inline double halfflux_disk_x() {
  return first_root([](double x) { return std::tan(x) - 2.0 * x; }, 1e-6, 0.5 * M_PI - 1e-9);
}

/// Zero flux, inner Dirichlet, outer Neumann: J0(kR0) Y1(kR1) - Y0(kR0) J1(kR1) = 0.
inline double zero_flux_dirichlet_k(double R0, double R1) {
  return first_root(
      [&](double k) {
        return static_cast<double>(bessel_j(0, k * R0) * bessel_y1(k * R1) - bessel_y0(k * R0) * bessel_j(1, k * R1));
      },
      1e-3, 3.0);
}

}  // namespace oracle
