#pragma once

#include <cmath>
#include <functional>

#include "fluxspec/errors.hpp"
#include "fluxspec/geometry.hpp"
#include "fluxspec/radial.hpp"

namespace fluxspec {

namespace detail {

/// Bracketed bisection; `lo` and `hi` must straddle a sign change.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (!(std::isfinite(flo) && std::isfinite(fhi)) || (flo > 0.0) == (fhi > 0.0))
    throw OracleFailure("bisection bracket does not straddle a root");
  for (int it = 0; it < 400 && hi - lo > xtol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// First sign change of `f` on (0, kmax], scanned in `steps` equal steps.
inline double first_root(const std::function<double(double)>& f, double kmax, int steps, double xtol) {
  const double dk = kmax / steps;
  double prev_k = 1e-3 * dk;
  double prev = f(prev_k);
  for (int i = 1; i <= steps; ++i) {
    const double k = i * dk;
    const double v = f(k);
    if ((v > 0.0) != (prev > 0.0)) return bisect(f, prev_k, k, xtol);
    prev_k = k;
    prev = v;
  }
  throw OracleFailure("halfflux_oracle: no root in scan window");
}

}  // namespace detail

/// Smallest k > 0 at reduced flux 1/2 on the annulus, where the radial
/// solutions are r^(-1/2) sin(k r + alpha).
///   Dirichlet inner: tan(k (R1 - R0)) = 2 k R1
///   Neumann inner:   k (R1 - R0) = atan(2 k R1) - atan(2 k R0)
inline double halfflux_root(const AnnulusSpec& a, InnerBC bc) {
  const double L = a.R1 - a.R0;
  const double kmax = kPi / (2.0 * L);
  const double xtol = 1e-13 * std::max(1.0, kmax);
  if (bc == InnerBC::Dirichlet) {
    const auto g = [&](double k) { return std::sin(k * L) - 2.0 * k * a.R1 * std::cos(k * L); };
    return detail::first_root(g, kmax, 2000, xtol);
  }
  const auto g = [&](double k) { return std::atan(2.0 * k * a.R1) - std::atan(2.0 * k * a.R0) - k * L; };
  return detail::first_root(g, kmax, 2000, xtol);
}

inline double halfflux_oracle(const AnnulusSpec& a, InnerBC bc) {
  const double k = halfflux_root(a, bc);
  return k * k;
}

/// Half-flux Friedrichs ground state on the disk of radius R1 (the R0 -> 0
/// limit of the Dirichlet-inner case): tan(k R1) = 2 k R1.
inline double halfflux_disk_oracle(double R1) {
  if (!(R1 > 0.0)) throw InvalidArgument("halfflux_disk_oracle: radius must be positive");
  const auto g = [](double x) { return std::sin(x) - 2.0 * x * std::cos(x); };
  const double x = detail::first_root(g, kPi / 2.0, 2000, 1e-14);
  return x * x / (R1 * R1);
}

}  // namespace fluxspec
