#pragma once

#include <cmath>

#include "fluxspec/errors.hpp"

namespace fluxspec {

/// Magnetic flux together with its canonical representative in [0, 1/2].
///
/// The ground-state energy is even and 1-periodic in the flux, so every raw
/// value maps to `reduced` with `raw == (sign_flipped ? -reduced : reduced) + mode_shift`.
struct Flux {
  double raw = 0.0;
  double reduced = 0.0;
  long mode_shift = 0;
  bool sign_flipped = false;

  double reconstruct() const noexcept {
    return (sign_flipped ? -reduced : reduced) + static_cast<double>(mode_shift);
  }
  bool is_integer() const noexcept { return reduced == 0.0; }
};

inline Flux reduce_flux(double phi) {
  if (!std::isfinite(phi)) throw InvalidArgument("reduce_flux: flux must be finite");
  double shift = std::nearbyint(phi);
  double offset = phi - shift;
  // ties go to the positive representative +1/2
  if (offset <= -0.5) {
    offset += 1.0;
    shift -= 1.0;
  }
  Flux f;
  f.raw = phi;
  f.reduced = std::fabs(offset);
  f.mode_shift = static_cast<long>(shift);
  f.sign_flipped = offset < 0.0;
  return f;
}

}  // namespace fluxspec
