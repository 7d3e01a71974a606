#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace nljc {

/// Reduces an angle to [-pi, pi] in extended precision.
///
/// Kerr terms with f(n) = sqrt(n) grow like chi n^4, so the phases phi_n t
/// reach 1e12 rad at the upper end of a thermal or squeezed basis. The product
/// rate * t is formed in long double and 2 pi is split Cody-Waite style so the
/// reduction itself does not add error beyond the rounding of the product.
inline double reduce_angle(long double theta) {
  constexpr long double kTwoPiHi = 6.283185482025146484375L;  // 2 pi rounded to 24 bits
  constexpr long double kTwoPiLo = -1.748455600074497132334409942316056612e-7L;
  constexpr long double kInvTwoPi = 0.159154943091895335768883763372514362L;
  if (std::fabs(theta) <= 3.14159265358979323846L) return static_cast<double>(theta);
  // Rounding through int64 is ~20x faster than nearbyintl (which saves and
  // restores the floating-point environment); fall back beyond its range.
  const long double turns = theta * kInvTwoPi;
  const long double q = std::fabs(turns) < 4e18L
                            ? static_cast<long double>(static_cast<std::int64_t>(turns + (turns < 0 ? -0.5L : 0.5L)))
                            : std::nearbyint(turns);
  return static_cast<double>((theta - q * kTwoPiHi) - q * kTwoPiLo);
}

/// exp(i theta) with theta reduced as above.
inline std::complex<double> phasor(long double theta) {
  const double r = reduce_angle(theta);
  return {std::cos(r), std::sin(r)};
}

}  // namespace nljc
