#pragma once

namespace jpa {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// CODATA 2018 exact values, SI units.
struct PhysConstants {
  static constexpr double hbar = 1.054571817e-34;          // J s
  static constexpr double k_b = 1.380649e-23;              // J / K
  static constexpr double e_charge = 1.602176634e-19;      // C
  static constexpr double phi0 = hbar / (2.0 * e_charge);  // Wb, reduced flux quantum
};

static_assert(PhysConstants::hbar > 0.0);
static_assert(PhysConstants::k_b > 0.0);
static_assert(PhysConstants::phi0 > 0.0);

}  // namespace jpa
