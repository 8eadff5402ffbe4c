#pragma once

#include <cmath>
#include <optional>

#include "jpa/constants.hpp"
#include "jpa/errors.hpp"

namespace jpa {

// Series SQUID-array geometry; metadata unless used to derive the Kerr
// constant.
struct SquidGeometry {
  double n_squids = 0.0;  // count
  double i_c = 0.0;       // A, junction critical current
  double c = 0.0;         // F, shunt capacitance
  double c_c = 0.0;       // F, coupling capacitance
};

// K = -hbar omega0^2 / (16 N_s phi0 I_c); negative for these devices.
inline double kerr_constant(double n_squids, double i_c, double omega0) {
  if (!(n_squids >= 1.0) || !(i_c > 0.0) || !(omega0 > 0.0))
    throw DomainError("kerr_constant: require n_squids >= 1, i_c > 0, omega0 > 0");
  return -PhysConstants::hbar * omega0 * omega0 /
         (16.0 * n_squids * PhysConstants::phi0 * i_c);
}

struct DeviceParams {
  double omega0 = 0.0;  // rad/s, bare resonance (2*pi*f0)
  double gamma = 0.0;   // rad/s, field decay rate
  double kerr = 0.0;    // rad/s, Kerr constant
  std::optional<SquidGeometry> squid;

  double quality_factor() const { return omega0 / (2.0 * gamma); }
  double f0() const { return omega0 / kTwoPi; }
};

inline DeviceParams make_device(double omega0, double gamma, double kerr,
                                std::optional<SquidGeometry> squid = std::nullopt) {
  if (!(omega0 > 0.0)) throw DomainError("device: omega0 must be positive");
  if (!(gamma > 0.0)) throw DomainError("device: gamma must be positive");
  if (!(kerr != 0.0) || !std::isfinite(kerr))
    throw DomainError("device: kerr must be nonzero and finite");
  if (!(omega0 / (2.0 * gamma) > 1.0))
    throw DomainError("device: quality factor omega0/(2 gamma) must exceed 1");
  if (squid) {
    const double k_geom = kerr_constant(squid->n_squids, squid->i_c, omega0);
    if (std::abs(k_geom - kerr) > 1e-12 * std::abs(kerr))
      throw DomainError("device: kerr inconsistent with SQUID geometry");
  }
  return DeviceParams{omega0, gamma, kerr, squid};
}

inline DeviceParams make_device_from_squid(double omega0, double gamma,
                                           const SquidGeometry& squid) {
  return make_device(omega0, gamma, kerr_constant(squid.n_squids, squid.i_c, omega0),
                     squid);
}

// Bifurcation threshold of the driven Kerr resonator.
struct CriticalParams {
  double delta_c = 0.0;  // rad/s, sqrt(3) gamma
  double b_c = 0.0;      // sqrt(photons/s), critical drive amplitude
  double n_c = 0.0;      // photons, critical circulating number
  double f_c = 0.0;      // Hz, critical pump frequency
  double p_c = 0.0;      // W, critical input power at the device plane

  double b_c_sq() const { return b_c * b_c; }
  double omega_pc() const { return kTwoPi * f_c; }
};

inline CriticalParams critical_params(const DeviceParams& dev) {
  CriticalParams cp;
  cp.delta_c = std::sqrt(3.0) * dev.gamma;
  const double abs_k = std::abs(dev.kerr);
  cp.b_c = std::sqrt(4.0 * dev.gamma * dev.gamma / (3.0 * std::sqrt(3.0) * abs_k));
  cp.n_c = 2.0 * cp.delta_c / (3.0 * abs_k);
  // The critical detuning sits on the bistable side, whose sign follows the
  // Kerr sign.
  const double omega_pc = dev.omega0 - (dev.kerr < 0.0 ? cp.delta_c : -cp.delta_c);
  cp.f_c = omega_pc / kTwoPi;
  cp.p_c = PhysConstants::hbar * omega_pc * cp.b_c * cp.b_c;
  return cp;
}

}  // namespace jpa
