#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <sstream>

#include "jpa/cubic.hpp"
#include "jpa/device.hpp"
#include "jpa/errors.hpp"

namespace jpa {

// Complex field amplitude in sqrt(photons/s); |b|^2 is photon flux.
using Phasor = std::complex<double>;

enum class Branch { monostable, low_branch_of_bistable };

struct SteadyState {
  double n = 0.0;                    // photons, selected root
  std::array<double, 3> all_roots{};  // ascending, first root_count valid
  int root_count = 0;
  Branch branch = Branch::monostable;
  double delta_eff = 0.0;  // rad/s, Delta + K n
};

// Detuning Delta = omega0 - omega_p of a pump at frequency f_p (Hz).
inline double detuning_of(const DeviceParams& dev, double f_p) {
  return dev.omega0 - kTwoPi * f_p;
}

// Steady-state circulating photon number of the driven Kerr resonator:
// all real roots of
//   n^3 + (2 Delta / K) n^2 + ((Delta^2 + gamma^2)/K^2) n = (2 gamma / K^2) |b_in|^2,
// solved in units of gamma/|K| where the coefficients are O(1). The selected
// root is the unique one when monostable; in the bistable window it is the
// branch continuously connected to n = 0 at zero drive, i.e. the smallest.
inline SteadyState solve_photon_number(double delta, const DeviceParams& dev,
                                       double input_power_flux) {
  if (!(input_power_flux >= 0.0))
    throw DomainError("solve_photon_number: input flux must be non-negative");

  SteadyState ss;
  if (input_power_flux == 0.0) {
    ss.n = 0.0;
    ss.all_roots[0] = 0.0;
    ss.root_count = 1;
    ss.branch = Branch::monostable;
    ss.delta_eff = delta;
    return ss;
  }

  const double gamma = dev.gamma;
  const double abs_k = std::abs(dev.kerr);
  const double sig = dev.kerr > 0.0 ? 1.0 : -1.0;
  const double d = delta / gamma;
  const double q = abs_k * input_power_flux / (gamma * gamma);

  // Normalized cubic x^3 + 2 d sig x^2 + (d^2 + 1) x - 2 q = 0, n = (gamma/|K|) x.
  const double a2 = 2.0 * d * sig;
  const double a1 = d * d + 1.0;
  const double a0 = -2.0 * q;
  const CubicRoots<double> roots = solve_cubic(a2, a1, a0);

  const double n_scale = gamma / abs_k;
  ss.root_count = 0;
  for (int i = 0; i < roots.count; ++i) {
    // Roots are strictly positive for q > 0; discard rounding strays.
    const double x = roots.root[i];
    if (x < -1e-14) continue;
    // Residual check in the cubic's natural (dimensionless) scale, where the
    // coefficients are O(1) and 1e-10 is resolvable.
    const double res = ((x + a2) * x + a1) * x + a0;
    const double tol = 1e-10 * std::max(1.0, x * x * x);
    if (std::abs(res) > tol) {
      std::ostringstream msg;
      msg << "solve_photon_number: root polish failed, residual " << res
          << " exceeds " << tol << " at x = " << x;
      throw NumericalError(msg.str());
    }
    ss.all_roots[ss.root_count++] = std::max(x, 0.0) * n_scale;
  }
  if (ss.root_count == 0)
    throw NumericalError("solve_photon_number: no non-negative root found");

  ss.n = ss.all_roots[0];
  ss.branch = ss.root_count > 1 ? Branch::low_branch_of_bistable : Branch::monostable;
  ss.delta_eff = delta + dev.kerr * ss.n;
  return ss;
}

// Steady-state input-output map b_out = b_in (1 - 2 gamma / (i(Delta + K n) + gamma)).
// Exactly all-pass: |b_out| = |b_in|.
inline Phasor steady_output_from_state(const Phasor& b_in, double gamma,
                                       const SteadyState& ss) {
  const double x = ss.delta_eff;
  return b_in * (Phasor(-gamma, x) / Phasor(gamma, x));
}

inline Phasor steady_output(const Phasor& b_in, double delta, const DeviceParams& dev) {
  if (!std::isfinite(b_in.real()) || !std::isfinite(b_in.imag()))
    throw DomainError("steady_output: input phasor must be finite");
  const SteadyState ss = solve_photon_number(delta, dev, std::norm(b_in));
  return steady_output_from_state(b_in, dev.gamma, ss);
}

// True when the device admits three steady states at this detuning and drive.
inline bool is_bistable(const DeviceParams& dev, double delta, double input_power_flux) {
  return solve_photon_number(delta, dev, input_power_flux).root_count > 1;
}

// True when exactly one steady state exists at every drive power.
inline bool monostable_at_all_powers(const DeviceParams& dev, double delta) {
  const double sig = dev.kerr > 0.0 ? 1.0 : -1.0;
  return -sig * delta / dev.gamma < std::sqrt(3.0);
}

}  // namespace jpa
