#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "jpa/device.hpp"
#include "jpa/steady_state.hpp"
#include "jpa/units.hpp"

namespace jpa {

struct NormalizedCoords {
  double f_ratio = 0.0;   // f_p / f_c
  double p_rel_db = 0.0;  // 10 log10(P_p / P_c)
};

struct OperatingPoint {
  double f_p = 0.0;      // Hz, pump frequency
  double pump_amp = 0.0; // sqrt(photons/s), real by phase convention
  NormalizedCoords normalized{};
};

OperatingPoint make_operating_point(double f_p, double pump_amp, const DeviceParams& dev);
OperatingPoint operating_point_from_normalized(double f_ratio, double p_rel_db,
                                               const DeviceParams& dev);

inline double pump_power_w(const OperatingPoint& op) {
  return flux_to_watt(op.pump_amp * op.pump_amp, kTwoPi * op.f_p);
}

// Weak probe used to define small-signal gain: 1e-4 b_c.
double default_probe_amp(const DeviceParams& dev);
// Probe whose power equals half a photon over the bandwidth B = gamma/pi.
double half_photon_probe_amp(const DeviceParams& dev);

// Phase-averaged direct (signal power) gain in dB for a rotating probe of
// amplitude probe_amp around the pump: 10 log10((<G_theta> + 1)/2).
double direct_gain(const OperatingPoint& op, const DeviceParams& dev,
                   double probe_amp, int n_theta = 360);

struct FreqGrid {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
  int n = 0;
};

// Pump power grid relative to the critical power, log-spaced in dB.
struct PowerGridDb {
  double lo_db = 0.0;
  double hi_db = 0.0;
  int n = 0;
};

struct GainMap {
  Eigen::ArrayXd f_p;       // Hz, strictly increasing
  Eigen::ArrayXd p_p;       // W, strictly increasing
  Eigen::MatrixXd gain_db;  // (n_power, n_freq); NaN on masked cells
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> bistable;
};

GainMap gain_map(const DeviceParams& dev, const FreqGrid& freq, const PowerGridDb& power,
                 double probe_amp, int n_theta = 360, unsigned threads = 1);

// Analytic critical point; see verify_critical_point for the numerical checks.
CriticalParams locate_critical_point(const DeviceParams& dev);

struct CriticalPointCheck {
  CriticalParams analytic;
  double f_c_numeric = 0.0;      // Hz, bistability-onset frequency
  double max_gain_db = 0.0;      // largest gain found next to the critical point
  double gain_probe_f_ratio = 0.0;
  bool diverges = false;         // max_gain_db exceeded the threshold
};

CriticalPointCheck verify_critical_point(const DeviceParams& dev,
                                         double diverge_threshold_db = 40.0);

struct LmgPoint {
  OperatingPoint op;
  double gain_db = 0.0;
  double slope_db_per_pct = 0.0;  // central-difference dG for a 1% power change
  bool found = false;
};

// Pump amplitude maximizing direct gain at a single frequency.
LmgPoint lmg_point(const DeviceParams& dev, double f_p, double probe_amp,
                   int n_theta = 360);

// Line of maximum gain over a frequency list (monostable side).
std::vector<LmgPoint> lmg(const DeviceParams& dev, std::span<const double> f_p_hz,
                          double probe_amp, int n_theta = 360);

enum class ContourSide { below_lmg, on_lmg, above_lmg };
const char* to_string(ContourSide side);

struct ContourPoint {
  OperatingPoint op;
  double gain_db = 0.0;
  ContourSide side = ContourSide::on_lmg;
};

// Closed iso-gain loop: below-LMG branch with ascending frequency, then the
// above-LMG branch descending, encircling the critical point.
struct Contour {
  double target_gain_db = 0.0;
  std::vector<ContourPoint> points;
  std::vector<std::string> warnings;
};

Contour iso_gain_contour(const DeviceParams& dev, double target_gain_db,
                         std::span<const double> f_p_hz, double probe_amp,
                         int n_theta = 360);

// Pump amplitude on one side of the LMG where the gain equals target_gain_db.
double contour_amp(const DeviceParams& dev, double f_p, double target_gain_db,
                   ContourSide side, double probe_amp, int n_theta = 360);

// Real 2x2 Jacobian of the signal response s -> b_out(b_p + s) - b_out(b_p),
// central finite differences with step rel_step * b_c.
Eigen::Matrix2d response_jacobian(const OperatingPoint& op, const DeviceParams& dev,
                                  double rel_step = 1e-6);

// Gain search tolerances (shared by lmg / contour bisection).
inline constexpr double kGainTolDb = 1e-4;
inline constexpr double kAmpRelTol = 1e-9;

std::vector<double> linspace(double lo, double hi, int n);

}  // namespace jpa
