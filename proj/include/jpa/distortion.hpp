#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "jpa/gain.hpp"

namespace jpa {

// Finite-amplitude probe circle and its transformed output signal.
struct PhasorSweep {
  Eigen::ArrayXd theta;     // rad
  Eigen::ArrayXcd input;    // b_s,in e^{i theta}
  Eigen::ArrayXcd output;   // b_s,out(theta) = b_out(theta) - b_p,out
  OperatingPoint op;
};

struct QuadratureFrame {
  double angle = 0.0;      // rad in [0, pi), orientation of the deamplified axis
  double sigma_maj = 0.0;  // sqrt(photons/s)
  double sigma_min = 0.0;
  bool isotropic = false;
};

struct DeampResult {
  double ratio_db = 0.0;  // 10 log10(sigma^2_out / sigma^2_in)
  OperatingPoint op;
  double gain_db = 0.0;   // weak-probe direct gain at op
};

PhasorSweep phasor_sweep(const OperatingPoint& op, const DeviceParams& dev,
                         double probe_amp, int n_theta = 360);

// Principal axes of a 2D point cloud about its mean (population covariance).
QuadratureFrame principal_axes(const Eigen::ArrayXcd& points);

DeampResult deamp_ratio(const OperatingPoint& op, const DeviceParams& dev,
                        double probe_amp, int n_theta = 360);

std::vector<DeampResult> scan_deamp_along_contour(const Contour& contour,
                                                  const DeviceParams& dev,
                                                  double probe_amp, int n_theta = 360,
                                                  unsigned threads = 1);

struct OptimalPointResult {
  OperatingPoint op;
  DeampResult result;
  double gain_target_db = 0.0;
  ContourSide side = ContourSide::on_lmg;
};

// Global deamplification optimum over the union of iso-gain contours.
OptimalPointResult optimal_point(const DeviceParams& dev,
                                 std::span<const double> gain_targets_db,
                                 std::span<const double> f_p_hz, double probe_amp,
                                 int n_theta = 360);

// |X_harmonic| / |X_1| of the sweep output projected on the axis at
// axis_angle; quantifies banana-shaped departure from an ellipse.
double projection_harmonic_ratio(const PhasorSweep& sweep, double axis_angle,
                                 int harmonic);

}  // namespace jpa
