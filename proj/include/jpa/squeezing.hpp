#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "jpa/gain.hpp"

namespace jpa {

// Statistical ensemble of phasors; quanta_scale is the photon flux of one
// photon over the bandwidth B, so vacuum has per-quadrature variance
// quanta_scale / 4.
struct PhasorEnsemble {
  Eigen::ArrayXcd samples;
  std::uint64_t seed = 0;
  double quanta_scale = 0.0;  // photons/s
};

struct LossChannel {
  double eta_db = 0.0;  // power loss in dB, >= 0
  double transmissivity() const { return std::pow(10.0, -eta_db / 10.0); }
};

LossChannel make_loss(double eta_db);

enum class AmpKind { ideal_phase_sensitive, full_jpa };

struct AmpModel {
  AmpKind kind = AmpKind::ideal_phase_sensitive;
  double gain_db = 25.0;  // power gain of the amplified quadrature (ideal kind)
  OperatingPoint op{};                    // full_jpa
  std::optional<DeviceParams> device{};   // full_jpa
  // Extra rotation applied before readout. When auto_align is set, the
  // pipeline adds the offset that puts the squeezer's amplified quadrature on
  // the readout's amplified axis at theta = 0.
  double pump_phase_offset = 0.0;  // rad
  bool auto_align = true;
};

enum class SqueezerKind {
  full_jpa,    // exact per-sample steady-state map
  linearized,  // 2x2 Jacobian of the map at the pump point
  ideal        // pure quadrature squeeze by ideal_squeeze_db
};

struct SqueezeSettings {
  int n_samples = 100000;  // per theta point
  int n_theta = 64;
  std::uint64_t seed = 1;
  double n_hemt_quanta = 0.0;  // additive readout noise after the AMP
  SqueezerKind squeezer = SqueezerKind::full_jpa;
  double ideal_squeeze_db = 40.0;  // quadrature power gain for SqueezerKind::ideal
  double quanta_scale = 0.0;       // photons/s; 0 derives gamma/pi from the device
  unsigned threads = 0;            // 0: hardware concurrency
};

struct SqueezeResult {
  Eigen::ArrayXd theta;      // rad
  Eigen::ArrayXd s_db;       // sigma^2_on / sigma^2_off per theta
  Eigen::ArrayXd stderr_db;  // Monte-Carlo standard error per theta
  double min_s_db = 0.0;
  double loss_floor_db = 0.0;  // 10 log10(1 - t), beamsplitter bound
  OperatingPoint sq_op;
};

// i.i.d. circular Gaussian vacuum; deterministic for a given seed.
PhasorEnsemble vacuum_ensemble(int n_samples, std::uint64_t seed, double quanta_scale);

// Exact squeezer map applied per sample: b_out(b_p + v) - b_p,out.
PhasorEnsemble squeeze_state(const PhasorEnsemble& in, const OperatingPoint& sq_op,
                             const DeviceParams& dev);

// Linearized squeezer: samples through the response Jacobian at the pump.
PhasorEnsemble squeeze_state_linearized(const PhasorEnsemble& in,
                                        const OperatingPoint& sq_op,
                                        const DeviceParams& dev);

// Pure quadrature squeeze: deamplifies the axis at `angle` by sqrt(G) and
// amplifies the orthogonal one by sqrt(G), G = 10^(quad_gain_db/10).
PhasorEnsemble ideal_squeeze(const PhasorEnsemble& in, double quad_gain_db,
                             double angle = 0.0);

// Beamsplitter loss: b' = sqrt(t) b + sqrt(1-t) v with fresh vacuum v.
PhasorEnsemble apply_loss(const PhasorEnsemble& in, const LossChannel& loss,
                          std::uint64_t seed);

// Rotates the ensemble by theta + pump_phase_offset, applies the AMP model and
// returns the amplified-quadrature component of each sample.
Eigen::ArrayXd amp_readout(const PhasorEnsemble& in, const AmpModel& amp, double theta);

// Orientation of the amplified (major) output quadrature of the linearized
// squeezer map at sq_op.
double squeezer_major_axis_angle(const OperatingPoint& sq_op, const DeviceParams& dev);

SqueezeResult squeezing_vs_theta(const OperatingPoint& sq_op, const DeviceParams& dev,
                                 const LossChannel& loss, const AmpModel& amp,
                                 const SqueezeSettings& settings);

// Theta-binned readout samples for histogram-style rendering.
struct QuadratureHistogram {
  Eigen::ArrayXd theta;
  Eigen::ArrayXd bin_centers;
  Eigen::MatrixXd count_on;   // (n_bins, n_theta)
  Eigen::MatrixXd count_off;
};

QuadratureHistogram squeeze_histogram(const OperatingPoint& sq_op,
                                      const DeviceParams& dev, const LossChannel& loss,
                                      const AmpModel& amp,
                                      const SqueezeSettings& settings, int n_bins);

std::vector<SqueezeResult> squeezing_vs_operating_point(
    std::span<const OperatingPoint> ops, const DeviceParams& dev,
    const LossChannel& loss, const AmpModel& amp, const SqueezeSettings& settings);

}  // namespace jpa
