#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "jpa/device.hpp"
#include "jpa/units.hpp"

namespace jpa {

struct NoiseSample {
  double t_vts = 0.0;       // K, variable-temperature stage
  double t_fridge = 0.0;    // K, fridge plate
  double psd_quanta = 0.0;  // quanta-equivalent integrated power
};

struct FitResult {
  double n_add = 0.0;          // quanta
  double lambda = 0.0;         // [0, 1]
  double chain_gain_db = 0.0;  // composite chain gain
  double n_add_sigma = 0.0;
  double lambda_sigma = 0.0;
  double chain_gain_db_sigma = 0.0;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // (gain_lin, lambda, n_add)
  double residual_rms = 0.0;
  double condition_number = 0.0;  // of J^T J at the optimum
  bool boundary_flag = false;     // lambda or n_add pinned at a bound
  bool converged = false;
  int iterations = 0;
};

struct ValueWithSigma {
  double value = 0.0;
  double sigma = 0.0;
};

struct LineBudget {
  ValueWithSigma g_a_out_db;  // AMP -> ADC
  ValueWithSigma g_s_out_db;  // SQ -> ADC
  ValueWithSigma eta_db;      // g_a_out - g_s_out
  ValueWithSigma a_in_db;     // input attenuation A^I
  bool has_a_in = false;
};

// Thermal noise spectral density in quanta: 1/2 + 1/(exp(hbar w / kB T) - 1).
double thermal_occupancy(double t_kelvin, double omega);

// Chain gain in dB from the integrated vacuum-noise power P = hbar w W G_out G_dev.
double chain_gain_from_noise(double p_out_w, double window_hz, double device_gain_db,
                             double omega);

inline double transport_loss_db(double g_a_out_db, double g_s_out_db) {
  return g_a_out_db - g_s_out_db;
}

ValueWithSigma transport_loss(const ValueWithSigma& g_a_out_db,
                              const ValueWithSigma& g_s_out_db);

// A^I in dB from P_out = P_in G_S^O A^I.
double input_attenuation_db(double p_probe_out_w, double p_probe_in_w,
                            double g_s_out_db);

struct NoiseModelParams {
  double n_add = 0.0;
  double lambda = 1.0;
  double chain_gain_db = 0.0;
  double omega = 0.0;  // rad/s
};

// Model of the chain output in quanta: g (lambda S_in(T_vts) + (1-lambda) S_f(T_f) + N_add).
double noise_model_quanta(const NoiseModelParams& params, double t_vts, double t_fridge);

struct FitOptions {
  double init_lambda = 0.0;        // <= 0: derive from the data
  double init_n_add = 0.0;         // <= 0: derive from the data
  double init_chain_gain_db = 0.0; // 0: derive from the data
  int multi_start = 0;             // extra jittered starts; best-of by residual
  int max_iterations = 300;
};

FitResult fit_added_noise(std::span<const NoiseSample> data, double omega,
                          const FitOptions& options = {});

std::vector<NoiseSample> synth_noise_data(const NoiseModelParams& params,
                                          std::span<const double> t_vts_grid,
                                          std::span<const double> t_fridge_values,
                                          std::uint64_t seed, double noise_frac);

}  // namespace jpa
