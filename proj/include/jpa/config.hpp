#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jpa/device.hpp"

namespace jpa {

inline constexpr const char* kConfigSchema = "jpasim-config-v1";

struct OutputConfig {
  std::string dir = "out";
  std::string formats = "both";  // csv | json | both
};

struct GainMapConfig {
  double f_ratio_min = 0.999, f_ratio_max = 1.004;
  int n_f = 201;
  double p_rel_db_min = -6.0, p_rel_db_max = 3.0;
  int n_p = 201;
  double probe_amp_rel = 1e-4;
  int n_theta = 360;
};

struct LmgConfig {
  double f_ratio_min = 1.0004, f_ratio_max = 1.004;
  int n_f = 25;
  double probe_amp_rel = 1e-4;
  int n_theta = 360;
};

struct ContourConfig {
  double target_gain_db = 8.0;
  double f_ratio_min = 1.0004, f_ratio_max = 1.004;
  int n_f = 41;
  double probe_amp_rel = 1e-4;
  int n_theta = 360;
};

struct DistortConfig {
  double f_ratio = 1.0015;
  std::vector<double> gain_targets_db{6.0, 9.5, 13.0};
  std::string side = "above";           // above | below
  std::string probe_mode = "half_photon";  // half_photon | relative
  double probe_amp_rel = 1e-4;
  int n_theta = 360;
  bool amp_scan = true;
  double amp_min_rel = 0.05, amp_max_rel = 1.25;
  int n_amp = 60;
};

struct DeampScanConfig {
  double target_gain_db = 8.0;
  double f_ratio_min = 1.0004, f_ratio_max = 1.004;
  int n_f = 21;
  std::string probe_mode = "half_photon";
  double probe_amp_rel = 1e-4;
  int n_theta = 360;
};

struct OptimalPointConfig {
  std::vector<double> gain_targets_db{6, 7, 8, 9, 10, 11, 12, 13};
  double f_ratio_min = 1.0004, f_ratio_max = 1.004;
  int n_f = 15;
  std::string probe_mode = "half_photon";
  double probe_amp_rel = 1e-4;
  int n_theta = 360;
};

struct SqueezeConfig {
  double f_ratio = 1.0015;
  double target_gain_db = 8.0;
  std::string side = "above";
  double pump_amp_rel = 0.0;  // > 0 overrides the gain target
  double eta_db = 1.2;
  std::string amp_kind = "ideal";  // ideal | full_jpa
  double amp_gain_db = 25.0;
  double amp_f_ratio = 1.0015;     // full_jpa
  double amp_p_rel_db = 0.5;       // full_jpa
  int n_samples = 100000;
  int n_theta = 64;
  std::uint64_t seed = 1;
  double n_hemt_quanta = 0.0;
  std::string squeezer = "full";  // full | linearized | ideal
  double ideal_squeeze_db = 40.0;
  bool export_histogram = false;
  int hist_bins = 61;
};

struct SqueezeScanConfig {
  std::string mode = "power_cut";  // power_cut | contour
  double f_ratio = 1.0015;
  std::vector<double> gain_targets_db{9, 11, 13};
  std::string sides = "both";  // both | above | below
  bool include_lmg = true;
  double contour_target_db = 8.0;  // contour mode
  double f_ratio_min = 1.0006, f_ratio_max = 1.003;
  int n_f = 5;
  double eta_db = 1.2;
  std::string amp_kind = "ideal";
  double amp_gain_db = 25.0;
  int n_samples = 30000;
  int n_theta = 32;
  std::uint64_t seed = 1;
  double n_hemt_quanta = 0.0;
  std::string squeezer = "full";
};

struct NoiseFitConfig {
  std::string data = "noise.csv";
  double freq_hz = 7.0032e9;
  double init_lambda = 0.0;
  double init_n_add = 0.0;
  double init_chain_gain_db = 0.0;
  int multi_start = 0;
};

struct LineBudgetConfig {
  double g_a_out_db = 76.5, g_a_out_sigma_db = 0.1;
  double g_s_out_db = 75.3, g_s_out_sigma_db = 0.1;
  double p_probe_in_w = 0.0;   // both > 0 enable the A^I estimate
  double p_probe_out_w = 0.0;
};

struct SynthNoiseConfig {
  double n_add = 0.045;
  double lambda = 0.79;
  double chain_gain_db = 100.0;
  double freq_hz = 7.0032e9;
  std::vector<double> t_fridge_mk{50, 300, 500};
  double t_vts_min_mk = 50.0, t_vts_max_mk = 600.0;
  int n_t = 25;
  std::uint64_t seed = 1;
  double noise_frac = 0.0;
};

struct ExperimentConfig {
  DeviceParams device;
  OutputConfig output;
  GainMapConfig gain_map;
  LmgConfig lmg;
  ContourConfig contour;
  DistortConfig distort;
  DeampScanConfig deamp_scan;
  OptimalPointConfig optimal_point;
  SqueezeConfig squeeze;
  SqueezeScanConfig squeeze_scan;
  NoiseFitConfig noise_fit;
  LineBudgetConfig line_budget;
  SynthNoiseConfig synth_noise;
  std::string config_hash;  // fnv1a64 of the raw config bytes, hex
  std::filesystem::path source_dir;  // directory of the config file
};

// Parses the INI-style key/value format or its JSON encoding (detected by a
// leading '{'), validates against the schema and applies defaults.
ExperimentConfig parse_config(std::string_view text, std::string_view source_name);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace jpa
