#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jpa/calibration.hpp"
#include "jpa/distortion.hpp"
#include "jpa/gain.hpp"
#include "jpa/squeezing.hpp"

namespace jpa {

// Round-trip-exact decimal formatting, C locale (CSV dialect: '.' decimal).
std::string format_double(double x);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// write-temp-then-rename; never leaves a partial file at `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

// Every CSV starts with a '#' comment carrying the config hash, then a header.
std::string csv_preamble(std::string_view config_hash);

std::string gain_map_csv(const GainMap& map, const CriticalParams& cp,
                         std::string_view config_hash);
nlohmann::json gain_map_json(const GainMap& map, const CriticalParams& cp);

std::string lmg_csv(std::span<const LmgPoint> points, std::string_view config_hash);
nlohmann::json lmg_json(std::span<const LmgPoint> points);

std::string contour_csv(const Contour& contour, std::string_view config_hash);
nlohmann::json contour_json(const Contour& contour);

std::string sweep_csv(const PhasorSweep& sweep, std::string_view config_hash);
nlohmann::json sweep_json(const PhasorSweep& sweep);

// Deamplification scan along a contour; results index-aligned with points.
std::string deamp_csv(const Contour& contour, std::span<const DeampResult> results,
                      std::string_view config_hash);
nlohmann::json deamp_json(const Contour& contour, std::span<const DeampResult> results);

// Pump-amplitude scan at fixed frequency (gain and deamp ratio vs amplitude).
std::string amp_scan_csv(std::span<const DeampResult> results,
                         std::string_view config_hash);
nlohmann::json amp_scan_json(std::span<const DeampResult> results);

std::string squeeze_csv(const SqueezeResult& result, std::string_view config_hash);
nlohmann::json squeeze_json(const SqueezeResult& result);

struct SqueezeScanRow {
  OperatingPoint op;
  std::string side;
  double gain_db = 0.0;
  double min_s_db = 0.0;
  double min_s_stderr_db = 0.0;
};

std::string squeeze_scan_csv(std::span<const SqueezeScanRow> rows,
                             std::string_view config_hash);
nlohmann::json squeeze_scan_json(std::span<const SqueezeScanRow> rows);

std::string histogram_csv(const Eigen::ArrayXd& theta, const Eigen::ArrayXd& centers,
                          const Eigen::MatrixXd& count_on,
                          const Eigen::MatrixXd& count_off,
                          std::string_view config_hash);

std::string noise_csv(std::span<const NoiseSample> samples,
                      std::string_view config_hash);
// Accepts either psd_out_quanta or psd_out_w + window_hz + freq_hz columns;
// errors name the offending row.
std::vector<NoiseSample> parse_noise_csv(std::string_view text,
                                         std::string_view source_name);

nlohmann::json fit_json(const FitResult& fit);
nlohmann::json line_budget_json(const LineBudget& budget);
nlohmann::json operating_point_json(const OperatingPoint& op);
nlohmann::json critical_point_json(const CriticalPointCheck& check,
                                   double a_in_db, bool has_a_in);

struct ManifestEntry {
  std::string file;
  std::string checksum_fnv1a64;
};

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  double wall_ms = 0.0;
  std::vector<ManifestEntry> outputs;
};

nlohmann::json manifest_json(const RunManifest& manifest);

}  // namespace jpa
