#include "jpa/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "jpa/errors.hpp"
#include "jpa/version.hpp"

namespace jpa {

std::string format_double(double x) {
  if (x == 0.0) return "0";  // canonicalize signed zero
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_preamble(std::string_view config_hash) {
  std::string s = "# config_hash=";
  s += config_hash;
  s += " tool=";
  s += kToolName;
  s += "-";
  s += kToolVersion;
  s += "\n";
  return s;
}

namespace {

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += format_double(v);
    first = false;
  }
  out += '\n';
}

nlohmann::json array_json(const Eigen::ArrayXd& a) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.size(); ++i) j.push_back(a[i]);
  return j;
}

}  // namespace

std::string gain_map_csv(const GainMap& map, const CriticalParams& cp,
                         std::string_view config_hash) {
  std::string out = csv_preamble(config_hash);
  out += "f_p_hz,p_p_w,f_ratio,p_rel_db,gain_db,bistable\n";
  for (Eigen::Index k = 0; k < map.f_p.size(); ++k) {
    for (Eigen::Index j = 0; j < map.p_p.size(); ++j) {
      out += format_double(map.f_p[k]);
      out += ',';
      out += format_double(map.p_p[j]);
      out += ',';
      out += format_double(map.f_p[k] / cp.f_c);
      out += ',';
      out += format_double(db_from_ratio(map.p_p[j] / cp.p_c));
      out += ',';
      out += format_double(map.gain_db(j, k));
      out += ',';
      out += map.bistable(j, k) ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

nlohmann::json gain_map_json(const GainMap& map, const CriticalParams& cp) {
  nlohmann::json j;
  j["f_p_hz"] = array_json(map.f_p);
  j["p_p_w"] = array_json(map.p_p);
  j["f_c_hz"] = cp.f_c;
  j["p_c_w"] = cp.p_c;
  nlohmann::json gain = nlohmann::json::array();
  nlohmann::json bistable = nlohmann::json::array();
  for (Eigen::Index jj = 0; jj < map.p_p.size(); ++jj) {
    nlohmann::json grow = nlohmann::json::array();
    nlohmann::json brow = nlohmann::json::array();
    for (Eigen::Index k = 0; k < map.f_p.size(); ++k) {
      grow.push_back(map.gain_db(jj, k));
      brow.push_back(static_cast<bool>(map.bistable(jj, k)));
    }
    gain.push_back(std::move(grow));
    bistable.push_back(std::move(brow));
  }
  j["gain_db"] = std::move(gain);
  j["bistable"] = std::move(bistable);
  return j;
}

nlohmann::json operating_point_json(const OperatingPoint& op) {
  nlohmann::json j;
  j["f_p_hz"] = op.f_p;
  j["pump_amp"] = op.pump_amp;
  j["p_p_w"] = pump_power_w(op);
  j["f_ratio"] = op.normalized.f_ratio;
  j["p_rel_db"] = op.normalized.p_rel_db;
  return j;
}

std::string lmg_csv(std::span<const LmgPoint> points, std::string_view config_hash) {
  std::string out = csv_preamble(config_hash);
  out += "f_p_hz,f_ratio,pump_amp,p_p_w,p_rel_db,gain_db,slope_db_per_pct,found\n";
  for (const LmgPoint& lp : points) {
    out += format_double(lp.op.f_p);
    out += ',';
    out += format_double(lp.op.normalized.f_ratio);
    out += ',';
    out += format_double(lp.op.pump_amp);
    out += ',';
    out += format_double(pump_power_w(lp.op));
    out += ',';
    out += format_double(lp.op.normalized.p_rel_db);
    out += ',';
    out += format_double(lp.gain_db);
    out += ',';
    out += format_double(lp.slope_db_per_pct);
    out += ',';
    out += lp.found ? '1' : '0';
    out += '\n';
  }
  return out;
}

nlohmann::json lmg_json(std::span<const LmgPoint> points) {
  nlohmann::json arr = nlohmann::json::array();
  for (const LmgPoint& lp : points) {
    nlohmann::json j;
    j["op"] = operating_point_json(lp.op);
    j["gain_db"] = lp.gain_db;
    j["slope_db_per_pct"] = lp.slope_db_per_pct;
    j["found"] = lp.found;
    arr.push_back(std::move(j));
  }
  return nlohmann::json{{"lmg", std::move(arr)}};
}

std::string contour_csv(const Contour& contour, std::string_view config_hash) {
  std::string out = csv_preamble(config_hash);
  out += "idx,f_p_hz,f_ratio,pump_amp,p_p_w,p_rel_db,gain_db,side\n";
  for (std::size_t i = 0; i < contour.points.size(); ++i) {
    const ContourPoint& pt = contour.points[i];
    out += std::to_string(i);
    out += ',';
    out += format_double(pt.op.f_p);
    out += ',';
    out += format_double(pt.op.normalized.f_ratio);
    out += ',';
    out += format_double(pt.op.pump_amp);
    out += ',';
    out += format_double(pump_power_w(pt.op));
    out += ',';
    out += format_double(pt.op.normalized.p_rel_db);
    out += ',';
    out += format_double(pt.gain_db);
    out += ',';
    out += to_string(pt.side);
    out += '\n';
  }
  return out;
}

nlohmann::json contour_json(const Contour& contour) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ContourPoint& pt : contour.points) {
    nlohmann::json j;
    j["op"] = operating_point_json(pt.op);
    j["gain_db"] = pt.gain_db;
    j["side"] = to_string(pt.side);
    arr.push_back(std::move(j));
  }
  nlohmann::json j;
  j["target_gain_db"] = contour.target_gain_db;
  j["points"] = std::move(arr);
  j["warnings"] = contour.warnings;
  return j;
}

std::string sweep_csv(const PhasorSweep& sweep, std::string_view config_hash) {
  std::string out = csv_preamble(config_hash);
  out += "theta_rad,in_i,in_q,out_i,out_q\n";
  for (Eigen::Index k = 0; k < sweep.theta.size(); ++k) {
    append_row(out, {sweep.theta[k], sweep.input[k].real(), sweep.input[k].imag(),
                     sweep.output[k].real(), sweep.output[k].imag()});
  }
  return out;
}

nlohmann::json sweep_json(const PhasorSweep& sweep) {
  nlohmann::json j;
  j["op"] = operating_point_json(sweep.op);
  j["theta_rad"] = array_json(sweep.theta);
  nlohmann::json in_i = nlohmann::json::array(), in_q = nlohmann::json::array();
  nlohmann::json out_i = nlohmann::json::array(), out_q = nlohmann::json::array();
  for (Eigen::Index k = 0; k < sweep.input.size(); ++k) {
    in_i.push_back(sweep.input[k].real());
    in_q.push_back(sweep.input[k].imag());
    out_i.push_back(sweep.output[k].real());
    out_q.push_back(sweep.output[k].imag());
  }
  j["in_i"] = std::move(in_i);
  j["in_q"] = std::move(in_q);
  j["out_i"] = std::move(out_i);
  j["out_q"] = std::move(out_q);
  return j;
}

std::string deamp_csv(const Contour& contour, std::span<const DeampResult> results,
                      std::string_view config_hash) {
  if (contour.points.size() != results.size())
    throw DomainError("deamp_csv: contour/result size mismatch");
  std::string out = csv_preamble(config_hash);
  out += "idx,f_p_hz,f_ratio,pump_amp,p_p_w,p_rel_db,gain_db,ratio_db,side\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const DeampResult& r = results[i];
    out += std::to_string(i);
    out += ',';
    out += format_double(r.op.f_p);
    out += ',';
    out += format_double(r.op.normalized.f_ratio);
    out += ',';
    out += format_double(r.op.pump_amp);
    out += ',';
    out += format_double(pump_power_w(r.op));
    out += ',';
    out += format_double(r.op.normalized.p_rel_db);
    out += ',';
    out += format_double(r.gain_db);
    out += ',';
    out += format_double(r.ratio_db);
    out += ',';
    out += to_string(contour.points[i].side);
    out += '\n';
  }
  return out;
}

nlohmann::json deamp_json(const Contour& contour, std::span<const DeampResult> results) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    nlohmann::json j;
    j["op"] = operating_point_json(results[i].op);
    j["gain_db"] = results[i].gain_db;
    j["ratio_db"] = results[i].ratio_db;
    j["side"] = to_string(contour.points[i].side);
    arr.push_back(std::move(j));
  }
  nlohmann::json j;
  j["target_gain_db"] = contour.target_gain_db;
  j["results"] = std::move(arr);
  return j;
}

std::string amp_scan_csv(std::span<const DeampResult> results,
                         std::string_view config_hash) {
  std::string out = csv_preamble(config_hash);
  out += "pump_amp,p_rel_db,gain_db,ratio_db\n";
  for (const DeampResult& r : results)
    append_row(out, {r.op.pump_amp, r.op.normalized.p_rel_db, r.gain_db, r.ratio_db});
  return out;
}

nlohmann::json amp_scan_json(std::span<const DeampResult> results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const DeampResult& r : results) {
    nlohmann::json j;
    j["op"] = operating_point_json(r.op);
    j["gain_db"] = r.gain_db;
    j["ratio_db"] = r.ratio_db;
    arr.push_back(std::move(j));
  }
  return nlohmann::json{{"scan", std::move(arr)}};
}

std::string squeeze_csv(const SqueezeResult& result, std::string_view config_hash) {
  std::string out = csv_preamble(config_hash);
  out += "theta_rad,s_db,stderr_db\n";
  for (Eigen::Index k = 0; k < result.theta.size(); ++k)
    append_row(out, {result.theta[k], result.s_db[k], result.stderr_db[k]});
  return out;
}

nlohmann::json squeeze_json(const SqueezeResult& result) {
  nlohmann::json j;
  j["sq_op"] = operating_point_json(result.sq_op);
  j["theta_rad"] = array_json(result.theta);
  j["s_db"] = array_json(result.s_db);
  j["stderr_db"] = array_json(result.stderr_db);
  j["min_s_db"] = result.min_s_db;
  j["loss_floor_db"] = result.loss_floor_db;
  return j;
}

std::string squeeze_scan_csv(std::span<const SqueezeScanRow> rows,
                             std::string_view config_hash) {
  std::string out = csv_preamble(config_hash);
  out += "idx,f_p_hz,f_ratio,pump_amp,p_rel_db,side,gain_db,min_s_db,min_s_stderr_db\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SqueezeScanRow& r = rows[i];
    out += std::to_string(i);
    out += ',';
    out += format_double(r.op.f_p);
    out += ',';
    out += format_double(r.op.normalized.f_ratio);
    out += ',';
    out += format_double(r.op.pump_amp);
    out += ',';
    out += format_double(r.op.normalized.p_rel_db);
    out += ',';
    out += r.side;
    out += ',';
    out += format_double(r.gain_db);
    out += ',';
    out += format_double(r.min_s_db);
    out += ',';
    out += format_double(r.min_s_stderr_db);
    out += '\n';
  }
  return out;
}

nlohmann::json squeeze_scan_json(std::span<const SqueezeScanRow> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SqueezeScanRow& r : rows) {
    nlohmann::json j;
    j["op"] = operating_point_json(r.op);
    j["side"] = r.side;
    j["gain_db"] = r.gain_db;
    j["min_s_db"] = r.min_s_db;
    j["min_s_stderr_db"] = r.min_s_stderr_db;
    arr.push_back(std::move(j));
  }
  return nlohmann::json{{"scan", std::move(arr)}};
}

std::string histogram_csv(const Eigen::ArrayXd& theta, const Eigen::ArrayXd& centers,
                          const Eigen::MatrixXd& count_on,
                          const Eigen::MatrixXd& count_off,
                          std::string_view config_hash) {
  std::string out = csv_preamble(config_hash);
  out += "theta_rad,bin_center,count_on,count_off\n";
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    for (Eigen::Index b = 0; b < centers.size(); ++b) {
      append_row(out, {theta[k], centers[b], count_on(b, k), count_off(b, k)});
    }
  }
  return out;
}

std::string noise_csv(std::span<const NoiseSample> samples,
                      std::string_view config_hash) {
  std::string out = csv_preamble(config_hash);
  out += "t_vts_k,t_fridge_k,psd_out_quanta\n";
  for (const NoiseSample& s : samples)
    append_row(out, {s.t_vts, s.t_fridge, s.psd_quanta});
  return out;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  for (std::string& f : fields) {
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front())))
      f.erase(f.begin());
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back()))) f.pop_back();
  }
  return fields;
}

double parse_field(const std::string& field, std::string_view source, int row,
                   std::string_view column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    std::ostringstream msg;
    msg << source << ": row " << row << ": cannot parse '" << field << "' as "
        << column;
    throw ConfigError(msg.str());
  }
}

}  // namespace

std::vector<NoiseSample> parse_noise_csv(std::string_view text,
                                         std::string_view source_name) {
  std::vector<NoiseSample> samples;
  std::istringstream in{std::string(text)};
  std::string line;
  int row = 0;
  bool have_header = false;
  bool raw_watts = false;
  std::vector<std::string> columns;

  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (!have_header) {
      columns.clear();
      for (const std::string& f : fields) columns.push_back(lower(f));
      if (columns.size() == 3 && columns[0] == "t_vts_k" &&
          columns[1] == "t_fridge_k" && columns[2] == "psd_out_quanta") {
        raw_watts = false;
      } else if (columns.size() == 5 && columns[0] == "t_vts_k" &&
                 columns[1] == "t_fridge_k" && columns[2] == "psd_out_w" &&
                 columns[3] == "window_hz" && columns[4] == "freq_hz") {
        raw_watts = true;
      } else {
        std::ostringstream msg;
        msg << source_name << ": row " << row
            << ": expected header 't_vts_k,t_fridge_k,psd_out_quanta' or "
               "'t_vts_k,t_fridge_k,psd_out_w,window_hz,freq_hz'";
        throw ConfigError(msg.str());
      }
      have_header = true;
      continue;
    }
    if (fields.size() != columns.size()) {
      std::ostringstream msg;
      msg << source_name << ": row " << row << ": expected " << columns.size()
          << " fields, got " << fields.size();
      throw ConfigError(msg.str());
    }
    NoiseSample s;
    s.t_vts = parse_field(fields[0], source_name, row, "t_vts_k");
    s.t_fridge = parse_field(fields[1], source_name, row, "t_fridge_k");
    if (raw_watts) {
      const double p_w = parse_field(fields[2], source_name, row, "psd_out_w");
      const double window = parse_field(fields[3], source_name, row, "window_hz");
      const double freq = parse_field(fields[4], source_name, row, "freq_hz");
      if (!(window > 0.0) || !(freq > 0.0)) {
        std::ostringstream msg;
        msg << source_name << ": row " << row << ": window_hz and freq_hz must be positive";
        throw ConfigError(msg.str());
      }
      s.psd_quanta = p_w / (PhysConstants::hbar * kTwoPi * freq * window);
    } else {
      s.psd_quanta = parse_field(fields[2], source_name, row, "psd_out_quanta");
    }
    if (!(s.t_vts > 0.0) || !(s.t_fridge > 0.0) || !(s.psd_quanta > 0.0)) {
      std::ostringstream msg;
      msg << source_name << ": row " << row
          << ": temperatures and psd_out must be positive";
      throw ConfigError(msg.str());
    }
    samples.push_back(s);
  }
  if (!have_header)
    throw ConfigError(std::string(source_name) + ": missing header row");
  return samples;
}

nlohmann::json fit_json(const FitResult& fit) {
  nlohmann::json j;
  j["n_add"] = fit.n_add;
  j["n_add_sigma"] = fit.n_add_sigma;
  j["lambda"] = fit.lambda;
  j["lambda_sigma"] = fit.lambda_sigma;
  j["chain_gain_db"] = fit.chain_gain_db;
  j["chain_gain_db_sigma"] = fit.chain_gain_db_sigma;
  nlohmann::json cov = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    nlohmann::json rowj = nlohmann::json::array();
    for (int c = 0; c < 3; ++c) rowj.push_back(fit.covariance(r, c));
    cov.push_back(std::move(rowj));
  }
  j["covariance"] = std::move(cov);
  j["covariance_order"] = {"chain_gain_linear", "lambda", "n_add"};
  j["residual_rms"] = fit.residual_rms;
  j["condition_number"] = fit.condition_number;
  j["boundary_flag"] = fit.boundary_flag;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  return j;
}

nlohmann::json line_budget_json(const LineBudget& budget) {
  auto vs = [](const ValueWithSigma& v) {
    return nlohmann::json{{"value", v.value}, {"sigma", v.sigma}};
  };
  nlohmann::json j;
  j["g_a_out_db"] = vs(budget.g_a_out_db);
  j["g_s_out_db"] = vs(budget.g_s_out_db);
  j["eta_db"] = vs(budget.eta_db);
  if (budget.has_a_in)
    j["a_in_db"] = vs(budget.a_in_db);
  else
    j["a_in_db"] = nullptr;
  return j;
}

nlohmann::json critical_point_json(const CriticalPointCheck& check, double a_in_db,
                                   bool has_a_in) {
  nlohmann::json j;
  j["delta_c_rad_s"] = check.analytic.delta_c;
  j["b_c"] = check.analytic.b_c;
  j["n_c"] = check.analytic.n_c;
  j["f_c_hz"] = check.analytic.f_c;
  j["p_c_w"] = check.analytic.p_c;
  j["p_c_dbm_device"] = watt_to_dbm(check.analytic.p_c);
  if (has_a_in) {
    // Generator-side power producing P_c at the device input plane.
    j["p_c_dbm_generator"] = watt_to_dbm(check.analytic.p_c) - a_in_db;
  }
  j["f_c_hz_numeric"] = check.f_c_numeric;
  j["max_gain_db_near_critical"] = check.max_gain_db;
  j["gain_diverges"] = check.diverges;
  return j;
}

nlohmann::json manifest_json(const RunManifest& manifest) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["subcommand"] = manifest.subcommand;
  j["config_hash"] = manifest.config_hash;
  j["seed"] = manifest.seed;
  j["threads"] = manifest.threads;
  j["wall_ms"] = manifest.wall_ms;
  nlohmann::json outputs = nlohmann::json::array();
  for (const ManifestEntry& e : manifest.outputs)
    outputs.push_back({{"file", e.file}, {"fnv1a64", e.checksum_fnv1a64}});
  j["outputs"] = std::move(outputs);
  return j;
}

}  // namespace jpa
