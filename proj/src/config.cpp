#include "jpa/config.hpp"

#include <cctype>
#include <cstdlib>
#include <json.hpp>
#include <map>
#include <sstream>

#include "jpa/errors.hpp"
#include "jpa/io.hpp"

namespace jpa {

namespace {

using nlohmann::json;

enum class KeyType { number, integer, string, boolean, number_list };

const std::map<std::string, std::map<std::string, KeyType>>& schema_table() {
  using KT = KeyType;
  static const std::map<std::string, std::map<std::string, KeyType>> table = {
      {"", {{"schema", KT::string}}},
      {"device",
       {{"f0_hz", KT::number},
        {"gamma_hz", KT::number},
        {"kerr_hz", KT::number},
        {"kerr_over_gamma", KT::number},
        {"n_squids", KT::number},
        {"i_c_ua", KT::number},
        {"c_ff", KT::number},
        {"c_c_ff", KT::number}}},
      {"output", {{"dir", KT::string}, {"formats", KT::string}}},
      {"gain_map",
       {{"f_ratio_min", KT::number},
        {"f_ratio_max", KT::number},
        {"n_f", KT::integer},
        {"p_rel_db_min", KT::number},
        {"p_rel_db_max", KT::number},
        {"n_p", KT::integer},
        {"probe_amp_rel", KT::number},
        {"n_theta", KT::integer}}},
      {"lmg",
       {{"f_ratio_min", KT::number},
        {"f_ratio_max", KT::number},
        {"n_f", KT::integer},
        {"probe_amp_rel", KT::number},
        {"n_theta", KT::integer}}},
      {"contour",
       {{"target_gain_db", KT::number},
        {"f_ratio_min", KT::number},
        {"f_ratio_max", KT::number},
        {"n_f", KT::integer},
        {"probe_amp_rel", KT::number},
        {"n_theta", KT::integer}}},
      {"distort",
       {{"f_ratio", KT::number},
        {"gain_targets_db", KT::number_list},
        {"side", KT::string},
        {"probe_mode", KT::string},
        {"probe_amp_rel", KT::number},
        {"n_theta", KT::integer},
        {"amp_scan", KT::boolean},
        {"amp_min_rel", KT::number},
        {"amp_max_rel", KT::number},
        {"n_amp", KT::integer}}},
      {"deamp_scan",
       {{"target_gain_db", KT::number},
        {"f_ratio_min", KT::number},
        {"f_ratio_max", KT::number},
        {"n_f", KT::integer},
        {"probe_mode", KT::string},
        {"probe_amp_rel", KT::number},
        {"n_theta", KT::integer}}},
      {"optimal_point",
       {{"gain_targets_db", KT::number_list},
        {"f_ratio_min", KT::number},
        {"f_ratio_max", KT::number},
        {"n_f", KT::integer},
        {"probe_mode", KT::string},
        {"probe_amp_rel", KT::number},
        {"n_theta", KT::integer}}},
      {"squeeze",
       {{"f_ratio", KT::number},
        {"target_gain_db", KT::number},
        {"side", KT::string},
        {"pump_amp_rel", KT::number},
        {"eta_db", KT::number},
        {"amp_kind", KT::string},
        {"amp_gain_db", KT::number},
        {"amp_f_ratio", KT::number},
        {"amp_p_rel_db", KT::number},
        {"n_samples", KT::integer},
        {"n_theta", KT::integer},
        {"seed", KT::integer},
        {"n_hemt_quanta", KT::number},
        {"squeezer", KT::string},
        {"ideal_squeeze_db", KT::number},
        {"export_histogram", KT::boolean},
        {"hist_bins", KT::integer}}},
      {"squeeze_scan",
       {{"mode", KT::string},
        {"f_ratio", KT::number},
        {"gain_targets_db", KT::number_list},
        {"sides", KT::string},
        {"include_lmg", KT::boolean},
        {"contour_target_db", KT::number},
        {"f_ratio_min", KT::number},
        {"f_ratio_max", KT::number},
        {"n_f", KT::integer},
        {"eta_db", KT::number},
        {"amp_kind", KT::string},
        {"amp_gain_db", KT::number},
        {"n_samples", KT::integer},
        {"n_theta", KT::integer},
        {"seed", KT::integer},
        {"n_hemt_quanta", KT::number},
        {"squeezer", KT::string}}},
      {"noise_fit",
       {{"data", KT::string},
        {"freq_hz", KT::number},
        {"init_lambda", KT::number},
        {"init_n_add", KT::number},
        {"init_chain_gain_db", KT::number},
        {"multi_start", KT::integer}}},
      {"line_budget",
       {{"g_a_out_db", KT::number},
        {"g_a_out_sigma_db", KT::number},
        {"g_s_out_db", KT::number},
        {"g_s_out_sigma_db", KT::number},
        {"p_probe_in_w", KT::number},
        {"p_probe_out_w", KT::number}}},
      {"synth_noise",
       {{"n_add", KT::number},
        {"lambda", KT::number},
        {"chain_gain_db", KT::number},
        {"freq_hz", KT::number},
        {"t_fridge_mk", KT::number_list},
        {"t_vts_min_mk", KT::number},
        {"t_vts_max_mk", KT::number},
        {"n_t", KT::integer},
        {"seed", KT::integer},
        {"noise_frac", KT::number}}},
  };
  return table;
}

[[noreturn]] void fail(std::string_view source, const std::string& what) {
  throw ConfigError(std::string(source) + ": " + what);
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

bool parse_number(const std::string& text, double& value) {
  if (text.empty()) return false;
  char* end = nullptr;
  value = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size();
}

json ini_value(const std::string& raw) {
  std::string v = trim(raw);
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\'')))
    return json(v.substr(1, v.size() - 2));
  if (v == "true") return json(true);
  if (v == "false") return json(false);
  if (v.find(',') != std::string::npos) {
    json arr = json::array();
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double num = 0.0;
      if (!parse_number(trim(item), num)) return json(v);  // not a number list
      arr.push_back(num);
    }
    return arr;
  }
  double num = 0.0;
  if (parse_number(v, num)) return json(num);
  return json(v);
}

json parse_ini(std::string_view text, std::string_view source) {
  json tree = json::object();
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        std::ostringstream msg;
        msg << "line " << line_no << ": unterminated section header";
        fail(source, msg.str());
      }
      section = trim(t.substr(1, t.size() - 2));
      if (!tree.contains(section)) tree[section] = json::object();
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected 'key = value'";
      fail(source, msg.str());
    }
    const std::string key = trim(t.substr(0, eq));
    const json value = ini_value(t.substr(eq + 1));
    if (section.empty())
      tree[key] = value;
    else
      tree[section][key] = value;
  }
  return tree;
}

void validate_tree(const json& tree, std::string_view source) {
  const auto& table = schema_table();
  if (!tree.contains("schema") || !tree["schema"].is_string())
    fail(source, "missing 'schema' version tag");
  if (tree["schema"].get<std::string>() != kConfigSchema)
    fail(source, "unsupported schema '" + tree["schema"].get<std::string>() +
                     "', expected '" + kConfigSchema + "'");
  for (const auto& [section, value] : tree.items()) {
    if (section == "schema") continue;
    const auto sec_it = table.find(section);
    if (sec_it == table.end() || section.empty())
      fail(source, "unknown section '" + section + "'");
    if (!value.is_object()) fail(source, "section '" + section + "' must hold keys");
    for (const auto& [key, kv] : value.items()) {
      const auto key_it = sec_it->second.find(key);
      if (key_it == sec_it->second.end())
        fail(source, "unknown key '" + section + "." + key + "'");
      switch (key_it->second) {
        case KeyType::number:
          if (!kv.is_number()) fail(source, "'" + section + "." + key + "' must be a number");
          break;
        case KeyType::integer:
          if (!kv.is_number() ||
              kv.get<double>() != static_cast<double>(static_cast<long long>(kv.get<double>())))
            fail(source, "'" + section + "." + key + "' must be an integer");
          break;
        case KeyType::string:
          if (!kv.is_string()) fail(source, "'" + section + "." + key + "' must be a string");
          break;
        case KeyType::boolean:
          if (!kv.is_boolean()) fail(source, "'" + section + "." + key + "' must be true/false");
          break;
        case KeyType::number_list:
          if (kv.is_number()) break;  // single value accepted
          if (!kv.is_array()) fail(source, "'" + section + "." + key + "' must be a number list");
          for (const auto& item : kv)
            if (!item.is_number())
              fail(source, "'" + section + "." + key + "' must contain numbers only");
          break;
      }
    }
  }
}

struct SectionReader {
  const json* section = nullptr;
  std::string_view source;
  std::string name;

  double number(const char* key, double fallback) const {
    if (!section || !section->contains(key)) return fallback;
    return (*section)[key].get<double>();
  }
  int integer(const char* key, int fallback) const {
    if (!section || !section->contains(key)) return fallback;
    return static_cast<int>((*section)[key].get<double>());
  }
  std::uint64_t uinteger(const char* key, std::uint64_t fallback) const {
    if (!section || !section->contains(key)) return fallback;
    const double v = (*section)[key].get<double>();
    if (v < 0) fail(source, "'" + name + "." + key + "' must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  std::string str(const char* key, std::string fallback) const {
    if (!section || !section->contains(key)) return fallback;
    return (*section)[key].get<std::string>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!section || !section->contains(key)) return fallback;
    return (*section)[key].get<bool>();
  }
  std::vector<double> list(const char* key, std::vector<double> fallback) const {
    if (!section || !section->contains(key)) return fallback;
    const json& v = (*section)[key];
    if (v.is_number()) return {v.get<double>()};
    std::vector<double> out;
    for (const auto& item : v) out.push_back(item.get<double>());
    return out;
  }
  bool has(const char* key) const { return section && section->contains(key); }
};

SectionReader reader(const json& tree, const char* name, std::string_view source) {
  SectionReader r;
  r.source = source;
  r.name = name;
  if (tree.contains(name)) r.section = &tree[name];
  return r;
}

DeviceParams device_from(const json& tree, std::string_view source) {
  if (!tree.contains("device")) fail(source, "missing [device] section");
  const SectionReader dev = reader(tree, "device", source);
  if (!dev.has("f0_hz")) fail(source, "device.f0_hz is required");
  if (!dev.has("gamma_hz")) fail(source, "device.gamma_hz is required");
  const double omega0 = kTwoPi * dev.number("f0_hz", 0.0);
  const double gamma = kTwoPi * dev.number("gamma_hz", 0.0);
  if (!(gamma > 0.0)) fail(source, "device.gamma_hz must be positive");

  const bool has_kerr = dev.has("kerr_hz") || dev.has("kerr_over_gamma");
  if (dev.has("kerr_hz") && dev.has("kerr_over_gamma"))
    fail(source, "give device.kerr_hz or device.kerr_over_gamma, not both");
  double kerr = 0.0;
  if (dev.has("kerr_hz")) kerr = kTwoPi * dev.number("kerr_hz", 0.0);
  if (dev.has("kerr_over_gamma")) kerr = gamma * dev.number("kerr_over_gamma", 0.0);

  std::optional<SquidGeometry> squid;
  if (dev.has("n_squids") || dev.has("i_c_ua")) {
    if (!(dev.has("n_squids") && dev.has("i_c_ua")))
      fail(source, "SQUID geometry needs both device.n_squids and device.i_c_ua");
    SquidGeometry g;
    g.n_squids = dev.number("n_squids", 0.0);
    g.i_c = dev.number("i_c_ua", 0.0) * 1e-6;
    g.c = dev.number("c_ff", 0.0) * 1e-15;
    g.c_c = dev.number("c_c_ff", 0.0) * 1e-15;
    squid = g;
  }
  if (!has_kerr && !squid)
    fail(source, "device needs kerr_hz, kerr_over_gamma, or SQUID geometry");

  try {
    if (!has_kerr) return make_device_from_squid(omega0, gamma, *squid);
    return make_device(omega0, gamma, kerr, squid);
  } catch (const DomainError& err) {
    fail(source, std::string("device: ") + err.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source_name) {
  json tree;
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    try {
      tree = json::parse(text);
    } catch (const json::parse_error& err) {
      fail(source_name, std::string("JSON parse error: ") + err.what());
    }
  } else {
    tree = parse_ini(text, source_name);
  }
  validate_tree(tree, source_name);

  ExperimentConfig cfg;
  cfg.device = device_from(tree, source_name);
  cfg.config_hash = hex64(fnv1a64(text));

  {
    const SectionReader r = reader(tree, "output", source_name);
    cfg.output.dir = r.str("dir", cfg.output.dir);
    cfg.output.formats = r.str("formats", cfg.output.formats);
    if (cfg.output.formats != "csv" && cfg.output.formats != "json" &&
        cfg.output.formats != "both")
      fail(source_name, "output.formats must be csv, json or both");
  }
  {
    const SectionReader r = reader(tree, "gain_map", source_name);
    auto& c = cfg.gain_map;
    c.f_ratio_min = r.number("f_ratio_min", c.f_ratio_min);
    c.f_ratio_max = r.number("f_ratio_max", c.f_ratio_max);
    c.n_f = r.integer("n_f", c.n_f);
    c.p_rel_db_min = r.number("p_rel_db_min", c.p_rel_db_min);
    c.p_rel_db_max = r.number("p_rel_db_max", c.p_rel_db_max);
    c.n_p = r.integer("n_p", c.n_p);
    c.probe_amp_rel = r.number("probe_amp_rel", c.probe_amp_rel);
    c.n_theta = r.integer("n_theta", c.n_theta);
  }
  {
    const SectionReader r = reader(tree, "lmg", source_name);
    auto& c = cfg.lmg;
    c.f_ratio_min = r.number("f_ratio_min", c.f_ratio_min);
    c.f_ratio_max = r.number("f_ratio_max", c.f_ratio_max);
    c.n_f = r.integer("n_f", c.n_f);
    c.probe_amp_rel = r.number("probe_amp_rel", c.probe_amp_rel);
    c.n_theta = r.integer("n_theta", c.n_theta);
  }
  {
    const SectionReader r = reader(tree, "contour", source_name);
    auto& c = cfg.contour;
    c.target_gain_db = r.number("target_gain_db", c.target_gain_db);
    c.f_ratio_min = r.number("f_ratio_min", c.f_ratio_min);
    c.f_ratio_max = r.number("f_ratio_max", c.f_ratio_max);
    c.n_f = r.integer("n_f", c.n_f);
    c.probe_amp_rel = r.number("probe_amp_rel", c.probe_amp_rel);
    c.n_theta = r.integer("n_theta", c.n_theta);
  }
  {
    const SectionReader r = reader(tree, "distort", source_name);
    auto& c = cfg.distort;
    c.f_ratio = r.number("f_ratio", c.f_ratio);
    c.gain_targets_db = r.list("gain_targets_db", c.gain_targets_db);
    c.side = r.str("side", c.side);
    c.probe_mode = r.str("probe_mode", c.probe_mode);
    c.probe_amp_rel = r.number("probe_amp_rel", c.probe_amp_rel);
    c.n_theta = r.integer("n_theta", c.n_theta);
    c.amp_scan = r.boolean("amp_scan", c.amp_scan);
    c.amp_min_rel = r.number("amp_min_rel", c.amp_min_rel);
    c.amp_max_rel = r.number("amp_max_rel", c.amp_max_rel);
    c.n_amp = r.integer("n_amp", c.n_amp);
    if (c.side != "above" && c.side != "below")
      fail(source_name, "distort.side must be above or below");
    if (c.probe_mode != "half_photon" && c.probe_mode != "relative")
      fail(source_name, "distort.probe_mode must be half_photon or relative");
  }
  {
    const SectionReader r = reader(tree, "deamp_scan", source_name);
    auto& c = cfg.deamp_scan;
    c.target_gain_db = r.number("target_gain_db", c.target_gain_db);
    c.f_ratio_min = r.number("f_ratio_min", c.f_ratio_min);
    c.f_ratio_max = r.number("f_ratio_max", c.f_ratio_max);
    c.n_f = r.integer("n_f", c.n_f);
    c.probe_mode = r.str("probe_mode", c.probe_mode);
    c.probe_amp_rel = r.number("probe_amp_rel", c.probe_amp_rel);
    c.n_theta = r.integer("n_theta", c.n_theta);
  }
  {
    const SectionReader r = reader(tree, "optimal_point", source_name);
    auto& c = cfg.optimal_point;
    c.gain_targets_db = r.list("gain_targets_db", c.gain_targets_db);
    c.f_ratio_min = r.number("f_ratio_min", c.f_ratio_min);
    c.f_ratio_max = r.number("f_ratio_max", c.f_ratio_max);
    c.n_f = r.integer("n_f", c.n_f);
    c.probe_mode = r.str("probe_mode", c.probe_mode);
    c.probe_amp_rel = r.number("probe_amp_rel", c.probe_amp_rel);
    c.n_theta = r.integer("n_theta", c.n_theta);
  }
  {
    const SectionReader r = reader(tree, "squeeze", source_name);
    auto& c = cfg.squeeze;
    c.f_ratio = r.number("f_ratio", c.f_ratio);
    c.target_gain_db = r.number("target_gain_db", c.target_gain_db);
    c.side = r.str("side", c.side);
    c.pump_amp_rel = r.number("pump_amp_rel", c.pump_amp_rel);
    c.eta_db = r.number("eta_db", c.eta_db);
    c.amp_kind = r.str("amp_kind", c.amp_kind);
    c.amp_gain_db = r.number("amp_gain_db", c.amp_gain_db);
    c.amp_f_ratio = r.number("amp_f_ratio", c.amp_f_ratio);
    c.amp_p_rel_db = r.number("amp_p_rel_db", c.amp_p_rel_db);
    c.n_samples = r.integer("n_samples", c.n_samples);
    c.n_theta = r.integer("n_theta", c.n_theta);
    c.seed = r.uinteger("seed", c.seed);
    c.n_hemt_quanta = r.number("n_hemt_quanta", c.n_hemt_quanta);
    c.squeezer = r.str("squeezer", c.squeezer);
    c.ideal_squeeze_db = r.number("ideal_squeeze_db", c.ideal_squeeze_db);
    c.export_histogram = r.boolean("export_histogram", c.export_histogram);
    c.hist_bins = r.integer("hist_bins", c.hist_bins);
    if (c.amp_kind != "ideal" && c.amp_kind != "full_jpa")
      fail(source_name, "squeeze.amp_kind must be ideal or full_jpa");
    if (c.squeezer != "full" && c.squeezer != "linearized" && c.squeezer != "ideal")
      fail(source_name, "squeeze.squeezer must be full, linearized or ideal");
    if (c.side != "above" && c.side != "below")
      fail(source_name, "squeeze.side must be above or below");
  }
  {
    const SectionReader r = reader(tree, "squeeze_scan", source_name);
    auto& c = cfg.squeeze_scan;
    c.mode = r.str("mode", c.mode);
    c.f_ratio = r.number("f_ratio", c.f_ratio);
    c.contour_target_db = r.number("contour_target_db", c.contour_target_db);
    c.f_ratio_min = r.number("f_ratio_min", c.f_ratio_min);
    c.f_ratio_max = r.number("f_ratio_max", c.f_ratio_max);
    c.n_f = r.integer("n_f", c.n_f);
    c.gain_targets_db = r.list("gain_targets_db", c.gain_targets_db);
    c.sides = r.str("sides", c.sides);
    c.include_lmg = r.boolean("include_lmg", c.include_lmg);
    c.eta_db = r.number("eta_db", c.eta_db);
    c.amp_kind = r.str("amp_kind", c.amp_kind);
    c.amp_gain_db = r.number("amp_gain_db", c.amp_gain_db);
    c.n_samples = r.integer("n_samples", c.n_samples);
    c.n_theta = r.integer("n_theta", c.n_theta);
    c.seed = r.uinteger("seed", c.seed);
    c.n_hemt_quanta = r.number("n_hemt_quanta", c.n_hemt_quanta);
    c.squeezer = r.str("squeezer", c.squeezer);
    if (c.sides != "both" && c.sides != "above" && c.sides != "below")
      fail(source_name, "squeeze_scan.sides must be both, above or below");
    if (c.mode != "power_cut" && c.mode != "contour")
      fail(source_name, "squeeze_scan.mode must be power_cut or contour");
  }
  {
    const SectionReader r = reader(tree, "noise_fit", source_name);
    auto& c = cfg.noise_fit;
    c.data = r.str("data", c.data);
    c.freq_hz = r.number("freq_hz", c.freq_hz);
    c.init_lambda = r.number("init_lambda", c.init_lambda);
    c.init_n_add = r.number("init_n_add", c.init_n_add);
    c.init_chain_gain_db = r.number("init_chain_gain_db", c.init_chain_gain_db);
    c.multi_start = r.integer("multi_start", c.multi_start);
  }
  {
    const SectionReader r = reader(tree, "line_budget", source_name);
    auto& c = cfg.line_budget;
    c.g_a_out_db = r.number("g_a_out_db", c.g_a_out_db);
    c.g_a_out_sigma_db = r.number("g_a_out_sigma_db", c.g_a_out_sigma_db);
    c.g_s_out_db = r.number("g_s_out_db", c.g_s_out_db);
    c.g_s_out_sigma_db = r.number("g_s_out_sigma_db", c.g_s_out_sigma_db);
    c.p_probe_in_w = r.number("p_probe_in_w", c.p_probe_in_w);
    c.p_probe_out_w = r.number("p_probe_out_w", c.p_probe_out_w);
  }
  {
    const SectionReader r = reader(tree, "synth_noise", source_name);
    auto& c = cfg.synth_noise;
    c.n_add = r.number("n_add", c.n_add);
    c.lambda = r.number("lambda", c.lambda);
    c.chain_gain_db = r.number("chain_gain_db", c.chain_gain_db);
    c.freq_hz = r.number("freq_hz", c.freq_hz);
    c.t_fridge_mk = r.list("t_fridge_mk", c.t_fridge_mk);
    c.t_vts_min_mk = r.number("t_vts_min_mk", c.t_vts_min_mk);
    c.t_vts_max_mk = r.number("t_vts_max_mk", c.t_vts_max_mk);
    c.n_t = r.integer("n_t", c.n_t);
    c.seed = r.uinteger("seed", c.seed);
    c.noise_frac = r.number("noise_frac", c.noise_frac);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  ExperimentConfig cfg = parse_config(text, path.string());
  cfg.source_dir = path.has_parent_path() ? path.parent_path() : ".";
  return cfg;
}

}  // namespace jpa
