// jpasim: simulator and operating-point optimizer for pumped Kerr resonator
// amplifiers. Subcommands reproduce gain maps, distortion scans, vacuum
// squeezing runs and noise-calibration fits as CSV/JSON artifacts.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "jpa/config.hpp"
#include "jpa/distortion.hpp"
#include "jpa/errors.hpp"
#include "jpa/io.hpp"
#include "jpa/parallel.hpp"
#include "jpa/squeezing.hpp"
#include "jpa/version.hpp"

namespace {

using namespace jpa;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
};

struct RunContext {
  ExperimentConfig cfg;
  fs::path out_dir;
  bool write_csv = true;
  bool write_json = true;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed_override;
  RunManifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void emit(const std::string& name, std::string_view content) {
    const fs::path path = out_dir / name;
    write_text_atomic(path, content);
    manifest.outputs.push_back({name, hex64(fnv1a64(content))});
  }
  void emit_json(const std::string& name, const nlohmann::json& j) {
    emit(name, j.dump(2) + "\n");
  }
  void finish() {
    manifest.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                  start)
            .count();
    const nlohmann::json j = manifest_json(manifest);
    write_text_atomic(out_dir / "manifest.json", j.dump(2) + "\n");
  }
};

fs::path find_default_config() {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("JPASIM_CONFIG_PATH")) {
    std::string paths(env);
    std::size_t pos = 0;
    while (pos != std::string::npos) {
      const std::size_t colon = paths.find(':', pos);
      const std::string dir = paths.substr(
          pos, colon == std::string::npos ? std::string::npos : colon - pos);
      if (!dir.empty()) dirs.emplace_back(dir);
      pos = colon == std::string::npos ? std::string::npos : colon + 1;
    }
  }
  dirs.emplace_back(".");
  for (const fs::path& dir : dirs) {
    for (const char* name : {"jpasim.ini", "jpasim.json"}) {
      const fs::path candidate = dir / name;
      if (fs::exists(candidate)) return candidate;
    }
  }
  throw ConfigError(
      "no config given: pass --config PATH or place jpasim.ini on "
      "JPASIM_CONFIG_PATH or in the working directory");
}

RunContext make_context(const CliOptions& opts, const std::string& subcommand) {
  const fs::path config_path =
      opts.config_path.empty() ? find_default_config() : fs::path(opts.config_path);
  RunContext ctx;
  ctx.cfg = load_config(config_path);
  ctx.out_dir = opts.out_dir.empty() ? fs::path(ctx.cfg.output.dir)
                                     : fs::path(opts.out_dir);
  std::string format = opts.format.empty() ? ctx.cfg.output.formats : opts.format;
  if (format != "csv" && format != "json" && format != "both")
    throw ConfigError("--format must be csv, json or both");
  ctx.write_csv = format != "json";
  ctx.write_json = format != "csv";
  ctx.threads = opts.threads;
  ctx.manifest.subcommand = subcommand;
  ctx.manifest.config_hash = ctx.cfg.config_hash;
  ctx.manifest.threads = opts.threads;

  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw IoError("cannot create output dir " + ctx.out_dir.string());
  return ctx;
}

double resolve_probe_amp(const DeviceParams& dev, const std::string& mode,
                         double probe_amp_rel) {
  if (mode == "half_photon") return half_photon_probe_amp(dev);
  return probe_amp_rel * critical_params(dev).b_c;
}

// ---------------------------------------------------------------------------

int run_gain_map(RunContext& ctx) {
  const auto& c = ctx.cfg.gain_map;
  const DeviceParams& dev = ctx.cfg.device;
  const CriticalParams cp = critical_params(dev);
  const FreqGrid freq{c.f_ratio_min * cp.f_c, c.f_ratio_max * cp.f_c, c.n_f};
  const PowerGridDb power{c.p_rel_db_min, c.p_rel_db_max, c.n_p};
  const GainMap map = gain_map(dev, freq, power, c.probe_amp_rel * cp.b_c, c.n_theta,
                               ctx.threads);
  if (ctx.write_csv) ctx.emit("gainmap.csv", gain_map_csv(map, cp, ctx.cfg.config_hash));
  if (ctx.write_json) ctx.emit_json("gainmap.json", gain_map_json(map, cp));

  const CriticalPointCheck check = verify_critical_point(dev);
  double a_in = 0.0;
  bool has_a_in = false;
  const auto& lb = ctx.cfg.line_budget;
  if (lb.p_probe_in_w > 0.0 && lb.p_probe_out_w > 0.0) {
    a_in = input_attenuation_db(lb.p_probe_out_w, lb.p_probe_in_w, lb.g_s_out_db);
    has_a_in = true;
  }
  ctx.emit_json("critical.json", critical_point_json(check, a_in, has_a_in));
  std::cout << "gain map " << c.n_p << "x" << c.n_f << ", f_c = " << check.analytic.f_c
            << " Hz, max gain near critical point " << check.max_gain_db << " dB\n";
  return kExitOk;
}

int run_lmg(RunContext& ctx) {
  const auto& c = ctx.cfg.lmg;
  const DeviceParams& dev = ctx.cfg.device;
  const CriticalParams cp = critical_params(dev);
  const std::vector<double> freqs =
      linspace(c.f_ratio_min * cp.f_c, c.f_ratio_max * cp.f_c, c.n_f);
  const std::vector<LmgPoint> points =
      lmg(dev, freqs, c.probe_amp_rel * cp.b_c, c.n_theta);
  if (ctx.write_csv) ctx.emit("lmg.csv", lmg_csv(points, ctx.cfg.config_hash));
  if (ctx.write_json) ctx.emit_json("lmg.json", lmg_json(points));
  return kExitOk;
}

int run_contour(RunContext& ctx) {
  const auto& c = ctx.cfg.contour;
  const DeviceParams& dev = ctx.cfg.device;
  const CriticalParams cp = critical_params(dev);
  const std::vector<double> freqs =
      linspace(c.f_ratio_min * cp.f_c, c.f_ratio_max * cp.f_c, c.n_f);
  const Contour contour = iso_gain_contour(dev, c.target_gain_db, freqs,
                                           c.probe_amp_rel * cp.b_c, c.n_theta);
  for (const std::string& w : contour.warnings) std::cerr << "warning: " << w << "\n";
  if (ctx.write_csv) ctx.emit("contour.csv", contour_csv(contour, ctx.cfg.config_hash));
  if (ctx.write_json) ctx.emit_json("contour.json", contour_json(contour));
  return kExitOk;
}

int run_distort(RunContext& ctx) {
  const auto& c = ctx.cfg.distort;
  const DeviceParams& dev = ctx.cfg.device;
  const CriticalParams cp = critical_params(dev);
  const double f_p = c.f_ratio * cp.f_c;
  const double weak = default_probe_amp(dev);
  const double probe = c.probe_mode == "half_photon"
                           ? half_photon_probe_amp(dev)
                           : c.probe_amp_rel * cp.b_c;
  const ContourSide side =
      c.side == "above" ? ContourSide::above_lmg : ContourSide::below_lmg;

  nlohmann::json sweeps = nlohmann::json::array();
  std::vector<DeampResult> series;
  for (std::size_t i = 0; i < c.gain_targets_db.size(); ++i) {
    const double amp = contour_amp(dev, f_p, c.gain_targets_db[i], side, weak, c.n_theta);
    const OperatingPoint op = make_operating_point(f_p, amp, dev);
    const PhasorSweep sweep = phasor_sweep(op, dev, probe, c.n_theta);
    if (ctx.write_csv)
      ctx.emit("sweep_" + std::to_string(i) + ".csv",
               sweep_csv(sweep, ctx.cfg.config_hash));
    if (ctx.write_json) {
      nlohmann::json j = sweep_json(sweep);
      j["target_gain_db"] = c.gain_targets_db[i];
      j["side"] = c.side;
      sweeps.push_back(std::move(j));
    }
    if (probe > 0.0) series.push_back(deamp_ratio(op, dev, probe, c.n_theta));
  }
  if (ctx.write_json) ctx.emit_json("sweeps.json", {{"sweeps", std::move(sweeps)}});
  if (probe <= 0.0) {
    std::cerr << "warning: probe amplitude is zero; deamp series skipped\n";
  } else {
    if (ctx.write_csv)
      ctx.emit("deamp_series.csv", amp_scan_csv(series, ctx.cfg.config_hash));
    if (ctx.write_json) ctx.emit_json("deamp_series.json", amp_scan_json(series));
  }

  if (c.amp_scan && probe > 0.0) {
    std::vector<DeampResult> scan;
    const std::vector<double> amps =
        linspace(c.amp_min_rel * cp.b_c, c.amp_max_rel * cp.b_c, c.n_amp);
    scan.resize(amps.size());
    parallel_for(amps.size(), ctx.threads, [&](std::size_t i) {
      scan[i] = deamp_ratio(make_operating_point(f_p, amps[i], dev), dev, probe,
                            c.n_theta);
    });
    if (ctx.write_csv)
      ctx.emit("amp_scan.csv", amp_scan_csv(scan, ctx.cfg.config_hash));
    if (ctx.write_json) ctx.emit_json("amp_scan.json", amp_scan_json(scan));
  }
  return kExitOk;
}

int run_deamp_scan(RunContext& ctx) {
  const auto& c = ctx.cfg.deamp_scan;
  const DeviceParams& dev = ctx.cfg.device;
  const CriticalParams cp = critical_params(dev);
  const std::vector<double> freqs =
      linspace(c.f_ratio_min * cp.f_c, c.f_ratio_max * cp.f_c, c.n_f);
  const double probe = resolve_probe_amp(dev, c.probe_mode, c.probe_amp_rel);
  const Contour contour = iso_gain_contour(dev, c.target_gain_db, freqs,
                                           default_probe_amp(dev), c.n_theta);
  for (const std::string& w : contour.warnings) std::cerr << "warning: " << w << "\n";
  const std::vector<DeampResult> results =
      scan_deamp_along_contour(contour, dev, probe, c.n_theta, ctx.threads);
  if (ctx.write_csv)
    ctx.emit("deamp_contour.csv", deamp_csv(contour, results, ctx.cfg.config_hash));
  if (ctx.write_json) ctx.emit_json("deamp_contour.json", deamp_json(contour, results));
  return kExitOk;
}

int run_optimal_point(RunContext& ctx) {
  const auto& c = ctx.cfg.optimal_point;
  const DeviceParams& dev = ctx.cfg.device;
  const CriticalParams cp = critical_params(dev);
  const std::vector<double> freqs =
      linspace(c.f_ratio_min * cp.f_c, c.f_ratio_max * cp.f_c, c.n_f);
  const double probe = resolve_probe_amp(dev, c.probe_mode, c.probe_amp_rel);
  const OptimalPointResult opt =
      optimal_point(dev, c.gain_targets_db, freqs, probe, c.n_theta);

  nlohmann::json j;
  j["op"] = operating_point_json(opt.op);
  j["ratio_db"] = opt.result.ratio_db;
  j["gain_db"] = opt.result.gain_db;
  j["gain_target_db"] = opt.gain_target_db;
  j["side"] = to_string(opt.side);
  ctx.emit_json("optimal.json", j);
  std::cout << "optimal point: " << opt.result.ratio_db << " dB deamp at gain "
            << opt.gain_target_db << " dB, " << to_string(opt.side)
            << ", f_p/f_c = " << opt.op.normalized.f_ratio << "\n";
  return kExitOk;
}

AmpModel amp_from_config(const DeviceParams& dev, const std::string& kind,
                         double gain_db, double amp_f_ratio, double amp_p_rel_db) {
  AmpModel amp;
  if (kind == "full_jpa") {
    amp.kind = AmpKind::full_jpa;
    amp.device = dev;
    amp.op = operating_point_from_normalized(amp_f_ratio, amp_p_rel_db, dev);
  } else {
    amp.kind = AmpKind::ideal_phase_sensitive;
  }
  amp.gain_db = gain_db;
  return amp;
}

SqueezerKind squeezer_from_string(const std::string& s) {
  if (s == "linearized") return SqueezerKind::linearized;
  if (s == "ideal") return SqueezerKind::ideal;
  return SqueezerKind::full_jpa;
}

int run_squeeze(RunContext& ctx) {
  const auto& c = ctx.cfg.squeeze;
  const DeviceParams& dev = ctx.cfg.device;
  const CriticalParams cp = critical_params(dev);
  const double f_p = c.f_ratio * cp.f_c;
  double amp_amp;
  if (c.pump_amp_rel > 0.0) {
    amp_amp = c.pump_amp_rel * cp.b_c;
  } else {
    const ContourSide side =
        c.side == "above" ? ContourSide::above_lmg : ContourSide::below_lmg;
    amp_amp = contour_amp(dev, f_p, c.target_gain_db, side, default_probe_amp(dev));
  }
  const OperatingPoint sq_op = make_operating_point(f_p, amp_amp, dev);
  const LossChannel loss = make_loss(c.eta_db);
  const AmpModel amp =
      amp_from_config(dev, c.amp_kind, c.amp_gain_db, c.amp_f_ratio, c.amp_p_rel_db);

  SqueezeSettings st;
  st.n_samples = c.n_samples;
  st.n_theta = c.n_theta;
  st.seed = ctx.seed_override.value_or(c.seed);
  st.n_hemt_quanta = c.n_hemt_quanta;
  st.squeezer = squeezer_from_string(c.squeezer);
  st.ideal_squeeze_db = c.ideal_squeeze_db;
  st.threads = ctx.threads;
  ctx.manifest.seed = st.seed;

  const SqueezeResult result = squeezing_vs_theta(sq_op, dev, loss, amp, st);
  if (ctx.write_csv)
    ctx.emit("squeeze_theta.csv", squeeze_csv(result, ctx.cfg.config_hash));
  if (ctx.write_json) ctx.emit_json("squeeze_theta.json", squeeze_json(result));

  if (c.export_histogram) {
    const QuadratureHistogram hist =
        squeeze_histogram(sq_op, dev, loss, amp, st, c.hist_bins);
    ctx.emit("hist.csv", histogram_csv(hist.theta, hist.bin_centers, hist.count_on,
                                       hist.count_off, ctx.cfg.config_hash));
  }
  std::cout << "min S = " << result.min_s_db
            << " dB (loss floor " << result.loss_floor_db << " dB)\n";
  return kExitOk;
}

int run_squeeze_scan(RunContext& ctx) {
  const auto& c = ctx.cfg.squeeze_scan;
  const DeviceParams& dev = ctx.cfg.device;
  const CriticalParams cp = critical_params(dev);
  const double f_p = c.f_ratio * cp.f_c;
  const double weak = default_probe_amp(dev);
  const LossChannel loss = make_loss(c.eta_db);
  const AmpModel amp = amp_from_config(dev, c.amp_kind, c.amp_gain_db, 0.0, 0.0);

  SqueezeSettings st;
  st.n_samples = c.n_samples;
  st.n_theta = c.n_theta;
  st.seed = ctx.seed_override.value_or(c.seed);
  st.n_hemt_quanta = c.n_hemt_quanta;
  st.squeezer = squeezer_from_string(c.squeezer);
  st.threads = ctx.threads;
  ctx.manifest.seed = st.seed;

  std::vector<std::pair<OperatingPoint, std::string>> ops;
  if (c.mode == "contour") {
    // One point per contour position, ordered along the iso-gain loop.
    const std::vector<double> freqs =
        linspace(c.f_ratio_min * cp.f_c, c.f_ratio_max * cp.f_c, c.n_f);
    const Contour contour =
        iso_gain_contour(dev, c.contour_target_db, freqs, weak);
    for (const std::string& w : contour.warnings) std::cerr << "warning: " << w << "\n";
    for (const ContourPoint& pt : contour.points)
      ops.emplace_back(pt.op, to_string(pt.side));
  } else {
    for (double target : c.gain_targets_db) {
      if (c.sides != "above")
        ops.emplace_back(
            make_operating_point(
                f_p, contour_amp(dev, f_p, target, ContourSide::below_lmg, weak), dev),
            "below_lmg");
      if (c.sides != "below")
        ops.emplace_back(
            make_operating_point(
                f_p, contour_amp(dev, f_p, target, ContourSide::above_lmg, weak), dev),
            "above_lmg");
    }
    if (c.include_lmg) {
      const LmgPoint lp = lmg_point(dev, f_p, weak);
      if (lp.found) ops.emplace_back(lp.op, "on_lmg");
    }
    // Order the cut by pump power.
    std::sort(ops.begin(), ops.end(), [](const auto& a, const auto& b) {
      return a.first.pump_amp < b.first.pump_amp;
    });
  }

  std::vector<SqueezeScanRow> rows;
  for (const auto& [op, side] : ops) {
    const SqueezeResult r = squeezing_vs_theta(op, dev, loss, amp, st);
    Eigen::Index argmin = 0;
    r.s_db.minCoeff(&argmin);
    SqueezeScanRow row;
    row.op = op;
    row.side = side;
    row.gain_db = direct_gain(op, dev, weak);
    row.min_s_db = r.min_s_db;
    row.min_s_stderr_db = r.stderr_db[argmin];
    rows.push_back(row);
  }
  if (ctx.write_csv)
    ctx.emit("squeeze_scan.csv", squeeze_scan_csv(rows, ctx.cfg.config_hash));
  if (ctx.write_json) ctx.emit_json("squeeze_scan.json", squeeze_scan_json(rows));
  return kExitOk;
}

int run_noise_fit(RunContext& ctx) {
  const auto& c = ctx.cfg.noise_fit;
  // Relative data paths resolve against the output dir (the synth-noise ->
  // noise-fit pipeline), then the config file's directory.
  fs::path data_path(c.data);
  if (data_path.is_relative()) {
    const fs::path in_out = ctx.out_dir / data_path;
    const fs::path in_cfg = ctx.cfg.source_dir / data_path;
    data_path = fs::exists(in_out) ? in_out : in_cfg;
  }
  const std::string text = read_text_file(data_path);
  const std::vector<NoiseSample> samples = parse_noise_csv(text, data_path.string());

  FitOptions opts;
  opts.init_lambda = c.init_lambda;
  opts.init_n_add = c.init_n_add;
  opts.init_chain_gain_db = c.init_chain_gain_db;
  opts.multi_start = c.multi_start;
  const FitResult fit = fit_added_noise(samples, kTwoPi * c.freq_hz, opts);
  ctx.emit_json("fit.json", fit_json(fit));
  std::cout << "fit: n_add = " << fit.n_add << " +- " << fit.n_add_sigma
            << ", lambda = " << fit.lambda << " +- " << fit.lambda_sigma
            << ", chain gain = " << fit.chain_gain_db << " dB\n";
  return kExitOk;
}

int run_line_budget(RunContext& ctx) {
  const auto& c = ctx.cfg.line_budget;
  LineBudget budget;
  budget.g_a_out_db = {c.g_a_out_db, c.g_a_out_sigma_db};
  budget.g_s_out_db = {c.g_s_out_db, c.g_s_out_sigma_db};
  budget.eta_db = transport_loss(budget.g_a_out_db, budget.g_s_out_db);
  if (c.p_probe_in_w > 0.0 && c.p_probe_out_w > 0.0) {
    budget.a_in_db.value =
        input_attenuation_db(c.p_probe_out_w, c.p_probe_in_w, c.g_s_out_db);
    budget.a_in_db.sigma = c.g_s_out_sigma_db;
    budget.has_a_in = true;
  }
  ctx.emit_json("line_budget.json", line_budget_json(budget));
  std::cout << "eta = " << budget.eta_db.value << " +- " << budget.eta_db.sigma
            << " dB\n";
  return kExitOk;
}

int run_synth_noise(RunContext& ctx) {
  const auto& c = ctx.cfg.synth_noise;
  NoiseModelParams params;
  params.n_add = c.n_add;
  params.lambda = c.lambda;
  params.chain_gain_db = c.chain_gain_db;
  params.omega = kTwoPi * c.freq_hz;
  const std::vector<double> t_vts = linspace(c.t_vts_min_mk * 1e-3,
                                             c.t_vts_max_mk * 1e-3, c.n_t);
  std::vector<double> t_fridge;
  for (double mk : c.t_fridge_mk) t_fridge.push_back(mk * 1e-3);
  const std::uint64_t seed = ctx.seed_override.value_or(c.seed);
  ctx.manifest.seed = seed;
  const std::vector<NoiseSample> samples =
      synth_noise_data(params, t_vts, t_fridge, seed, c.noise_frac);
  ctx.emit("noise.csv", noise_csv(samples, ctx.cfg.config_hash));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolName) + " " + kToolVersion +
               " - driven Kerr resonator amplifier simulator"};
  app.require_subcommand(1);

  CliOptions opts;
  app.add_option("--config", opts.config_path, "Config file (INI or JSON)");
  app.add_option("--out", opts.out_dir, "Output directory (overrides config)");
  auto* seed_opt =
      app.add_option("--seed", opts.seed, "Seed override for stochastic runs");
  app.add_option("--format", opts.format, "csv | json | both (overrides config)");
  app.add_option("--threads", opts.threads, "Worker threads (0 = hardware)");

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(RunContext&);
  };
  const Sub subs[] = {
      {"gain-map", "Direct gain over the (pump power, pump frequency) plane",
       run_gain_map},
      {"lmg", "Line of maximum gain over a frequency range", run_lmg},
      {"contour", "Iso-gain contour around the critical point", run_contour},
      {"distort", "Phasor sweeps and deamplification at chosen gains", run_distort},
      {"deamp-scan", "Deamplification along an iso-gain contour", run_deamp_scan},
      {"optimal-point", "Distortion-minimizing operating point", run_optimal_point},
      {"squeeze", "Vacuum squeezing S(theta) at one operating point", run_squeeze},
      {"squeeze-scan", "Squeezing across operating points", run_squeeze_scan},
      {"noise-fit", "Added-noise fit from a noise CSV", run_noise_fit},
      {"line-budget", "Chain gain/attenuation budget", run_line_budget},
      {"synth-noise", "Synthetic noise dataset generator", run_synth_noise},
  };
  for (const Sub& sub : subs) app.add_subcommand(sub.name, sub.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  opts.seed_set = seed_opt->count() > 0;

  try {
    for (const Sub& sub : subs) {
      if (app.got_subcommand(sub.name)) {
        RunContext ctx = make_context(opts, sub.name);
        if (opts.seed_set) ctx.seed_override = opts.seed;
        const int rc = sub.fn(ctx);
        ctx.finish();
        return rc;
      }
    }
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
