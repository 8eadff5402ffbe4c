// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not configurable.
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "jpa/calibration.hpp"
#include "jpa/distortion.hpp"
#include "jpa/io.hpp"
#include "jpa/rng.hpp"
#include "jpa/squeezing.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace jpa;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Criterion {
 public:
  Criterion(int number, std::string title)
      : number_(number), title_(std::move(title)),
        start_(std::chrono::steady_clock::now()) {}

  void check(bool ok, const std::string& detail) {
    if (!ok) {
      failed_ = true;
      details_.push_back(detail);
    }
  }
  void note(const std::string& detail) { notes_.push_back(detail); }

  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

  ~Criterion() {
    const double dt = seconds();
    std::printf("[%s] criterion %2d: %s (%.2f s)\n", failed_ ? "FAIL" : "PASS",
                number_, title_.c_str(), dt);
    for (const std::string& d : details_) std::printf("       ! %s\n", d.c_str());
    for (const std::string& n : notes_) std::printf("       - %s\n", n.c_str());
    if (failed_) ++g_failures;
    std::fflush(stdout);
  }

 private:
  int number_;
  std::string title_;
  std::chrono::steady_clock::time_point start_;
  bool failed_ = false;
  std::vector<std::string> details_;
  std::vector<std::string> notes_;
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double fig_f_p(const DeviceParams& dev, double delta_over_gamma = 1.54) {
  return (dev.omega0 - delta_over_gamma * dev.gamma) / kTwoPi;
}

// ---------------------------------------------------------------- criterion 1
void criterion_1(const DeviceParams& dev) {
  Criterion c(1, "all-pass unitarity of steady_output");
  const CriticalParams cp = critical_params(dev);
  Rng rng(314159);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double amp = 2.0 * cp.b_c * rng.uniform();
    if (amp == 0.0) continue;
    const Phasor b_in = std::polar(amp, kTwoPi * rng.uniform());
    const double d = (-2.0 + 5.0 * rng.uniform()) * dev.gamma;
    const Phasor b_out = steady_output(b_in, d, dev);
    worst = std::max(worst, std::abs(std::abs(b_out) / std::abs(b_in) - 1.0));
  }
  c.check(worst < 1e-12, fmt("max | |out|/|in| - 1 | = %.3e >= 1e-12", worst));
  c.note(fmt("max deviation %.3e over 10^4 random inputs", worst));
  c.check(c.seconds() < 1.0, fmt("runtime %.2f s exceeds 1 s", c.seconds()));
}

// ---------------------------------------------------------------- criterion 2
void criterion_2(const DeviceParams& dev) {
  Criterion c(2, "cubic roots match the bisection oracle on a 100x100 grid");
  const CriticalParams cp = critical_params(dev);
  double worst = 0.0;
  int count_mismatch = 0;
  for (int i = 0; i < 100; ++i) {
    const double d = (-1.0 + 4.2 * i / 99.0) * dev.gamma;
    for (int j = 0; j < 100; ++j) {
      const double flux = cp.b_c_sq() * std::pow(10.0, -3.0 + 3.5 * j / 99.0);
      const SteadyState ss = solve_photon_number(d, dev, flux);
      const std::vector<double> expected = oracle::photon_roots(dev, d, flux);
      if (ss.root_count != static_cast<int>(expected.size())) {
        ++count_mismatch;
        continue;
      }
      for (int r = 0; r < ss.root_count; ++r) {
        const double rel =
            std::abs(ss.all_roots[r] - expected[r]) / std::max(expected[r], 1e-300);
        worst = std::max(worst, rel);
      }
    }
  }
  c.check(count_mismatch == 0, fmt("%d cells disagree on root count", count_mismatch));
  c.check(worst < 1e-9, fmt("max relative root deviation %.3e >= 1e-9", worst));
  c.note(fmt("max relative deviation %.3e", worst));
  c.check(c.seconds() < 10.0, fmt("runtime %.2f s exceeds 10 s", c.seconds()));
}

// ---------------------------------------------------------------- criterion 3
void criterion_3(const DeviceParams& dev) {
  Criterion c(3, "bifurcation onset matches sqrt(3) gamma and b_c to 1e-6");
  const CriticalParams cp = critical_params(dev);
  const oracle::BifurcationOnset onset = oracle::bifurcation_onset_scan(dev);
  const double delta_rel = std::abs(onset.delta - std::sqrt(3.0) * dev.gamma) /
                           (std::sqrt(3.0) * dev.gamma);
  const double amp_rel = std::abs(onset.amp - cp.b_c) / cp.b_c;
  c.check(delta_rel < 1e-6, fmt("onset detuning off by %.3e relative", delta_rel));
  c.check(amp_rel < 1e-6, fmt("onset amplitude off by %.3e relative", amp_rel));
  c.note(fmt("delta_c off by %.2e, b_c off by %.2e", delta_rel, amp_rel));
}

// ---------------------------------------------------------------- criterion 4
void criterion_4(const DeviceParams& dev) {
  Criterion c(4, "deamp optimum lies strictly above the gain maximum (half photon)");
  const CriticalParams cp = critical_params(dev);
  const double f_p = fig_f_p(dev);  // Delta/gamma = 1.54
  const double weak = default_probe_amp(dev);
  const double half = half_photon_probe_amp(dev);

  // Unimodal gain curve with one interior maximum.
  std::vector<double> gains;
  for (int i = 1; i <= 120; ++i) {
    const double amp = cp.b_c * 1.3 * i / 120.0;
    gains.push_back(direct_gain(make_operating_point(f_p, amp, dev), dev, weak, 180));
  }
  int falls = 0;
  for (std::size_t i = 2; i < gains.size(); ++i) {
    if (gains[i - 1] > gains[i - 2] && gains[i] <= gains[i - 1]) ++falls;
  }
  c.check(falls == 1, fmt("gain curve has %d falling transitions, want 1", falls));

  const LmgPoint lp = lmg_point(dev, f_p, weak, 360);
  c.check(lp.found, "no interior gain maximum found");

  auto ratio_at = [&](double amp) {
    return deamp_ratio(make_operating_point(f_p, amp, dev), dev, half, 360).ratio_db;
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.85 * cp.b_c, b = 1.15 * cp.b_c;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double r1 = ratio_at(x1), r2 = ratio_at(x2);
  while (b - a > 1e-7 * cp.b_c) {
    if (r1 < r2) {
      b = x2; x2 = x1; r2 = r1; x1 = b - inv_phi * (b - a); r1 = ratio_at(x1);
    } else {
      a = x1; x1 = x2; r1 = r2; x2 = a + inv_phi * (b - a); r2 = ratio_at(x2);
    }
  }
  const double amp_ratio_opt = 0.5 * (a + b);
  c.check(amp_ratio_opt > lp.op.pump_amp,
          fmt("ratio optimum %.6f b_c not above gain max %.6f b_c",
              amp_ratio_opt / cp.b_c, lp.op.pump_amp / cp.b_c));
  c.note(fmt("gain max at %.4f b_c, deamp optimum at %.4f b_c",
             lp.op.pump_amp / cp.b_c, amp_ratio_opt / cp.b_c));
  c.check(c.seconds() < 30.0, fmt("runtime %.2f s exceeds 30 s", c.seconds()));
}

// ---------------------------------------------------------------- criterion 5
void criterion_5(const DeviceParams& dev) {
  Criterion c(5, "8 dB contour: above-LMG beats below-LMG by >= 0.5 dB everywhere");
  const CriticalParams cp = critical_params(dev);
  const double half = half_photon_probe_amp(dev);
  const std::vector<double> freqs = linspace(1.0006 * cp.f_c, 1.003 * cp.f_c, 7);
  const Contour contour = iso_gain_contour(dev, 8.0, freqs, default_probe_amp(dev), 360);
  c.check(contour.points.size() == 14,
          fmt("expected 14 contour points, got %zu", contour.points.size()));
  const std::vector<DeampResult> results =
      scan_deamp_along_contour(contour, dev, half, 360, 2);

  // Regression lock from the first computation (ratios in dB, f ascending).
  const double locked_below[7] = {-11.767867, -11.817434, -11.866704, -11.916126,
                                  -11.966217, -12.017676, -12.071246};
  const double locked_above[7] = {-13.331782, -13.318204, -13.303268, -13.286684,
                                  -13.268214, -13.247412, -13.223602};
  const std::size_t n = results.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const DeampResult& below = results[i];
    const DeampResult& above = results[n - 1 - i];
    c.check(std::abs(below.op.f_p - above.op.f_p) < 1.0,
            "contour pairing broke frequency alignment");
    const double margin = below.ratio_db - above.ratio_db;
    c.check(margin >= 0.5,
            fmt("margin %.3f dB < 0.5 dB at f_ratio %.5f", margin,
                below.op.normalized.f_ratio));
    c.check(std::abs(below.ratio_db - locked_below[i]) < 0.02,
            fmt("below ratio %.6f drifted from locked %.6f", below.ratio_db,
                locked_below[i]));
    c.check(std::abs(above.ratio_db - locked_above[i]) < 0.02,
            fmt("above ratio %.6f drifted from locked %.6f", above.ratio_db,
                locked_above[i]));
  }
  c.note(fmt("margins %.2f..%.2f dB across the contour",
             results[0].ratio_db - results[n - 1].ratio_db,
             results[n / 2 - 1].ratio_db - results[n / 2].ratio_db));
  c.check(c.seconds() < 120.0, fmt("runtime %.2f s exceeds 2 min", c.seconds()));
}

// ---------------------------------------------------------------- criterion 6
void criterion_6(const DeviceParams& dev) {
  Criterion c(6, "global deamp optimum is above the LMG at an interior gain");
  const CriticalParams cp = critical_params(dev);
  const double half = half_photon_probe_amp(dev);
  const std::vector<double> targets{6, 7, 8, 9, 10, 11, 12, 13};
  const std::vector<double> freqs = linspace(1.0006 * cp.f_c, 1.004 * cp.f_c, 9);
  const OptimalPointResult opt = optimal_point(dev, targets, freqs, half, 360);
  c.check(opt.side == ContourSide::above_lmg, "optimum not on the above-LMG branch");
  c.check(opt.gain_target_db > targets.front() && opt.gain_target_db < targets.back(),
          fmt("optimum gain %.1f dB is not interior to [6, 13]", opt.gain_target_db));
  c.note(fmt("optimum: %.2f dB deamp at %.0f dB gain, f_ratio %.5f",
             opt.result.ratio_db, opt.gain_target_db, opt.op.normalized.f_ratio));
}

// ---------------------------------------------------------------- criterion 7
void criterion_7(const DeviceParams& dev) {
  Criterion c(7, "squeezing loss floor at eta = 1.2 dB");
  const LossChannel loss = make_loss(1.2);
  const AmpModel amp;  // ideal 25 dB
  const double floor_db = db_from_ratio(1.0 - std::pow(10.0, -0.12));

  SqueezeSettings st;
  st.n_samples = 100000;
  st.n_theta = 16;
  st.seed = 314;
  st.squeezer = SqueezerKind::ideal;
  st.ideal_squeeze_db = 60.0;  // near-perfect linearized squeezer
  const OperatingPoint no_pump = make_operating_point(fig_f_p(dev), 0.0, dev);
  const SqueezeResult ideal = squeezing_vs_theta(no_pump, dev, loss, amp, st);
  Eigen::Index argmin = 0;
  ideal.s_db.minCoeff(&argmin);
  const double se = ideal.stderr_db[argmin];
  c.check(std::abs(ideal.min_s_db - floor_db) < 3.0 * se,
          fmt("min S %.4f dB vs floor %.4f dB beyond 3 se (%.4f)", ideal.min_s_db,
              floor_db, se));
  c.note(fmt("near-perfect squeezer: min S %.3f dB, floor %.3f dB, se %.3f",
             ideal.min_s_db, floor_db, se));

  // Full model at the 8 dB above-LMG operating point.
  const double amp_8 = contour_amp(dev, fig_f_p(dev), 8.0, ContourSide::above_lmg,
                                   default_probe_amp(dev));
  const OperatingPoint sq_op = make_operating_point(fig_f_p(dev), amp_8, dev);
  SqueezeSettings st_full;
  st_full.n_samples = 100000;
  st_full.n_theta = 16;
  st_full.seed = 315;
  const SqueezeResult full = squeezing_vs_theta(sq_op, dev, loss, amp, st_full);
  c.check(full.min_s_db > -6.2 && full.min_s_db < -3.5,
          fmt("8 dB above-LMG min S %.3f dB outside [-6.2, -3.5]", full.min_s_db));
  c.note(fmt("8 dB above-LMG model: min S %.3f dB", full.min_s_db));
  c.check(c.seconds() < 60.0, fmt("runtime %.2f s exceeds 1 min", c.seconds()));
}

// ---------------------------------------------------------------- criterion 8
void criterion_8(const DeviceParams& dev) {
  Criterion c(8, "S(theta) has period pi with minima at pi/2, and SQ-off is 0 dB");
  const LossChannel loss = make_loss(1.2);
  const AmpModel amp;
  const double amp_8 = contour_amp(dev, fig_f_p(dev), 8.0, ContourSide::above_lmg,
                                   default_probe_amp(dev));
  const OperatingPoint sq_op = make_operating_point(fig_f_p(dev), amp_8, dev);

  SqueezeSettings st;
  st.n_samples = 30000;
  st.n_theta = 64;
  st.seed = 808;
  const SqueezeResult r = squeezing_vs_theta(sq_op, dev, loss, amp, st);

  int periodicity_violations = 0;
  for (int k = 0; k < st.n_theta / 2; ++k) {
    const double se = std::hypot(r.stderr_db[k], r.stderr_db[k + st.n_theta / 2]);
    if (std::abs(r.s_db[k] - r.s_db[k + st.n_theta / 2]) > 3.5 * se)
      ++periodicity_violations;
  }
  c.check(periodicity_violations == 0,
          fmt("%d theta pairs break pi-periodicity beyond noise",
              periodicity_violations));

  Eigen::Index argmin = 0;
  r.s_db.minCoeff(&argmin);
  const double step = kTwoPi / st.n_theta;
  double pos = std::fmod(r.theta[argmin], kPi);
  const double dist = std::min(std::abs(pos - kPi / 2.0),
                               kPi - std::abs(pos - kPi / 2.0));
  c.check(dist <= step + 1e-12,
          fmt("minimum at theta %.4f is %.4f rad from pi/2 mod pi (step %.4f)",
              r.theta[argmin], dist, step));

  const OperatingPoint off = make_operating_point(fig_f_p(dev), 0.0, dev);
  SqueezeSettings st_off;
  st_off.n_samples = 30000;
  st_off.n_theta = 16;
  st_off.seed = 809;
  const SqueezeResult off_r = squeezing_vs_theta(off, dev, loss, amp, st_off);
  int off_violations = 0;
  for (int k = 0; k < st_off.n_theta; ++k)
    if (std::abs(off_r.s_db[k]) > 3.0 * off_r.stderr_db[k]) ++off_violations;
  c.check(off_violations == 0,
          fmt("SQ-off control off 0 dB at %d theta points", off_violations));
  c.note(fmt("min S %.3f dB at theta = %.4f", r.min_s_db, r.theta[argmin]));
}

// ---------------------------------------------------------------- criterion 9
void criterion_9(const DeviceParams& dev) {
  Criterion c(9, "squeezing degrades toward the LMG; above >= below at matched gain");
  const LossChannel loss = make_loss(1.2);
  const AmpModel amp;
  const double f_p = fig_f_p(dev);
  const double weak = default_probe_amp(dev);
  SqueezeSettings st;
  st.n_samples = 50000;
  st.n_theta = 16;
  st.seed = 999;

  const std::vector<double> gains{9.0, 11.0, 13.0, 15.0};
  std::map<double, double> s_below, s_above, se_below, se_above;
  for (double g : gains) {
    for (ContourSide side : {ContourSide::below_lmg, ContourSide::above_lmg}) {
      const double amp_g = contour_amp(dev, f_p, g, side, weak);
      const SqueezeResult r = squeezing_vs_theta(
          make_operating_point(f_p, amp_g, dev), dev, loss, amp, st);
      Eigen::Index argmin = 0;
      r.s_db.minCoeff(&argmin);
      if (side == ContourSide::below_lmg) {
        s_below[g] = r.min_s_db;
        se_below[g] = r.stderr_db[argmin];
      } else {
        s_above[g] = r.min_s_db;
        se_above[g] = r.stderr_db[argmin];
      }
    }
  }
  const LmgPoint lp = lmg_point(dev, f_p, weak);
  const SqueezeResult at_lmg = squeezing_vs_theta(lp.op, dev, loss, amp, st);

  // Monotone degradation from the 9 dB points toward the LMG on both sides.
  for (std::size_t i = 1; i < gains.size(); ++i) {
    const double slack_b =
        3.0 * std::hypot(se_below[gains[i]], se_below[gains[i - 1]]);
    c.check(s_below[gains[i]] >= s_below[gains[i - 1]] - slack_b,
            fmt("below-LMG S not degrading: %.3f dB (g=%.0f) < %.3f dB (g=%.0f)",
                s_below[gains[i]], gains[i], s_below[gains[i - 1]], gains[i - 1]));
    const double slack_a =
        3.0 * std::hypot(se_above[gains[i]], se_above[gains[i - 1]]);
    c.check(s_above[gains[i]] >= s_above[gains[i - 1]] - slack_a,
            fmt("above-LMG S not degrading: %.3f dB (g=%.0f) < %.3f dB (g=%.0f)",
                s_above[gains[i]], gains[i], s_above[gains[i - 1]], gains[i - 1]));
  }
  c.check(at_lmg.min_s_db >= s_below[gains.back()] - 0.3,
          fmt("S at the LMG (%.3f dB) better than the last below point (%.3f dB)",
              at_lmg.min_s_db, s_below[gains.back()]));
  c.check(at_lmg.min_s_db >= s_above[gains.back()] - 0.3,
          fmt("S at the LMG (%.3f dB) better than the last above point (%.3f dB)",
              at_lmg.min_s_db, s_above[gains.back()]));

  // Matched-gain comparison: above squeezes at least as well as below.
  for (double g : gains) {
    const double slack = 3.0 * std::hypot(se_above[g], se_below[g]);
    c.check(s_above[g] <= s_below[g] + slack,
            fmt("above-LMG S %.3f dB worse than below %.3f dB at g = %.0f dB",
                s_above[g], s_below[g], g));
  }
  c.note(fmt("S(9 dB): above %.2f / below %.2f; S(15 dB): above %.2f / below %.2f; "
             "LMG %.2f dB",
             s_above[9.0], s_below[9.0], s_above[15.0], s_below[15.0],
             at_lmg.min_s_db));
}

// --------------------------------------------------------------- criterion 10
void criterion_10() {
  Criterion c(10, "calibration recovery and eta arithmetic");
  NoiseModelParams p;
  p.n_add = 0.045;
  p.lambda = 0.79;
  p.chain_gain_db = 100.0;
  p.omega = kTwoPi * 7.0032e9;
  std::vector<double> tv(600);
  for (int i = 0; i < 600; ++i) tv[i] = 0.05 + 0.55 * i / 599.0;
  const std::vector<double> tf{0.05, 0.3, 0.5};

  const auto clean = synth_noise_data(p, tv, tf, 1, 0.0);
  const FitResult fit = fit_added_noise(clean, p.omega);
  c.check(std::abs(fit.n_add - 0.045) < 0.001 * 0.045,
          fmt("noiseless n_add %.6f not within 0.1%% of 0.045", fit.n_add));
  c.check(std::abs(fit.lambda - 0.79) < 0.001 * 0.79,
          fmt("noiseless lambda %.6f not within 0.1%% of 0.79", fit.lambda));

  int ok = 0;
  for (int seed = 1; seed <= 100; ++seed) {
    const auto noisy = synth_noise_data(p, tv, tf, seed, 0.005);
    const FitResult f = fit_added_noise(noisy, p.omega);
    if (std::abs(f.n_add - 0.045) <= 0.001 && std::abs(f.lambda - 0.79) <= 0.01) ++ok;
  }
  c.check(ok >= 90, fmt("coverage %d/100 below 90", ok));
  c.note(fmt("coverage %d/100 within (+-0.001, +-0.01)", ok));

  const double eta = transport_loss_db(76.5, 75.3);
  c.check(std::abs(eta - 1.2) < 1e-12, fmt("eta %.12f != 1.2", eta));
  c.check(c.seconds() < 30.0, fmt("runtime %.2f s exceeds 30 s", c.seconds()));
}

// --------------------------------------------------------------- criterion 11
const char* kDeterminismConfig = R"(schema = jpasim-config-v1
[device]
f0_hz = 7097596769.0
gamma_hz = 54.5e6
kerr_over_gamma = -8.3e-4
[output]
formats = both
[gain_map]
f_ratio_min = 1.0008
f_ratio_max = 1.002
n_f = 3
p_rel_db_min = -3
p_rel_db_max = 0
n_p = 3
n_theta = 45
[lmg]
f_ratio_min = 1.001
f_ratio_max = 1.002
n_f = 2
n_theta = 60
[contour]
target_gain_db = 8
f_ratio_min = 1.001
f_ratio_max = 1.002
n_f = 2
n_theta = 60
[distort]
f_ratio = 1.0015
gain_targets_db = 6, 9.5
side = above
n_theta = 90
amp_scan = true
amp_min_rel = 0.3
amp_max_rel = 1.1
n_amp = 6
[deamp_scan]
target_gain_db = 8
f_ratio_min = 1.001
f_ratio_max = 1.002
n_f = 2
n_theta = 90
[optimal_point]
gain_targets_db = 8, 10
f_ratio_min = 1.001
f_ratio_max = 1.002
n_f = 2
n_theta = 60
[squeeze]
f_ratio = 1.0015
target_gain_db = 8
side = above
n_samples = 4000
n_theta = 8
seed = 5
export_histogram = true
hist_bins = 21
[squeeze_scan]
f_ratio = 1.0015
gain_targets_db = 9
sides = both
include_lmg = false
n_samples = 2000
n_theta = 4
seed = 5
[noise_fit]
data = noise.csv
freq_hz = 7.0032e9
[line_budget]
g_a_out_db = 76.5
g_s_out_db = 75.3
[synth_noise]
n_t = 10
noise_frac = 0.005
seed = 5
)";

int run_cli(const std::string& bin, const std::string& args) {
  const std::string cmd = bin + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_11(const std::string& bin) {
  Criterion c(11, "CLI determinism: byte-identical reruns across --threads");
  const fs::path dir = fs::temp_directory_path() / "jpasim_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path config_path = dir / "cfg.ini";
  std::ofstream(config_path) << kDeterminismConfig;

  // noise-fit input produced once, next to the config.
  c.check(run_cli(bin, "--config " + config_path.string() + " --out " +
                           dir.string() + " synth-noise") == 0,
          "synth-noise for fit input failed");

  const std::vector<std::string> subcommands{
      "gain-map", "lmg",     "contour",  "distort",      "deamp-scan", "optimal-point",
      "squeeze",  "squeeze-scan", "noise-fit", "line-budget", "synth-noise"};
  for (const std::string& sub : subcommands) {
    const fs::path out_a = dir / (sub + "_a");
    const fs::path out_b = dir / (sub + "_b");
    const std::string base = "--config " + config_path.string() + " --seed 5 ";
    const int rc_a = run_cli(bin, base + "--threads 1 --out " + out_a.string() + " " + sub);
    const int rc_b = run_cli(bin, base + "--threads 2 --out " + out_b.string() + " " + sub);
    c.check(rc_a == 0 && rc_b == 0, fmt("%s exited %d/%d", sub.c_str(), rc_a, rc_b));
    if (rc_a != 0 || rc_b != 0) continue;

    // Every non-manifest artifact must be byte-identical; the manifests must
    // agree on the output checksums.
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(out_a)) {
      const std::string name = entry.path().filename().string();
      if (name == "manifest.json") continue;
      const std::string a = read_text_file(entry.path());
      const std::string b = read_text_file(out_b / name);
      if (a != b) c.check(false, fmt("%s: %s differs between runs", sub.c_str(), name.c_str()));
      ++compared;
    }
    c.check(compared > 0, fmt("%s produced no artifacts", sub.c_str()));
    const auto ma = nlohmann::json::parse(read_text_file(out_a / "manifest.json"));
    const auto mb = nlohmann::json::parse(read_text_file(out_b / "manifest.json"));
    c.check(ma["outputs"] == mb["outputs"],
            fmt("%s: manifest checksums differ", sub.c_str()));
  }
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  const DeviceParams dev = fig_device();
  std::string bin = JPASIM_BIN;
  if (argc > 1) bin = argv[1];

  std::printf("acceptance suite: device gamma/2pi = %.1f MHz, K/gamma = %.2e, Q = %.0f\n",
              dev.gamma / kTwoPi / 1e6, dev.kerr / dev.gamma, dev.quality_factor());
  criterion_1(dev);
  criterion_2(dev);
  criterion_3(dev);
  criterion_4(dev);
  criterion_5(dev);
  criterion_6(dev);
  criterion_7(dev);
  criterion_8(dev);
  criterion_9(dev);
  criterion_10();
  criterion_11(bin);

  if (g_failures == 0) {
    std::printf("ACCEPTANCE: all 11 criteria passed\n");
    return 0;
  }
  std::printf("ACCEPTANCE: %d criterion(s) FAILED\n", g_failures);
  return 1;
}
