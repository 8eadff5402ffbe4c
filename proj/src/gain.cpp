#include "jpa/gain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jpa/parallel.hpp"

namespace jpa {

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw DomainError("linspace: need n >= 1");
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + step * i;
  v.back() = hi;
  return v;
}

OperatingPoint make_operating_point(double f_p, double pump_amp, const DeviceParams& dev) {
  if (!(f_p > 0.0)) throw DomainError("operating point: f_p must be positive");
  if (!(pump_amp >= 0.0) || !std::isfinite(pump_amp))
    throw DomainError("operating point: pump_amp must be finite and non-negative");
  const CriticalParams cp = critical_params(dev);
  OperatingPoint op;
  op.f_p = f_p;
  op.pump_amp = pump_amp;
  op.normalized.f_ratio = f_p / cp.f_c;
  op.normalized.p_rel_db = db_from_ratio(pump_power_w(op) / cp.p_c);
  return op;
}

OperatingPoint operating_point_from_normalized(double f_ratio, double p_rel_db,
                                               const DeviceParams& dev) {
  const CriticalParams cp = critical_params(dev);
  const double f_p = f_ratio * cp.f_c;
  const double p_w = cp.p_c * ratio_from_db(p_rel_db);
  const double amp = std::sqrt(watt_to_flux(p_w, kTwoPi * f_p));
  return make_operating_point(f_p, amp, dev);
}

double default_probe_amp(const DeviceParams& dev) {
  return 1e-4 * critical_params(dev).b_c;
}

double half_photon_probe_amp(const DeviceParams& dev) {
  // |b_s|^2 = B/2 with B = gamma/pi the linewidth in Hz.
  return std::sqrt(dev.gamma / kTwoPi);
}

double direct_gain(const OperatingPoint& op, const DeviceParams& dev,
                   double probe_amp, int n_theta) {
  if (n_theta < 8) throw DomainError("direct_gain: need n_theta >= 8");
  if (!(probe_amp > 0.0)) throw DomainError("direct_gain: probe_amp must be positive");
  if (op.pump_amp > 0.0 && probe_amp > op.pump_amp)
    throw DomainError("direct_gain: probe larger than pump");

  const double delta = detuning_of(dev, op.f_p);
  const SteadyState pump_ss =
      solve_photon_number(delta, dev, op.pump_amp * op.pump_amp);
  if (pump_ss.root_count > 1) {
    std::ostringstream msg;
    msg << "direct_gain: bistable operating point (f_p = " << op.f_p
        << " Hz, pump_amp = " << op.pump_amp << ")";
    throw BistableError(msg.str());
  }
  const Phasor b_p_out =
      steady_output_from_state(Phasor(op.pump_amp, 0.0), dev.gamma, pump_ss);

  double sum_g = 0.0;
  const double step = kTwoPi / n_theta;
  for (int k = 0; k < n_theta; ++k) {
    const double theta = step * k;
    const Phasor b_in(op.pump_amp + probe_amp * std::cos(theta),
                      probe_amp * std::sin(theta));
    const Phasor b_s_out = steady_output(b_in, delta, dev) - b_p_out;
    sum_g += std::norm(b_s_out);
  }
  const double mean_g = sum_g / (n_theta * probe_amp * probe_amp);
  return db_from_ratio((mean_g + 1.0) / 2.0);
}

GainMap gain_map(const DeviceParams& dev, const FreqGrid& freq, const PowerGridDb& power,
                 double probe_amp, int n_theta, unsigned threads) {
  if (freq.n < 1 || power.n < 1) throw DomainError("gain_map: empty grid");
  if (freq.n > 1 && !(freq.hi_hz > freq.lo_hz))
    throw DomainError("gain_map: frequency range must be increasing");
  if (power.n > 1 && !(power.hi_db > power.lo_db))
    throw DomainError("gain_map: power range must be increasing");

  const CriticalParams cp = critical_params(dev);
  GainMap map;
  map.f_p = Eigen::ArrayXd::LinSpaced(freq.n, freq.lo_hz, freq.hi_hz);
  map.p_p = Eigen::ArrayXd(power.n);
  for (int j = 0; j < power.n; ++j) {
    const double db = power.n == 1
                          ? power.lo_db
                          : power.lo_db + (power.hi_db - power.lo_db) * j / (power.n - 1);
    map.p_p[j] = cp.p_c * ratio_from_db(db);
  }
  map.gain_db.setConstant(power.n, freq.n, std::numeric_limits<double>::quiet_NaN());
  map.bistable.setConstant(power.n, freq.n, false);

  const std::size_t n_cells = static_cast<std::size_t>(freq.n) * power.n;
  parallel_for(n_cells, threads, [&](std::size_t cell) {
    const int j = static_cast<int>(cell % power.n);  // power index
    const int k = static_cast<int>(cell / power.n);  // frequency index
    const double f_p = map.f_p[k];
    const double amp = std::sqrt(watt_to_flux(map.p_p[j], kTwoPi * f_p));
    const double delta = detuning_of(dev, f_p);
    if (is_bistable(dev, delta, amp * amp)) {
      map.bistable(j, k) = true;
      return;
    }
    map.gain_db(j, k) = direct_gain(make_operating_point(f_p, amp, dev), dev,
                                    probe_amp, n_theta);
  });
  return map;
}

CriticalParams locate_critical_point(const DeviceParams& dev) {
  return critical_params(dev);
}

CriticalPointCheck verify_critical_point(const DeviceParams& dev,
                                         double diverge_threshold_db) {
  CriticalPointCheck check;
  check.analytic = critical_params(dev);
  const CriticalParams& cp = check.analytic;
  const double sig = dev.kerr < 0.0 ? 1.0 : -1.0;

  // Bistability-onset frequency by bisection. The probe drive sits mid-window,
  // where three roots exist whenever the window exists at all.
  auto bistable_at = [&](double f_p) {
    const double d = sig * detuning_of(dev, f_p) / dev.gamma;
    if (d <= 0.0) return false;
    const double q_mid = d * d * d / 27.0 + d / 3.0;
    const double flux = q_mid * dev.gamma * dev.gamma / std::abs(dev.kerr);
    return is_bistable(dev, detuning_of(dev, f_p), flux);
  };
  double f_bi = cp.f_c * (1.0 - sig * 1e-3);   // inside the bistable side
  double f_mono = cp.f_c * (1.0 + sig * 1e-3); // monostable side
  if (!bistable_at(f_bi) || bistable_at(f_mono))
    throw NumericalError("verify_critical_point: onset bracket failed");
  while (std::abs(f_mono - f_bi) > 1e-12 * cp.f_c) {
    const double mid = 0.5 * (f_bi + f_mono);
    if (mid == f_bi || mid == f_mono) break;
    (bistable_at(mid) ? f_bi : f_mono) = mid;
  }
  check.f_c_numeric = 0.5 * (f_bi + f_mono);

  // Gain divergence scan just off the critical point.
  const double probe = default_probe_amp(dev);
  check.max_gain_db = -std::numeric_limits<double>::infinity();
  for (double eps : {3e-6, 1e-5, 3e-5, 1e-4}) {
    const double f_p = cp.f_c * (1.0 + sig * eps);
    const LmgPoint lp = lmg_point(dev, f_p, probe);
    if (lp.found && lp.gain_db > check.max_gain_db) {
      check.max_gain_db = lp.gain_db;
      check.gain_probe_f_ratio = 1.0 + sig * eps;
    }
  }
  check.diverges = check.max_gain_db > diverge_threshold_db;
  return check;
}

namespace {

// Golden-section maximization of fn on [lo, hi] to relative tolerance rel_tol.
template <class Fn>
double golden_max(Fn&& fn, double lo, double hi, double rel_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > rel_tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

LmgPoint lmg_point(const DeviceParams& dev, double f_p, double probe_amp, int n_theta) {
  const double delta = detuning_of(dev, f_p);
  if (!monostable_at_all_powers(dev, delta))
    throw DomainError("lmg: frequency on the bistable side of the critical point");

  const CriticalParams cp = critical_params(dev);
  auto gain_at = [&](double amp) {
    return direct_gain(make_operating_point(f_p, amp, dev), dev, probe_amp, n_theta);
  };

  // Coarse geometric scan brackets the single interior maximum.
  const int n_scan = 80;
  const double lo = 0.02 * cp.b_c, hi = 6.0 * cp.b_c;
  std::vector<double> amps(n_scan), gains(n_scan);
  const double ratio = std::pow(hi / lo, 1.0 / (n_scan - 1));
  int best = 0;
  for (int i = 0; i < n_scan; ++i) {
    amps[i] = lo * std::pow(ratio, i);
    gains[i] = gain_at(amps[i]);
    if (gains[i] > gains[best]) best = i;
  }

  LmgPoint lp;
  if (best == 0 || best == n_scan - 1) {
    lp.found = false;  // no interior maximum in range
    lp.op = make_operating_point(f_p, amps[best], dev);
    lp.gain_db = gains[best];
    return lp;
  }
  const double amp_star =
      golden_max(gain_at, amps[best - 1], amps[best + 1], kAmpRelTol);
  lp.op = make_operating_point(f_p, amp_star, dev);
  lp.gain_db = gain_at(amp_star);
  // First-order insensitivity: dG/dP from a 0.1% central difference in power,
  // reported as the gain change for a 1% power step.
  const double h = 1e-3;
  const double g_up = gain_at(amp_star * std::sqrt(1.0 + h));
  const double g_dn = gain_at(amp_star * std::sqrt(1.0 - h));
  lp.slope_db_per_pct = (g_up - g_dn) / (2.0 * h) * 0.01;
  lp.found = true;
  return lp;
}

std::vector<LmgPoint> lmg(const DeviceParams& dev, std::span<const double> f_p_hz,
                          double probe_amp, int n_theta) {
  std::vector<LmgPoint> out(f_p_hz.size());
  for (std::size_t i = 0; i < f_p_hz.size(); ++i)
    out[i] = lmg_point(dev, f_p_hz[i], probe_amp, n_theta);
  return out;
}

const char* to_string(ContourSide side) {
  switch (side) {
    case ContourSide::below_lmg: return "below_lmg";
    case ContourSide::on_lmg: return "on_lmg";
    case ContourSide::above_lmg: return "above_lmg";
  }
  return "unknown";
}

namespace {

// Bisection for gain == target on a monotone flank of the unimodal gain curve.
double bisect_gain(const DeviceParams& dev, double f_p, double target_db, double amp_lo,
                   double amp_hi, bool increasing, double probe_amp, int n_theta) {
  auto gain_at = [&](double amp) {
    return direct_gain(make_operating_point(f_p, amp, dev), dev, probe_amp, n_theta);
  };
  double lo = amp_lo, hi = amp_hi;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double g = gain_at(mid);
    if (std::abs(g - target_db) < kGainTolDb) return mid;
    const bool go_up = increasing ? (g < target_db) : (g > target_db);
    (go_up ? lo : hi) = mid;
    if (hi - lo < kAmpRelTol * mid) break;
  }
  return mid;
}

}  // namespace

double contour_amp(const DeviceParams& dev, double f_p, double target_gain_db,
                   ContourSide side, double probe_amp, int n_theta) {
  const LmgPoint lp = lmg_point(dev, f_p, probe_amp, n_theta);
  if (!lp.found)
    throw NumericalError("contour_amp: no interior gain maximum at this frequency");
  if (side == ContourSide::on_lmg) return lp.op.pump_amp;
  if (target_gain_db >= lp.gain_db)
    throw DomainError("contour_amp: target gain above the maximum at this frequency");

  const double amp_star = lp.op.pump_amp;
  if (side == ContourSide::below_lmg) {
    return bisect_gain(dev, f_p, target_gain_db, 1e-6 * amp_star, amp_star, true,
                       probe_amp, n_theta);
  }
  double hi = amp_star;
  auto gain_at = [&](double amp) {
    return direct_gain(make_operating_point(f_p, amp, dev), dev, probe_amp, n_theta);
  };
  for (int it = 0; it < 200 && gain_at(hi) > target_gain_db; ++it) hi *= 1.25;
  return bisect_gain(dev, f_p, target_gain_db, amp_star, hi, false, probe_amp, n_theta);
}

Contour iso_gain_contour(const DeviceParams& dev, double target_gain_db,
                         std::span<const double> f_p_hz, double probe_amp,
                         int n_theta) {
  Contour contour;
  contour.target_gain_db = target_gain_db;

  std::vector<double> freqs(f_p_hz.begin(), f_p_hz.end());
  std::sort(freqs.begin(), freqs.end());

  std::vector<ContourPoint> above;
  for (double f_p : freqs) {
    const LmgPoint lp = lmg_point(dev, f_p, probe_amp, n_theta);
    if (!lp.found || target_gain_db >= lp.gain_db) {
      std::ostringstream msg;
      msg << "iso_gain_contour: target " << target_gain_db
          << " dB not reachable at f_p = " << f_p << " Hz (max "
          << (lp.found ? lp.gain_db : std::nan("")) << " dB); frequency omitted";
      contour.warnings.push_back(msg.str());
      continue;
    }
    for (ContourSide side : {ContourSide::below_lmg, ContourSide::above_lmg}) {
      const double amp = contour_amp(dev, f_p, target_gain_db, side, probe_amp, n_theta);
      ContourPoint pt;
      pt.op = make_operating_point(f_p, amp, dev);
      pt.gain_db =
          direct_gain(pt.op, dev, probe_amp, n_theta);
      pt.side = side;
      (side == ContourSide::below_lmg ? contour.points : above).push_back(pt);
    }
  }
  // Close the loop: below branch ascending in f, above branch descending.
  contour.points.insert(contour.points.end(), above.rbegin(), above.rend());
  return contour;
}

Eigen::Matrix2d response_jacobian(const OperatingPoint& op, const DeviceParams& dev,
                                  double rel_step) {
  const double delta = detuning_of(dev, op.f_p);
  const double h = rel_step * critical_params(dev).b_c;
  const Phasor pump(op.pump_amp, 0.0);
  auto out = [&](const Phasor& s) { return steady_output(pump + s, delta, dev); };
  const Phasor dx = (out(Phasor(h, 0.0)) - out(Phasor(-h, 0.0))) / (2.0 * h);
  const Phasor dy = (out(Phasor(0.0, h)) - out(Phasor(0.0, -h))) / (2.0 * h);
  Eigen::Matrix2d j;
  j << dx.real(), dy.real(), dx.imag(), dy.imag();
  return j;
}

}  // namespace jpa
