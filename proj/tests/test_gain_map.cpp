#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jpa/gain.hpp"
#include "jpa/parallel.hpp"
#include "jpa/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace jpa;

namespace {

double fig_f_p(const DeviceParams& dev, double delta_over_gamma = 1.54) {
  return (dev.omega0 - delta_over_gamma * dev.gamma) / kTwoPi;
}

}  // namespace

TEST_CASE("operating point normalization") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = critical_params(dev);
  const OperatingPoint op = make_operating_point(1.0015 * cp.f_c, 0.7 * cp.b_c, dev);
  CHECK(op.normalized.f_ratio == doctest::Approx(1.0015).epsilon(1e-12));
  const double expected_db =
      db_from_ratio(pump_power_w(op) / cp.p_c);
  CHECK(op.normalized.p_rel_db == doctest::Approx(expected_db).epsilon(1e-9));

  const OperatingPoint back =
      operating_point_from_normalized(op.normalized.f_ratio, op.normalized.p_rel_db, dev);
  CHECK(back.f_p == doctest::Approx(op.f_p).epsilon(1e-12));
  CHECK(back.pump_amp == doctest::Approx(op.pump_amp).epsilon(1e-9));

  CHECK_THROWS_AS(make_operating_point(-1.0, 1.0, dev), DomainError);
  CHECK_THROWS_AS(make_operating_point(7e9, -1.0, dev), DomainError);
}

TEST_CASE("direct gain preconditions") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = critical_params(dev);
  const OperatingPoint op = make_operating_point(fig_f_p(dev), 0.5 * cp.b_c, dev);
  CHECK_THROWS_AS(direct_gain(op, dev, default_probe_amp(dev), 4), DomainError);
  CHECK_THROWS_AS(direct_gain(op, dev, 0.0, 360), DomainError);
  CHECK_THROWS_AS(direct_gain(op, dev, cp.b_c, 360), DomainError);  // probe > pump

  // Bistable pump is a flagged error: drive mid-window on the bistable side.
  const double d = 2.2;
  const double q_mid = d * d * d / 27.0 + d / 3.0;
  const double amp = std::sqrt(q_mid * dev.gamma * dev.gamma / std::abs(dev.kerr));
  const OperatingPoint bad =
      make_operating_point(fig_f_p(dev, 2.2), amp, dev);
  CHECK_THROWS_AS(direct_gain(bad, dev, default_probe_amp(dev), 360), BistableError);
}

TEST_CASE("zero pump gives 0 dB") {
  const DeviceParams dev = fig_device();
  const OperatingPoint op = make_operating_point(fig_f_p(dev), 0.0, dev);
  CHECK(std::abs(direct_gain(op, dev, default_probe_amp(dev), 360)) < 1e-10);
}

TEST_CASE("gain curve is unimodal with a single interior maximum") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = critical_params(dev);
  const double f_p = fig_f_p(dev);
  const double probe = default_probe_amp(dev);
  std::vector<double> gains;
  for (int i = 1; i <= 100; ++i) {
    const double amp = cp.b_c * 1.3 * i / 100.0;
    gains.push_back(direct_gain(make_operating_point(f_p, amp, dev), dev, probe, 180));
  }
  int sign_changes = 0;
  for (std::size_t i = 2; i < gains.size(); ++i) {
    const bool was_rising = gains[i - 1] > gains[i - 2];
    const bool is_rising = gains[i] > gains[i - 1];
    if (was_rising && !is_rising) ++sign_changes;
  }
  CHECK(sign_changes == 1);
  const double g_max = *std::max_element(gains.begin(), gains.end());
  CHECK(g_max > gains.front());
  CHECK(g_max > gains.back());
}

TEST_CASE("weak-probe gain matches the finite-difference Jacobian") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = critical_params(dev);
  const double f_p = fig_f_p(dev);
  for (double target : {3.0, 6.0, 9.0}) {
    const double amp =
        contour_amp(dev, f_p, target, ContourSide::below_lmg, default_probe_amp(dev));
    const OperatingPoint op = make_operating_point(f_p, amp, dev);
    const Eigen::Matrix2d j = oracle::fd_jacobian(op, dev, 2e-7 * cp.b_c);
    const double mean_g = (j * j.transpose()).trace() / 2.0;
    const double g_lin = db_from_ratio((mean_g + 1.0) / 2.0);
    const double g_probe = direct_gain(op, dev, 1e-6 * cp.b_c, 360);
    CHECK(g_probe == doctest::Approx(g_lin).epsilon(1e-6));
    CHECK(std::abs(g_probe - g_lin) < 0.01);
  }
}

TEST_CASE("gain is probe-independent below the default probe amplitude") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = critical_params(dev);
  const OperatingPoint op = make_operating_point(fig_f_p(dev), 0.9 * cp.b_c, dev);
  const double g4 = direct_gain(op, dev, 1e-4 * cp.b_c, 360);
  const double g5 = direct_gain(op, dev, 1e-5 * cp.b_c, 360);
  CHECK(std::abs(g4 - g5) < 1e-3);
}

TEST_CASE("gain positivity for monostable operating points") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = critical_params(dev);
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double d = 0.2 + 1.5 * rng.uniform();
    const double amp = cp.b_c * (0.05 + 1.2 * rng.uniform());
    const OperatingPoint op = make_operating_point(fig_f_p(dev, d), amp, dev);
    CHECK(direct_gain(op, dev, 1e-5 * cp.b_c, 90) > -1e-9);
  }
}

TEST_CASE("gain map grid and masking") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = critical_params(dev);
  const double probe = default_probe_amp(dev);

  SUBCASE("empty grid rejected") {
    CHECK_THROWS_AS(
        gain_map(dev, {cp.f_c, cp.f_c * 1.001, 0}, {-3.0, 0.0, 5}, probe, 90),
        DomainError);
  }

  SUBCASE("single cell matches direct_gain") {
    const FreqGrid f{1.0015 * cp.f_c, 1.0015 * cp.f_c, 1};
    const PowerGridDb p{-1.0, -1.0, 1};
    const GainMap map = gain_map(dev, f, p, probe, 180);
    REQUIRE(map.gain_db.rows() == 1);
    REQUIRE(map.gain_db.cols() == 1);
    const double amp = std::sqrt(watt_to_flux(map.p_p[0], kTwoPi * map.f_p[0]));
    const double expected =
        direct_gain(make_operating_point(map.f_p[0], amp, dev), dev, probe, 180);
    CHECK(map.gain_db(0, 0) == expected);
  }

  SUBCASE("bistable cells masked, monostable finite") {
    const FreqGrid f{0.999 * cp.f_c, 1.003 * cp.f_c, 9};
    const PowerGridDb p{-4.0, 2.0, 9};
    const GainMap map = gain_map(dev, f, p, probe, 90, 2);
    bool any_masked = false;
    for (Eigen::Index j = 0; j < map.p_p.size(); ++j) {
      for (Eigen::Index k = 0; k < map.f_p.size(); ++k) {
        if (map.bistable(j, k)) {
          any_masked = true;
          CHECK(std::isnan(map.gain_db(j, k)));
        } else {
          CHECK(std::isfinite(map.gain_db(j, k)));
        }
      }
    }
    CHECK(any_masked);  // grid spans the bistable side
    // Grids strictly monotone.
    for (Eigen::Index k = 1; k < map.f_p.size(); ++k) CHECK(map.f_p[k] > map.f_p[k - 1]);
    for (Eigen::Index j = 1; j < map.p_p.size(); ++j) CHECK(map.p_p[j] > map.p_p[j - 1]);
  }

  SUBCASE("parallel map bit-identical to sequential") {
    const FreqGrid f{1.0005 * cp.f_c, 1.002 * cp.f_c, 7};
    const PowerGridDb p{-3.0, 1.0, 7};
    const GainMap seq = gain_map(dev, f, p, probe, 90, 1);
    const GainMap par = gain_map(dev, f, p, probe, 90, 4);
    for (Eigen::Index j = 0; j < seq.p_p.size(); ++j)
      for (Eigen::Index k = 0; k < seq.f_p.size(); ++k) {
        if (seq.bistable(j, k)) {
          CHECK(par.bistable(j, k));
        } else {
          CHECK(seq.gain_db(j, k) == par.gain_db(j, k));
        }
      }
  }
}

TEST_CASE("gain map mirror symmetry under K -> -K, Delta -> -Delta") {
  const double gamma = kTwoPi * 54.5e6;
  const double omega0 = 130.0 * gamma;
  const DeviceParams dev_n = make_device(omega0, gamma, -8.3e-4 * gamma);
  const DeviceParams dev_p = make_device(omega0, gamma, +8.3e-4 * gamma);
  const CriticalParams cp_n = critical_params(dev_n);
  const double probe = default_probe_amp(dev_n);
  for (double d : {0.4, 0.9, 1.5}) {
    for (double amp_rel : {0.3, 0.8, 1.1}) {
      const double f_n = (omega0 - d * gamma) / kTwoPi;
      const double f_m = (omega0 + d * gamma) / kTwoPi;
      const double amp = amp_rel * cp_n.b_c;
      const double g_n =
          direct_gain(make_operating_point(f_n, amp, dev_n), dev_n, probe, 90);
      const double g_m =
          direct_gain(make_operating_point(f_m, amp, dev_p), dev_p, probe, 90);
      CHECK(g_n == doctest::Approx(g_m).epsilon(1e-9));
    }
  }
}

TEST_CASE("gain exceeds 20 dB near the critical point") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = critical_params(dev);
  const FreqGrid f{1.00002 * cp.f_c, 1.0006 * cp.f_c, 11};
  const PowerGridDb p{-1.0, 0.5, 11};
  const GainMap map = gain_map(dev, f, p, default_probe_amp(dev), 180, 2);
  double max_gain = -1e300;
  for (Eigen::Index j = 0; j < map.p_p.size(); ++j)
    for (Eigen::Index k = 0; k < map.f_p.size(); ++k)
      if (!map.bistable(j, k)) max_gain = std::max(max_gain, map.gain_db(j, k));
  CHECK(max_gain > 20.0);
}

TEST_CASE("critical point verification") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = locate_critical_point(dev);
  const CriticalPointCheck check = verify_critical_point(dev);

  CHECK(check.f_c_numeric == doctest::Approx(cp.f_c).epsilon(1e-6));
  CHECK(check.diverges);
  CHECK(check.max_gain_db > 40.0);

  // dBm <-> W round trip of the critical power.
  CHECK(dbm_to_watt(watt_to_dbm(cp.p_c)) == doctest::Approx(cp.p_c).epsilon(1e-12));

  // Device-plane vs generator-plane bookkeeping: the generator must supply
  // the device-plane power minus the (negative) input attenuation.
  const double a_in_db = -81.4;
  const double generator_dbm = watt_to_dbm(cp.p_c) - a_in_db;
  CHECK(generator_dbm - watt_to_dbm(cp.p_c) == doctest::Approx(81.4).epsilon(1e-12));
}

TEST_CASE("line of maximum gain") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = critical_params(dev);
  const double probe = default_probe_amp(dev);

  SUBCASE("bistable-side frequency rejected") {
    CHECK_THROWS_AS(lmg_point(dev, 0.998 * cp.f_c, probe), DomainError);
  }

  SUBCASE("maximum property and first-order insensitivity") {
    const LmgPoint lp = lmg_point(dev, fig_f_p(dev), probe);
    REQUIRE(lp.found);
    const double amp = lp.op.pump_amp;
    const double g0 = direct_gain(lp.op, dev, probe);
    for (double factor : {0.99, 1.01}) {
      const OperatingPoint nb = make_operating_point(lp.op.f_p, amp * factor, dev);
      CHECK(g0 > direct_gain(nb, dev, probe));
    }
    CHECK(std::abs(lp.slope_db_per_pct) < 0.01);
  }

  SUBCASE("LMG pump amplitude grows with pump detuning, toward b_c at f_c") {
    const std::vector<double> freqs =
        linspace(1.0008 * cp.f_c, 1.004 * cp.f_c, 5);
    const std::vector<LmgPoint> points = lmg(dev, freqs, probe, 180);
    // Coarse-scan oracle: recompute each maximum from a dense grid.
    for (const LmgPoint& lp : points) {
      REQUIRE(lp.found);
      double best_amp = 0.0, best_gain = -1e300;
      for (int i = 1; i <= 400; ++i) {
        const double amp = cp.b_c * 2.0 * i / 400.0;
        const double g =
            direct_gain(make_operating_point(lp.op.f_p, amp, dev), dev, probe, 180);
        if (g > best_gain) {
          best_gain = g;
          best_amp = amp;
        }
      }
      CHECK(lp.op.pump_amp == doctest::Approx(best_amp).epsilon(2.0 / 400.0 * 1.5));
    }
    // The LMG terminates at the critical point, so its amplitude rises
    // monotonically in Delta = omega0 - omega_p, i.e. as f_p descends to f_c.
    for (std::size_t i = 1; i < points.size(); ++i)
      CHECK(points[i].op.pump_amp < points[i - 1].op.pump_amp);
    CHECK(points.front().op.pump_amp < cp.b_c);
  }
}

TEST_CASE("iso-gain contour") {
  const DeviceParams dev = fig_device();
  const CriticalParams cp = critical_params(dev);
  const double probe = default_probe_amp(dev);
  const std::vector<double> freqs = linspace(1.0006 * cp.f_c, 1.003 * cp.f_c, 7);
  const Contour contour = iso_gain_contour(dev, 8.0, freqs, probe, 360);
  REQUIRE(contour.points.size() == 14);
  CHECK(contour.warnings.empty());

  SUBCASE("recomputed gain within 0.05 dB of target") {
    for (const ContourPoint& pt : contour.points) {
      const double g = direct_gain(pt.op, dev, probe, 360);
      CHECK(std::abs(g - 8.0) < 0.05);
    }
  }

  SUBCASE("above branch has strictly larger pump amplitude") {
    // Points are ordered below (f ascending) then above (f descending); the
    // same-frequency partner of below[i] is point[13 - i].
    for (int i = 0; i < 7; ++i) {
      const ContourPoint& below = contour.points[i];
      const ContourPoint& above = contour.points[13 - i];
      CHECK(below.side == ContourSide::below_lmg);
      CHECK(above.side == ContourSide::above_lmg);
      CHECK(below.op.f_p == doctest::Approx(above.op.f_p).epsilon(1e-12));
      CHECK(above.op.pump_amp > below.op.pump_amp);
      // Side labels consistent with the LMG amplitude.
      const LmgPoint lp = lmg_point(dev, below.op.f_p, probe);
      CHECK(below.op.pump_amp < lp.op.pump_amp);
      CHECK(above.op.pump_amp > lp.op.pump_amp);
    }
  }

  SUBCASE("branches converge where the target meets the maximum gain") {
    // Pick the frequency where the LMG gain just exceeds the target; the two
    // branch amplitudes must pinch together.
    double f_hi = 1.02 * cp.f_c;
    double g_hi = lmg_point(dev, f_hi, probe, 180).gain_db;
    REQUIRE(g_hi < 8.0);
    double f_lo = 1.003 * cp.f_c;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (f_lo + f_hi);
      (lmg_point(dev, mid, probe, 180).gain_db > 8.0 ? f_lo : f_hi) = mid;
    }
    const double f_edge = f_lo;  // max gain slightly above 8 dB here
    const double below = contour_amp(dev, f_edge, 8.0, ContourSide::below_lmg, probe, 180);
    const double above = contour_amp(dev, f_edge, 8.0, ContourSide::above_lmg, probe, 180);
    CHECK((above - below) / above < 0.02);
  }

  SUBCASE("unreachable target omitted with warning") {
    const std::vector<double> far = {1.05 * cp.f_c};  // max gain < 8 dB there
    const Contour c2 = iso_gain_contour(dev, 8.0, far, probe, 90);
    CHECK(c2.points.empty());
    CHECK(c2.warnings.size() == 1);
  }

  SUBCASE("LMG consistency with gain-map column maxima") {
    const double f_col = 1.0015 * cp.f_c;
    const LmgPoint lp = lmg_point(dev, f_col, probe, 180);
    const PowerGridDb p{lp.op.normalized.p_rel_db - 0.5,
                        lp.op.normalized.p_rel_db + 0.5, 41};
    const GainMap map = gain_map(dev, {f_col, f_col, 1}, p, probe, 180);
    Eigen::Index argmax = 0;
    map.gain_db.col(0).maxCoeff(&argmax);
    // Column maximum within one grid cell of the lmg power.
    const double cell_db = 1.0 / 40.0;
    const double argmax_db = db_from_ratio(map.p_p[argmax] / cp.p_c);
    CHECK(std::abs(argmax_db - lp.op.normalized.p_rel_db) < 1.5 * cell_db);
  }
}
