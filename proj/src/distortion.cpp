#include "jpa/distortion.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "jpa/parallel.hpp"

namespace jpa {

PhasorSweep phasor_sweep(const OperatingPoint& op, const DeviceParams& dev,
                         double probe_amp, int n_theta) {
  if (n_theta < 3) throw DomainError("phasor_sweep: need n_theta >= 3");
  if (!(probe_amp >= 0.0)) throw DomainError("phasor_sweep: probe_amp must be >= 0");

  const double delta = detuning_of(dev, op.f_p);
  const SteadyState pump_ss =
      solve_photon_number(delta, dev, op.pump_amp * op.pump_amp);
  if (pump_ss.root_count > 1)
    throw BistableError("phasor_sweep: bistable operating point");
  const Phasor b_p_out =
      steady_output_from_state(Phasor(op.pump_amp, 0.0), dev.gamma, pump_ss);

  PhasorSweep sweep;
  sweep.op = op;
  sweep.theta = Eigen::ArrayXd(n_theta);
  sweep.input = Eigen::ArrayXcd(n_theta);
  sweep.output = Eigen::ArrayXcd(n_theta);
  const double step = kTwoPi / n_theta;
  for (int k = 0; k < n_theta; ++k) {
    const double theta = step * k;
    const Phasor s(probe_amp * std::cos(theta), probe_amp * std::sin(theta));
    sweep.theta[k] = theta;
    sweep.input[k] = s;
    try {
      sweep.output[k] = steady_output(Phasor(op.pump_amp, 0.0) + s, delta, dev) - b_p_out;
    } catch (const NumericalError& err) {
      std::ostringstream msg;
      msg << "phasor_sweep: solver failed at theta = " << theta << ": " << err.what();
      throw NumericalError(msg.str());
    }
  }
  return sweep;
}

QuadratureFrame principal_axes(const Eigen::ArrayXcd& points) {
  const auto n = points.size();
  if (n < 3) throw DomainError("principal_axes: need at least 3 points");

  const Phasor mean = points.mean();
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = points[i].real() - mean.real();
    const double y = points[i].imag() - mean.imag();
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  Eigen::Matrix2d cov;
  cov << sxx / n, sxy / n, sxy / n, syy / n;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const double lam_min = eig.eigenvalues()[0];
  const double lam_maj = eig.eigenvalues()[1];
  if (!(lam_maj > 0.0))
    throw DomainError("principal_axes: degenerate point cloud");

  QuadratureFrame frame;
  frame.sigma_min = std::sqrt(std::max(lam_min, 0.0));
  frame.sigma_maj = std::sqrt(lam_maj);
  frame.isotropic = (lam_maj - lam_min) <= 1e-9 * lam_maj;
  const Eigen::Vector2d v = eig.eigenvectors().col(0);  // deamplified axis
  double angle = std::atan2(v.y(), v.x());
  if (angle < 0.0) angle += kPi;
  if (angle >= kPi) angle -= kPi;
  frame.angle = angle;
  return frame;
}

namespace {

double projected_variance(const Eigen::ArrayXcd& points, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  double sum = 0.0, sum_sq = 0.0;
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    const double p = points[i].real() * c + points[i].imag() * s;
    sum += p;
    sum_sq += p * p;
  }
  const double m = sum / points.size();
  return sum_sq / points.size() - m * m;
}

}  // namespace

DeampResult deamp_ratio(const OperatingPoint& op, const DeviceParams& dev,
                        double probe_amp, int n_theta) {
  if (!(probe_amp > 0.0)) throw DomainError("deamp_ratio: probe_amp must be positive");
  const PhasorSweep sweep = phasor_sweep(op, dev, probe_amp, n_theta);
  const QuadratureFrame frame = principal_axes(sweep.output);

  // Output variance along the deamplified axis is the smaller eigenvalue;
  // the input circle projects to probe_amp^2 / 2 on any axis.
  const double var_out = frame.sigma_min * frame.sigma_min;
  const double var_in = projected_variance(sweep.input, frame.angle);

  DeampResult result;
  result.ratio_db = db_from_ratio(var_out / var_in);
  result.op = op;
  result.gain_db = direct_gain(op, dev, default_probe_amp(dev), n_theta);
  return result;
}

std::vector<DeampResult> scan_deamp_along_contour(const Contour& contour,
                                                  const DeviceParams& dev,
                                                  double probe_amp, int n_theta,
                                                  unsigned threads) {
  std::vector<DeampResult> results(contour.points.size());
  parallel_for(contour.points.size(), threads, [&](std::size_t i) {
    results[i] = deamp_ratio(contour.points[i].op, dev, probe_amp, n_theta);
  });
  return results;
}

OptimalPointResult optimal_point(const DeviceParams& dev,
                                 std::span<const double> gain_targets_db,
                                 std::span<const double> f_p_hz, double probe_amp,
                                 int n_theta) {
  if (gain_targets_db.empty() || f_p_hz.empty())
    throw DomainError("optimal_point: empty targets or frequency grid");

  const double weak_probe = default_probe_amp(dev);
  OptimalPointResult best;
  best.result.ratio_db = std::numeric_limits<double>::infinity();
  bool feasible = false;

  for (double target : gain_targets_db) {
    const Contour contour = iso_gain_contour(dev, target, f_p_hz, weak_probe, n_theta);
    if (contour.points.empty()) continue;
    const std::vector<DeampResult> scan =
        scan_deamp_along_contour(contour, dev, probe_amp, n_theta);
    for (std::size_t i = 0; i < scan.size(); ++i) {
      if (scan[i].ratio_db < best.result.ratio_db) {
        best.result = scan[i];
        best.op = scan[i].op;
        best.gain_target_db = target;
        best.side = contour.points[i].side;
        feasible = true;
      }
    }
  }
  if (!feasible) throw DomainError("optimal_point: no feasible operating point");

  // Local refinement in frequency along the winning branch.
  auto ratio_at = [&](double f_p) {
    const double amp =
        contour_amp(dev, f_p, best.gain_target_db, best.side, weak_probe, n_theta);
    return deamp_ratio(make_operating_point(f_p, amp, dev), dev, probe_amp, n_theta);
  };
  double f_lo = best.op.f_p, f_hi = best.op.f_p;
  for (double f : f_p_hz) {
    if (f < f_lo) f_lo = f;
    if (f > f_hi) f_hi = f;
  }
  const double df = (f_hi - f_lo) / std::max<std::size_t>(f_p_hz.size() - 1, 1);
  double a = std::max(f_lo, best.op.f_p - df);
  double b = std::min(f_hi, best.op.f_p + df);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  DeampResult rc = ratio_at(c), rd = ratio_at(d);
  for (int it = 0; it < 40 && (b - a) > 1e-9 * best.op.f_p; ++it) {
    if (rc.ratio_db < rd.ratio_db) {
      b = d;
      d = c;
      rd = rc;
      c = b - inv_phi * (b - a);
      rc = ratio_at(c);
    } else {
      a = c;
      c = d;
      rc = rd;
      d = a + inv_phi * (b - a);
      rd = ratio_at(d);
    }
  }
  const DeampResult refined = rc.ratio_db < rd.ratio_db ? rc : rd;
  if (refined.ratio_db < best.result.ratio_db) {
    best.result = refined;
    best.op = refined.op;
  }
  return best;
}

double projection_harmonic_ratio(const PhasorSweep& sweep, double axis_angle,
                                 int harmonic) {
  if (harmonic < 1) throw DomainError("projection_harmonic_ratio: harmonic >= 1");
  const Eigen::Index n = sweep.theta.size();
  const double c = std::cos(axis_angle), s = std::sin(axis_angle);
  Phasor x1(0.0, 0.0), xh(0.0, 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double p = sweep.output[k].real() * c + sweep.output[k].imag() * s;
    x1 += p * std::polar(1.0, -sweep.theta[k]);
    xh += p * std::polar(1.0, -harmonic * sweep.theta[k]);
  }
  return std::abs(xh) / std::abs(x1);
}

}  // namespace jpa
