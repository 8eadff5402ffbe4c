#include "jpa/squeezing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jpa/parallel.hpp"
#include "jpa/rng.hpp"

namespace jpa {

LossChannel make_loss(double eta_db) {
  if (!(eta_db >= 0.0) || !std::isfinite(eta_db))
    throw DomainError("loss channel: eta_db must be finite and >= 0");
  return LossChannel{eta_db};
}

PhasorEnsemble vacuum_ensemble(int n_samples, std::uint64_t seed, double quanta_scale) {
  if (n_samples < 1000)
    throw DomainError("vacuum_ensemble: need n_samples >= 1000");
  if (!(quanta_scale > 0.0))
    throw DomainError("vacuum_ensemble: quanta_scale must be positive");

  PhasorEnsemble ens;
  ens.seed = seed;
  ens.quanta_scale = quanta_scale;
  ens.samples = Eigen::ArrayXcd(n_samples);
  Rng rng(seed);
  const double sigma = std::sqrt(quanta_scale / 4.0);
  for (int i = 0; i < n_samples; ++i) {
    double zx, zy;
    rng.normal_pair(zx, zy);
    ens.samples[i] = Phasor(sigma * zx, sigma * zy);
  }
  return ens;
}

PhasorEnsemble squeeze_state(const PhasorEnsemble& in, const OperatingPoint& sq_op,
                             const DeviceParams& dev) {
  const double delta = detuning_of(dev, sq_op.f_p);
  const SteadyState pump_ss =
      solve_photon_number(delta, dev, sq_op.pump_amp * sq_op.pump_amp);
  if (pump_ss.root_count > 1)
    throw BistableError("squeeze_state: bistable operating point");
  const Phasor b_p_out =
      steady_output_from_state(Phasor(sq_op.pump_amp, 0.0), dev.gamma, pump_ss);

  PhasorEnsemble out;
  out.seed = in.seed;
  out.quanta_scale = in.quanta_scale;
  out.samples = Eigen::ArrayXcd(in.samples.size());
  const Phasor pump(sq_op.pump_amp, 0.0);
  for (Eigen::Index i = 0; i < in.samples.size(); ++i)
    out.samples[i] = steady_output(pump + in.samples[i], delta, dev) - b_p_out;
  return out;
}

PhasorEnsemble squeeze_state_linearized(const PhasorEnsemble& in,
                                        const OperatingPoint& sq_op,
                                        const DeviceParams& dev) {
  const Eigen::Matrix2d j = response_jacobian(sq_op, dev);
  PhasorEnsemble out;
  out.seed = in.seed;
  out.quanta_scale = in.quanta_scale;
  out.samples = Eigen::ArrayXcd(in.samples.size());
  for (Eigen::Index i = 0; i < in.samples.size(); ++i) {
    const Eigen::Vector2d v =
        j * Eigen::Vector2d(in.samples[i].real(), in.samples[i].imag());
    out.samples[i] = Phasor(v.x(), v.y());
  }
  return out;
}

PhasorEnsemble ideal_squeeze(const PhasorEnsemble& in, double quad_gain_db,
                             double angle) {
  const double g = std::sqrt(ratio_from_db(quad_gain_db));
  const Phasor rot = std::polar(1.0, -angle);
  const Phasor unrot = std::polar(1.0, angle);
  PhasorEnsemble out;
  out.seed = in.seed;
  out.quanta_scale = in.quanta_scale;
  out.samples = Eigen::ArrayXcd(in.samples.size());
  for (Eigen::Index i = 0; i < in.samples.size(); ++i) {
    const Phasor s = in.samples[i] * rot;
    out.samples[i] = Phasor(s.real() / g, s.imag() * g) * unrot;
  }
  return out;
}

PhasorEnsemble apply_loss(const PhasorEnsemble& in, const LossChannel& loss,
                          std::uint64_t seed) {
  const double t = loss.transmissivity();
  const double sqrt_t = std::sqrt(t);
  const double sqrt_r = std::sqrt(1.0 - t);
  PhasorEnsemble out;
  out.seed = in.seed;
  out.quanta_scale = in.quanta_scale;
  out.samples = Eigen::ArrayXcd(in.samples.size());
  Rng rng(seed);
  const double sigma = std::sqrt(in.quanta_scale / 4.0);
  for (Eigen::Index i = 0; i < in.samples.size(); ++i) {
    double zx, zy;
    rng.normal_pair(zx, zy);
    out.samples[i] =
        sqrt_t * in.samples[i] + sqrt_r * Phasor(sigma * zx, sigma * zy);
  }
  return out;
}

namespace {

double major_axis_angle_of(const Eigen::Matrix2d& j) {
  const Eigen::Matrix2d cov = j * j.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const Eigen::Vector2d v = eig.eigenvectors().col(1);  // larger eigenvalue
  double angle = std::atan2(v.y(), v.x());
  if (angle < 0.0) angle += kPi;
  if (angle >= kPi) angle -= kPi;
  return angle;
}

// Amplified input direction and measured output axis of a full-JPA readout.
struct JpaReadoutFrame {
  double input_angle = 0.0;
  double output_angle = 0.0;
};

JpaReadoutFrame jpa_readout_frame(const AmpModel& amp) {
  const Eigen::Matrix2d j = response_jacobian(amp.op, *amp.device);
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
  JpaReadoutFrame frame;
  frame.input_angle = std::atan2(svd.matrixV()(1, 0), svd.matrixV()(0, 0));
  frame.output_angle = std::atan2(svd.matrixU()(1, 0), svd.matrixU()(0, 0));
  return frame;
}

}  // namespace

double squeezer_major_axis_angle(const OperatingPoint& sq_op, const DeviceParams& dev) {
  return major_axis_angle_of(response_jacobian(sq_op, dev));
}

Eigen::ArrayXd amp_readout(const PhasorEnsemble& in, const AmpModel& amp, double theta) {
  const Phasor rot = std::polar(1.0, theta + amp.pump_phase_offset);
  Eigen::ArrayXd out(in.samples.size());

  if (amp.kind == AmpKind::ideal_phase_sensitive) {
    const double sqrt_g = std::sqrt(ratio_from_db(amp.gain_db));
    for (Eigen::Index i = 0; i < in.samples.size(); ++i)
      out[i] = sqrt_g * (in.samples[i] * rot).real();
    return out;
  }

  if (!amp.device) throw DomainError("amp_readout: full_jpa model needs a device");
  const DeviceParams& dev = *amp.device;
  const double delta = detuning_of(dev, amp.op.f_p);
  const SteadyState pump_ss =
      solve_photon_number(delta, dev, amp.op.pump_amp * amp.op.pump_amp);
  if (pump_ss.root_count > 1)
    throw BistableError("amp_readout: bistable AMP operating point");
  const Phasor b_p_out =
      steady_output_from_state(Phasor(amp.op.pump_amp, 0.0), dev.gamma, pump_ss);
  const Phasor pump(amp.op.pump_amp, 0.0);
  const JpaReadoutFrame frame = jpa_readout_frame(amp);
  const Phasor meas = std::polar(1.0, -frame.output_angle);
  for (Eigen::Index i = 0; i < in.samples.size(); ++i) {
    const Phasor s = in.samples[i] * rot;
    const Phasor o = steady_output(pump + s, delta, dev) - b_p_out;
    out[i] = (o * meas).real();
  }
  return out;
}

namespace {

struct VarianceStats {
  double var = 0.0;
  double rel_se_sq = 0.0;  // Var(ln var) estimate, kurtosis-based
};

VarianceStats variance_stats(const Eigen::ArrayXd& x, double extra_var) {
  const Eigen::Index n = x.size();
  const double mean = x.mean();
  double m2 = 0.0, m4 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  VarianceStats st;
  st.var = m2 + extra_var;
  const double kurt_term = m2 > 0.0 ? std::max(m4 / (m2 * m2) - 1.0, 0.0) : 0.0;
  // The deterministic extra_var dilutes the relative error of the ratio.
  const double frac = m2 / st.var;
  st.rel_se_sq = frac * frac * kurt_term / n;
  return st;
}

}  // namespace

namespace {

// Readout alignment shared by the on and off branches: at theta = 0 the
// squeezer's amplified quadrature lands on the readout's amplified axis.
AmpModel resolve_amp_alignment(const OperatingPoint& sq_op, const DeviceParams& dev,
                               const AmpModel& amp, const SqueezeSettings& settings) {
  AmpModel amp_local = amp;
  if (!amp.auto_align) return amp_local;
  double sq_major;
  if (settings.squeezer == SqueezerKind::ideal)
    sq_major = kPi / 2.0;  // ideal_squeeze amplifies the y quadrature
  else
    sq_major = squeezer_major_axis_angle(sq_op, dev);
  double amp_input = 0.0;
  if (amp.kind == AmpKind::full_jpa) {
    if (!amp.device) throw DomainError("squeezing: full_jpa readout needs a device");
    amp_input = jpa_readout_frame(amp).input_angle;
  }
  amp_local.pump_phase_offset = amp.pump_phase_offset + amp_input - sq_major;
  amp_local.auto_align = false;
  return amp_local;
}

// One theta point of the matched-seed on/off pipeline.
void squeeze_pipeline_readout(const OperatingPoint& sq_op, const DeviceParams& dev,
                              const LossChannel& loss, const AmpModel& amp_resolved,
                              const SqueezeSettings& settings,
                              const OperatingPoint& off_op, double quanta_scale,
                              std::size_t k, Eigen::ArrayXd& x_on,
                              Eigen::ArrayXd& x_off, double& theta_out) {
  const double theta = kTwoPi * static_cast<double>(k) / settings.n_theta;
  const std::uint64_t seed_vac = derive_seed(settings.seed, 2 * k);
  const std::uint64_t seed_loss = derive_seed(settings.seed, 2 * k + 1);
  const PhasorEnsemble vac = vacuum_ensemble(settings.n_samples, seed_vac, quanta_scale);

  PhasorEnsemble on;
  switch (settings.squeezer) {
    case SqueezerKind::full_jpa: on = squeeze_state(vac, sq_op, dev); break;
    case SqueezerKind::linearized:
      on = squeeze_state_linearized(vac, sq_op, dev);
      break;
    case SqueezerKind::ideal:
      on = ideal_squeeze(vac, settings.ideal_squeeze_db, 0.0);
      break;
  }
  PhasorEnsemble off = squeeze_state(vac, off_op, dev);

  x_on = amp_readout(apply_loss(on, loss, seed_loss), amp_resolved, theta);
  x_off = amp_readout(apply_loss(off, loss, seed_loss), amp_resolved, theta);
  theta_out = theta;
}

}  // namespace

SqueezeResult squeezing_vs_theta(const OperatingPoint& sq_op, const DeviceParams& dev,
                                 const LossChannel& loss, const AmpModel& amp,
                                 const SqueezeSettings& settings) {
  if (settings.n_theta < 2) throw DomainError("squeezing_vs_theta: need n_theta >= 2");
  const double q =
      settings.quanta_scale > 0.0 ? settings.quanta_scale : dev.gamma / kPi;
  const AmpModel amp_local = resolve_amp_alignment(sq_op, dev, amp, settings);

  SqueezeResult result;
  result.sq_op = sq_op;
  result.theta = Eigen::ArrayXd(settings.n_theta);
  result.s_db = Eigen::ArrayXd(settings.n_theta);
  result.stderr_db = Eigen::ArrayXd(settings.n_theta);
  const double t = loss.transmissivity();
  result.loss_floor_db = t < 1.0 ? db_from_ratio(1.0 - t)
                                 : -std::numeric_limits<double>::infinity();

  const OperatingPoint off_op = make_operating_point(sq_op.f_p, 0.0, dev);
  const double extra_var = settings.n_hemt_quanta * q / 2.0;

  parallel_for(static_cast<std::size_t>(settings.n_theta), settings.threads,
               [&](std::size_t k) {
    Eigen::ArrayXd x_on, x_off;
    double theta = 0.0;
    squeeze_pipeline_readout(sq_op, dev, loss, amp_local, settings, off_op, q, k,
                             x_on, x_off, theta);
    const VarianceStats st_on = variance_stats(x_on, extra_var);
    const VarianceStats st_off = variance_stats(x_off, extra_var);
    result.theta[k] = theta;
    result.s_db[k] = db_from_ratio(st_on.var / st_off.var);
    result.stderr_db[k] = 10.0 / std::log(10.0) *
                          std::sqrt(st_on.rel_se_sq + st_off.rel_se_sq);
  });

  result.min_s_db = result.s_db.minCoeff();
  return result;
}

QuadratureHistogram squeeze_histogram(const OperatingPoint& sq_op,
                                      const DeviceParams& dev, const LossChannel& loss,
                                      const AmpModel& amp,
                                      const SqueezeSettings& settings, int n_bins) {
  if (n_bins < 2) throw DomainError("squeeze_histogram: need n_bins >= 2");
  const double q =
      settings.quanta_scale > 0.0 ? settings.quanta_scale : dev.gamma / kPi;
  const AmpModel amp_local = resolve_amp_alignment(sq_op, dev, amp, settings);
  const OperatingPoint off_op = make_operating_point(sq_op.f_p, 0.0, dev);

  QuadratureHistogram hist;
  hist.theta = Eigen::ArrayXd(settings.n_theta);
  hist.count_on.setZero(n_bins, settings.n_theta);
  hist.count_off.setZero(n_bins, settings.n_theta);

  // Bin range from the off-branch (unsqueezed, amplified) scale.
  const double sqrt_g = amp.kind == AmpKind::ideal_phase_sensitive
                            ? std::sqrt(ratio_from_db(amp.gain_db))
                            : 1.0;
  const double range = 5.0 * sqrt_g * std::sqrt(q / 4.0);
  hist.bin_centers = Eigen::ArrayXd(n_bins);
  const double width = 2.0 * range / n_bins;
  for (int b = 0; b < n_bins; ++b)
    hist.bin_centers[b] = -range + width * (b + 0.5);

  parallel_for(static_cast<std::size_t>(settings.n_theta), settings.threads,
               [&](std::size_t k) {
    Eigen::ArrayXd x_on, x_off;
    double theta = 0.0;
    squeeze_pipeline_readout(sq_op, dev, loss, amp_local, settings, off_op, q, k,
                             x_on, x_off, theta);
    hist.theta[k] = theta;
    auto bin_of = [&](double x) {
      const int b = static_cast<int>(std::floor((x + range) / width));
      return std::clamp(b, 0, n_bins - 1);
    };
    for (Eigen::Index i = 0; i < x_on.size(); ++i) {
      hist.count_on(bin_of(x_on[i]), k) += 1.0;
      hist.count_off(bin_of(x_off[i]), k) += 1.0;
    }
  });
  return hist;
}

std::vector<SqueezeResult> squeezing_vs_operating_point(
    std::span<const OperatingPoint> ops, const DeviceParams& dev,
    const LossChannel& loss, const AmpModel& amp, const SqueezeSettings& settings) {
  std::vector<SqueezeResult> out;
  out.reserve(ops.size());
  for (const OperatingPoint& op : ops)
    out.push_back(squeezing_vs_theta(op, dev, loss, amp, settings));
  return out;
}

}  // namespace jpa
