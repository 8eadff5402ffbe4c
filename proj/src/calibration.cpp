#include "jpa/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jpa/errors.hpp"
#include "jpa/rng.hpp"

namespace jpa {

double thermal_occupancy(double t_kelvin, double omega) {
  if (!(t_kelvin > 0.0)) throw DomainError("thermal_occupancy: T must be positive");
  if (!(omega > 0.0)) throw DomainError("thermal_occupancy: omega must be positive");
  const double x = PhysConstants::hbar * omega / (PhysConstants::k_b * t_kelvin);
  if (x > 700.0) return 0.5;  // Bose factor underflows; quantum limit
  return 0.5 + 1.0 / std::expm1(x);
}

double chain_gain_from_noise(double p_out_w, double window_hz, double device_gain_db,
                             double omega) {
  if (!(p_out_w > 0.0) || !(window_hz > 0.0) || !(omega > 0.0))
    throw DomainError("chain_gain_from_noise: inputs must be positive");
  const double g_dev = ratio_from_db(device_gain_db);
  if (!(g_dev > 0.0)) throw DomainError("chain_gain_from_noise: zero device gain");
  return db_from_ratio(p_out_w / (PhysConstants::hbar * omega * window_hz * g_dev));
}

ValueWithSigma transport_loss(const ValueWithSigma& g_a_out_db,
                              const ValueWithSigma& g_s_out_db) {
  ValueWithSigma eta;
  eta.value = g_a_out_db.value - g_s_out_db.value;
  eta.sigma = std::hypot(g_a_out_db.sigma, g_s_out_db.sigma);
  return eta;
}

double input_attenuation_db(double p_probe_out_w, double p_probe_in_w,
                            double g_s_out_db) {
  if (!(p_probe_out_w > 0.0) || !(p_probe_in_w > 0.0))
    throw DomainError("input_attenuation: powers must be positive");
  return db_from_ratio(p_probe_out_w / p_probe_in_w) - g_s_out_db;
}

double noise_model_quanta(const NoiseModelParams& params, double t_vts,
                          double t_fridge) {
  const double s_in = thermal_occupancy(t_vts, params.omega);
  const double s_f = thermal_occupancy(t_fridge, params.omega);
  const double g = ratio_from_db(params.chain_gain_db);
  return g * (params.lambda * s_in + (1.0 - params.lambda) * s_f + params.n_add);
}

namespace {

// Internal fit parameters: g = y_scale exp(u0), lambda = logistic(u1),
// n_add = u2^2. The logistic keeps lambda inside [0,1] without clipping;
// u2^2 keeps n_add non-negative.
struct FitParams {
  double u0 = 0.0, u1 = 0.0, u2 = 0.0;
};

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

struct FitWorkspace {
  Eigen::VectorXd s_in, s_f, y;
  double y_scale = 1.0;
};

void fit_residual_jacobian(const FitWorkspace& w, const FitParams& p,
                           Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
  const double g = std::exp(p.u0);
  const double lam = logistic(p.u1);
  const double dlam = lam * (1.0 - lam);
  const double n_add = p.u2 * p.u2;
  const Eigen::Index m = w.y.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double bracket = lam * w.s_in[i] + (1.0 - lam) * w.s_f[i] + n_add;
    const double model = g * bracket;
    r[i] = model - w.y[i];
    jac(i, 0) = model;                              // d/du0
    jac(i, 1) = g * dlam * (w.s_in[i] - w.s_f[i]);  // d/du1
    jac(i, 2) = g * 2.0 * p.u2;                     // d/du2
  }
}

struct LmOutcome {
  FitParams p;
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
};

LmOutcome levenberg_marquardt(const FitWorkspace& w, FitParams p, int max_iterations) {
  const Eigen::Index m = w.y.size();
  Eigen::VectorXd r(m), r_try(m);
  Eigen::MatrixXd jac(m, 3), jac_try(m, 3);
  fit_residual_jacobian(w, p, r, jac);
  double cost = r.squaredNorm();
  double mu = 1e-3;
  LmOutcome out;

  int it = 0;
  for (; it < max_iterations; ++it) {
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d jtr = jac.transpose() * r;
    if (jtr.norm() < 1e-14 * std::max(1.0, std::sqrt(cost))) break;

    Eigen::Matrix3d damped = jtj;
    for (int d = 0; d < 3; ++d)
      damped(d, d) += mu * std::max(jtj(d, d), 1e-12);
    const Eigen::Vector3d step = damped.ldlt().solve(-jtr);
    if (!step.allFinite()) {
      mu *= 10.0;
      continue;
    }
    FitParams p_try{p.u0 + step[0], p.u1 + step[1], p.u2 + step[2]};
    // Keep the logistic argument in a range where it still moves in doubles.
    p_try.u1 = std::clamp(p_try.u1, -60.0, 60.0);
    fit_residual_jacobian(w, p_try, r_try, jac_try);
    const double cost_try = r_try.squaredNorm();
    if (cost_try < cost) {
      const double improvement = cost - cost_try;
      p = p_try;
      r.swap(r_try);
      jac.swap(jac_try);
      cost = cost_try;
      mu = std::max(mu * 0.3, 1e-12);
      if (step.norm() < 1e-13 * (1.0 + std::abs(p.u0) + std::abs(p.u1) + std::abs(p.u2)) ||
          improvement < 1e-24 * std::max(1.0, cost)) {
        ++it;
        break;
      }
    } else {
      mu *= 10.0;
      if (mu > 1e12) break;
    }
  }
  out.p = p;
  out.cost = cost;
  out.iterations = it;
  out.converged = it < max_iterations;
  return out;
}

}  // namespace

FitResult fit_added_noise(std::span<const NoiseSample> data, double omega,
                          const FitOptions& options) {
  if (data.size() < 3)
    throw DomainError("fit_added_noise: need at least 3 samples");
  if (!(omega > 0.0)) throw DomainError("fit_added_noise: omega must be positive");

  FitWorkspace w;
  const Eigen::Index m = static_cast<Eigen::Index>(data.size());
  w.s_in.resize(m);
  w.s_f.resize(m);
  w.y.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const NoiseSample& s = data[static_cast<std::size_t>(i)];
    if (!(s.psd_quanta > 0.0))
      throw DomainError("fit_added_noise: psd_out must be positive");
    w.s_in[i] = thermal_occupancy(s.t_vts, omega);
    w.s_f[i] = thermal_occupancy(s.t_fridge, omega);
    w.y[i] = s.psd_quanta;
  }
  // Fit in units of the median output so exp(u0) stays O(1).
  Eigen::VectorXd sorted = w.y;
  std::sort(sorted.begin(), sorted.end());
  w.y_scale = sorted[m / 2];
  w.y /= w.y_scale;

  // Initial guesses: slope of y vs S_in estimates g*lambda; a lambda prior
  // closes the system. Distinct fridge temperatures refine nothing here; the
  // optimizer does the rest.
  FitParams p0;
  if (options.init_chain_gain_db != 0.0 || options.init_lambda > 0.0 ||
      options.init_n_add > 0.0) {
    const double lam0 =
        std::clamp(options.init_lambda > 0.0 ? options.init_lambda : 0.75, 1e-9,
                   1.0 - 1e-9);
    const double g0 = options.init_chain_gain_db != 0.0
                          ? ratio_from_db(options.init_chain_gain_db) / w.y_scale
                          : 1.0;
    p0.u0 = std::log(std::max(g0, 1e-12));
    p0.u1 = std::log(lam0 / (1.0 - lam0));
    p0.u2 = std::sqrt(std::max(options.init_n_add, 1e-6));
  } else {
    const double mean_sin = w.s_in.mean();
    const double mean_y = w.y.mean();
    double cov = 0.0, var = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      cov += (w.s_in[i] - mean_sin) * (w.y[i] - mean_y);
      var += (w.s_in[i] - mean_sin) * (w.s_in[i] - mean_sin);
    }
    const double lam0 = 0.75;
    const double slope = var > 0.0 ? cov / var : mean_y / std::max(mean_sin, 0.5);
    const double g0 = std::max(slope / lam0, 1e-6);
    p0.u0 = std::log(g0);
    p0.u1 = std::log(lam0 / (1.0 - lam0));
    p0.u2 = std::sqrt(0.05);
  }

  LmOutcome best = levenberg_marquardt(w, p0, options.max_iterations);
  if (options.multi_start > 0) {
    Rng rng(0xca11b8a7edull);
    std::vector<LmOutcome> outcomes(static_cast<std::size_t>(options.multi_start));
    for (int s = 0; s < options.multi_start; ++s) {
      FitParams p = p0;
      p.u0 += rng.normal() * 0.5;
      p.u1 += rng.normal() * 1.0;
      p.u2 = std::abs(p.u2 + rng.normal() * 0.2);
      outcomes[static_cast<std::size_t>(s)] =
          levenberg_marquardt(w, p, options.max_iterations);
    }
    // Lowest residual wins; earlier start wins ties.
    for (const LmOutcome& o : outcomes)
      if (o.cost < best.cost) best = o;
  }

  if (!best.converged) {
    std::ostringstream msg;
    msg << "fit_added_noise: no convergence after " << best.iterations
        << " iterations, cost " << best.cost * w.y_scale * w.y_scale;
    throw NumericalError(msg.str());
  }

  FitResult fit;
  const double g = std::exp(best.p.u0) * w.y_scale;
  fit.lambda = logistic(best.p.u1);
  fit.n_add = best.p.u2 * best.p.u2;
  fit.chain_gain_db = db_from_ratio(g);
  fit.iterations = best.iterations;
  fit.converged = true;
  fit.residual_rms = std::sqrt(best.cost / static_cast<double>(m)) * w.y_scale;
  fit.boundary_flag = fit.lambda <= 1e-12 || fit.lambda >= 1.0 - 1e-12 ||
                      fit.n_add <= 1e-16;

  // Covariance of the natural parameters (g, lambda, n_add) by the delta
  // method from the internal coordinates.
  Eigen::VectorXd r(m);
  Eigen::MatrixXd jac(m, 3);
  fit_residual_jacobian(w, best.p, r, jac);
  const Eigen::Matrix3d jtj = jac.transpose() * jac;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(jtj);
  const double lam_min = eig.eigenvalues()[0];
  const double lam_max = eig.eigenvalues()[2];
  fit.condition_number =
      lam_min > 0.0 ? lam_max / lam_min : std::numeric_limits<double>::infinity();

  const Eigen::Index dof = m > 3 ? m - 3 : 1;
  const double sigma_sq = best.cost / static_cast<double>(dof);
  if (lam_min > lam_max * 1e-300) {
    const Eigen::Matrix3d cov_u = sigma_sq * jtj.inverse();
    Eigen::Matrix3d dnat = Eigen::Matrix3d::Zero();
    dnat(0, 0) = g;  // dg/du0, already in output units
    dnat(1, 1) = fit.lambda * (1.0 - fit.lambda);
    dnat(2, 2) = 2.0 * best.p.u2;
    fit.covariance = dnat * cov_u * dnat.transpose();
    fit.lambda_sigma = std::sqrt(std::max(fit.covariance(1, 1), 0.0));
    fit.n_add_sigma = std::sqrt(std::max(fit.covariance(2, 2), 0.0));
    const double g_sigma = std::sqrt(std::max(fit.covariance(0, 0), 0.0));
    fit.chain_gain_db_sigma = 10.0 / std::log(10.0) * g_sigma / g;
  } else {
    // Degenerate normal equations (e.g. a single fridge temperature at low
    // T_vts): the parameters are not identifiable.
    const double inf = std::numeric_limits<double>::infinity();
    fit.covariance = Eigen::Matrix3d::Constant(inf);
    fit.lambda_sigma = inf;
    fit.n_add_sigma = inf;
    fit.chain_gain_db_sigma = inf;
  }
  return fit;
}

std::vector<NoiseSample> synth_noise_data(const NoiseModelParams& params,
                                          std::span<const double> t_vts_grid,
                                          std::span<const double> t_fridge_values,
                                          std::uint64_t seed, double noise_frac) {
  if (!(params.omega > 0.0)) throw DomainError("synth_noise_data: omega must be positive");
  if (!(noise_frac >= 0.0)) throw DomainError("synth_noise_data: noise_frac must be >= 0");

  std::vector<NoiseSample> out;
  out.reserve(t_vts_grid.size() * t_fridge_values.size());
  Rng rng(seed);
  for (double t_f : t_fridge_values) {
    for (double t_vts : t_vts_grid) {
      NoiseSample s;
      s.t_vts = t_vts;
      s.t_fridge = t_f;
      const double clean = noise_model_quanta(params, t_vts, t_f);
      s.psd_quanta = clean * (1.0 + noise_frac * rng.normal());
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace jpa
