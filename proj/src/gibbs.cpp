#include "plumeinv/gibbs.hpp"

#include <cmath>

namespace plumeinv {

double gibbs_sigma2(int n_obs, double resid_sq_sum, const Priors& priors,
                    Rng& rng) {
  if (!std::isfinite(resid_sq_sum) || resid_sq_sum < 0.0)
    throw std::invalid_argument("gibbs_sigma2: bad residual sum of squares");
  const double shape = 0.5 * static_cast<double>(n_obs) + priors.sigma2_shape;
  const double scale = priors.sigma2_scale + 0.5 * resid_sq_sum;
  return rng.inverse_gamma(shape, scale);
}

Eigen::VectorXd gibbs_beta(const Eigen::VectorXd& sensor_resid_sum,
                           const Eigen::VectorXd& counts, double sigma2,
                           const Priors& priors, Rng& rng) {
  const int n_sns = static_cast<int>(sensor_resid_sum.size());
  if (priors.beta_mean.size() != n_sns || priors.beta_var.size() != n_sns)
    throw std::invalid_argument("gibbs_beta: prior size mismatch");

  Eigen::VectorXd beta(n_sns);
  for (int j = 0; j < n_sns; ++j) {
    const double var_j = priors.beta_var[j];
    if (var_j == 0.0) {  // dogmatic prior
      beta[j] = priors.beta_mean[j];
      continue;
    }
    const double precision = counts[j] / sigma2 + 1.0 / var_j;
    const double mean =
        (sensor_resid_sum[j] / sigma2 + priors.beta_mean[j] / var_j) / precision;
    beta[j] = rng.normal(mean, std::sqrt(1.0 / precision));
  }
  return beta;
}

double residual_sq_at_beta(const Eigen::VectorXd& sensor_resid_sq,
                           const Eigen::VectorXd& sensor_resid_sum,
                           const Eigen::VectorXd& counts,
                           const Eigen::VectorXd& beta_sensor) {
  double out = 0.0;
  for (int j = 0; j < sensor_resid_sq.size(); ++j) {
    const double b = beta_sensor[j];
    out += sensor_resid_sq[j] - 2.0 * b * sensor_resid_sum[j] + counts[j] * b * b;
  }
  return out;
}

double inv_gamma_logpdf(double x, double shape, double scale) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(scale) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - scale / x;
}

double log_posterior(const ModelContext& ctx, const Priors& priors,
                     const Eigen::VectorXd& theta, double sigma2,
                     const Eigen::VectorXd& beta_sensor) {
  const TargetEval ev =
      eval_theta(ctx, priors, theta, sigma2, beta_sensor, false);
  if (!std::isfinite(ev.logp)) return ev.logp;

  double lp = ev.logp;
  lp += inv_gamma_logpdf(sigma2, priors.sigma2_shape, priors.sigma2_scale);
  for (int j = 0; j < beta_sensor.size(); ++j) {
    const double var_j = priors.beta_var[j];
    if (var_j > 0.0) {
      const double z = (beta_sensor[j] - priors.beta_mean[j]);
      lp += -0.5 * z * z / var_j - 0.5 * std::log(2.0 * M_PI * var_j);
    }
  }
  return lp;
}

}  // namespace plumeinv
