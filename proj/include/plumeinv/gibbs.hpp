#pragma once

#include <Eigen/Core>

#include "plumeinv/forward_model.hpp"
#include "plumeinv/rng.hpp"

namespace plumeinv {

/// Exact conjugate draw of the noise variance,
///   Inv-Gamma(n_obs/2 + a, b + sum((d - beta - A s)^2) / 2).
double gibbs_sigma2(int n_obs, double resid_sq_sum, const Priors& priors,
                    Rng& rng);

/// Exact conjugate draw of the per-sensor background. The background is
/// constant over time within a sensor, so each sensor contributes one
/// unknown with likelihood precision n_j / sigma2 and prior precision
/// 1 / var_j; `sensor_resid_sum` is sum_t (d_jt - m_jt) per sensor.
/// A zero prior variance pins beta_j to its prior mean exactly.
Eigen::VectorXd gibbs_beta(const Eigen::VectorXd& sensor_resid_sum,
                           const Eigen::VectorXd& counts, double sigma2,
                           const Priors& priors, Rng& rng);

/// Residual sum of squares at a given per-sensor background, assembled from
/// the per-sensor sufficient statistics of a forward evaluation.
double residual_sq_at_beta(const Eigen::VectorXd& sensor_resid_sq,
                           const Eigen::VectorXd& sensor_resid_sum,
                           const Eigen::VectorXd& counts,
                           const Eigen::VectorXd& beta_sensor);

/// Inverse-Gamma log density (for the joint posterior record).
double inv_gamma_logpdf(double x, double shape, double scale);

/// Full joint log posterior of (theta, sigma^2, beta) given the data, up to
/// the location-prior box normalization.
double log_posterior(const ModelContext& ctx, const Priors& priors,
                     const Eigen::VectorXd& theta, double sigma2,
                     const Eigen::VectorXd& beta_sensor);

}  // namespace plumeinv
