#include "plumeinv/mmala.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace plumeinv {

Metric Metric::from_hessian(const MatrixXd& hess, double eps) {
  Metric m;
  const int n = static_cast<int>(hess.rows());
  if (n == 0 || !hess.allFinite()) {
    m.identity_fallback = true;
    m.eigvecs = MatrixXd::Identity(std::max(n, 1), std::max(n, 1));
    m.eigvals = VectorXd::Ones(std::max(n, 1));
    return m;
  }

  const MatrixXd neg = -0.5 * (hess + hess.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(neg);
  if (solver.info() != Eigen::Success) {
    m.identity_fallback = true;
    m.eigvecs = MatrixXd::Identity(n, n);
    m.eigvals = VectorXd::Ones(n);
    return m;
  }
  m.eigvecs = solver.eigenvectors();
  m.eigvals = solver.eigenvalues().cwiseMax(eps);
  if (!m.eigvals.allFinite()) {
    m.identity_fallback = true;
    m.eigvecs = MatrixXd::Identity(n, n);
    m.eigvals = VectorXd::Ones(n);
  }
  return m;
}

VectorXd Metric::apply_inverse(const VectorXd& v) const {
  return eigvecs * (eigvecs.transpose() * v).cwiseQuotient(eigvals);
}

VectorXd Metric::sample(double zeta, Rng& rng) const {
  VectorXd z(dim());
  for (int i = 0; i < dim(); ++i) z[i] = rng.normal();
  return std::sqrt(zeta) * (eigvecs * z.cwiseQuotient(eigvals.cwiseSqrt()));
}

double Metric::log_density(const VectorXd& dev, double zeta) const {
  const VectorXd w = eigvecs.transpose() * dev;
  const double quad = w.cwiseProduct(w).dot(eigvals) / zeta;
  const double logdet_inv =
      dim() * std::log(zeta) - eigvals.array().log().sum();
  return -0.5 * (dim() * std::log(2.0 * M_PI) + logdet_inv + quad);
}

StepResult mmala_step(const TargetFn& target, const VectorXd& theta,
                      const TargetEval& current, double zeta, Rng& rng,
                      const MmalaOptions& opt) {
  StepResult out;
  out.theta = theta;
  out.eval = current;

  const Metric g = Metric::from_hessian(current.hess, opt.metric_eps);
  out.used_identity_metric = g.identity_fallback;

  const VectorXd mean = theta + 0.5 * zeta * g.apply_inverse(current.grad);
  const VectorXd deviation = g.sample(zeta, rng);
  const VectorXd proposal = mean + deviation;
  const double log_u = std::log(1.0 - rng.uniform());  // (0, 1]

  const TargetEval prop_eval = target(proposal);
  if (!std::isfinite(prop_eval.logp)) return out;  // auto-reject

  const Metric g_prop = Metric::from_hessian(prop_eval.hess, opt.metric_eps);
  out.used_identity_metric |= g_prop.identity_fallback;
  const VectorXd mean_rev =
      proposal + 0.5 * zeta * g_prop.apply_inverse(prop_eval.grad);

  const double log_q_fwd = g.log_density(proposal - mean, zeta);
  const double log_q_rev = g_prop.log_density(theta - mean_rev, zeta);
  const double log_alpha =
      (prop_eval.logp + log_q_rev) - (current.logp + log_q_fwd);
  if (!std::isfinite(log_alpha)) return out;

  if (log_u < log_alpha) {
    out.theta = proposal;
    out.eval = prop_eval;
    out.accepted = true;
  }
  return out;
}

double adapt_step_size(double zeta, double acceptance_rate, int window_index,
                       double target_accept) {
  const double gain = 1.0 / std::sqrt(static_cast<double>(window_index) + 1.0);
  return zeta * std::exp(gain * (acceptance_rate - target_accept));
}

}  // namespace plumeinv
