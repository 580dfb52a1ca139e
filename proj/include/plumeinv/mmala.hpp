#pragma once

#include <Eigen/Core>
#include <functional>

#include "plumeinv/forward_model.hpp"
#include "plumeinv/rng.hpp"

namespace plumeinv {

using TargetFn = std::function<TargetEval(const VectorXd&)>;

/// Position metric G for the manifold proposal: the negative Hessian of the
/// log target with eigenvalues clamped below at `eps` so G is symmetric
/// positive definite. A non-finite Hessian falls back to the identity.
struct Metric {
  MatrixXd eigvecs;
  VectorXd eigvals;  ///< of G, all >= eps
  bool identity_fallback = false;

  static Metric from_hessian(const MatrixXd& hess, double eps);

  VectorXd apply_inverse(const VectorXd& v) const;
  /// Draw from N(0, zeta * G^-1); consumes dim() normals in index order.
  VectorXd sample(double zeta, Rng& rng) const;
  /// log N(dev; 0, zeta * G^-1).
  double log_density(const VectorXd& dev, double zeta) const;

  int dim() const { return static_cast<int>(eigvals.size()); }
};

struct MmalaOptions {
  double metric_eps = 1e-6;
  double target_accept = 0.574;
};

struct StepResult {
  VectorXd theta;
  TargetEval eval;
  bool accepted = false;
  bool used_identity_metric = false;
};

/// One Metropolis-Hastings step with the manifold Langevin proposal
///   theta* ~ N(theta + 0.5 zeta G^-1 grad, zeta G^-1),
/// accepted with the full asymmetric-proposal ratio (fresh gradient and
/// metric at theta*). Non-finite proposal targets auto-reject. Consumes
/// dim normals plus one uniform per call regardless of outcome.
StepResult mmala_step(const TargetFn& target, const VectorXd& theta,
                      const TargetEval& current, double zeta, Rng& rng,
                      const MmalaOptions& options = {});

/// Robbins-Monro step-size update toward the target acceptance rate.
/// `window_index` is the 0-based adaptation window counter; the gain decays
/// as 1/sqrt(window_index + 1).
double adapt_step_size(double zeta, double acceptance_rate, int window_index,
                       double target_accept = 0.574);

}  // namespace plumeinv
