#pragma once

#include <Eigen/Core>
#include <array>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "plumeinv/sensing.hpp"

namespace plumeinv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Coordinate layout of the M-MALA block theta in unconstrained space:
/// per source (log s_i, x_i, y_i), then the estimated dispersion
/// coordinates. Positivity of rates and dispersion parameters is enforced
/// by the log parameterization.
struct ThetaLayout {
  int n_sources = 1;
  DispersionScheme scheme = DispersionScheme::Draxler;
  std::array<bool, 4> estimate_draxler{true, true, true, true};  // a_h,b_h,a_v,b_v
  bool estimate_smith_scale = false;

  int dispersion_dim() const;
  int dim() const { return 3 * n_sources + dispersion_dim(); }

  int log_rate_index(int source) const { return 3 * source; }
  int x_index(int source) const { return 3 * source + 1; }
  int y_index(int source) const { return 3 * source + 2; }

  bool is_log_coordinate(int index) const;

  /// Column names on the constrained scale (s, x, y, a_h, ... / scale_h, ...).
  std::vector<std::string> names() const;

  /// exp() applied to log coordinates; identity elsewhere.
  VectorXd to_constrained(const VectorXd& theta) const;
  VectorXd from_constrained(const VectorXd& constrained) const;
};

/// Priors for the sampled blocks. Dispersion and rate priors are Gaussians
/// on the log scale; source coordinates get an optional Gaussian (sd <= 0
/// means flat) truncated to the domain box.
struct Priors {
  double sigma2_shape = 2.0;  ///< Inv-Gamma a
  double sigma2_scale = 2.0;  ///< Inv-Gamma b

  VectorXd beta_mean;  ///< per sensor [PPM]
  VectorXd beta_var;   ///< per sensor, diagonal [PPM^2]

  double log_rate_mean = -6.907755278982137;  ///< log(1e-3)
  double log_rate_sd = 2.0;

  double box_x_lo = 0.0, box_x_hi = 110.0;
  double box_y_lo = 0.0, box_y_hi = 110.0;
  double location_mean_x = 55.0, location_sd_x = 0.0;  ///< sd <= 0: flat in box
  double location_mean_y = 55.0, location_sd_y = 0.0;

  double log_dispersion_mean = 0.0;
  double log_dispersion_sd = 1.0;

  bool in_box(double x, double y) const {
    return x >= box_x_lo && x <= box_x_hi && y >= box_y_lo && y <= box_y_hi;
  }
};

struct TargetEval;

/// Opaque per-theta forward sums, reusable across Gibbs updates of
/// (sigma^2, beta): the Gaussian likelihood and its theta-derivatives are
/// linear in the per-sensor statistics sum_t (d - m)^2 and sum_t (d - m),
/// so one forward sweep per proposal serves every later recombination.
struct ForwardParts {
  virtual ~ForwardParts() = default;
  virtual TargetEval combine(const struct ModelContext& ctx, const Priors& priors,
                             const VectorXd& theta, double sigma2,
                             const VectorXd& beta_sensor,
                             bool want_derivatives) const = 0;
};

/// Value, derivatives, and Gibbs sufficient statistics of the conditional
/// log-posterior of theta given (sigma^2, beta).
struct TargetEval {
  double logp = -std::numeric_limits<double>::infinity();
  double loglik = 0.0;  ///< Gaussian likelihood term only
  VectorXd grad;
  MatrixXd hess;
  VectorXd sensor_resid_sq;   ///< per sensor: sum_t (d - m)^2, beta excluded
  VectorXd sensor_resid_sum;  ///< per sensor: sum_t (d - m)
  std::shared_ptr<const ForwardParts> parts;
};

/// Everything held fixed while sampling: geometry, wind, data, scheme
/// bookkeeping. Receptor sets are pre-discretized per sensor.
struct ModelContext {
  std::vector<std::vector<Vector3d>> receptors;  ///< per sensor
  std::vector<std::string> sensor_ids;
  ObsLayout layout;
  VectorXd data;
  WindRecord wind;  ///< layout.n_times entries
  AtmosphereSpec atmos;
  DispersionSpec dispersion;  ///< fixed parameter values and scheme
  AscCoefficientStore store;  ///< used by table schemes only
  ThetaLayout theta;
  std::vector<double> source_z;       ///< fixed per source
  std::vector<double> source_height;  ///< fixed per source
  double half_width = 1.0;
  double half_height = 1.0;

  static ModelContext build(const Observations& obs, const SensorArray& array,
                            const DispersionSpec& disp,
                            const AtmosphereSpec& atmos,
                            const ThetaLayout& theta,
                            std::vector<double> source_z,
                            std::vector<double> source_height,
                            double half_width, double half_height,
                            AscCoefficientStore store = {},
                            double beam_spacing = 0.4);

  int n_obs() const { return layout.rows(); }
};

/// One forward sweep at theta. With want_derivatives the result carries the
/// gradient and Hessian of the conditional log-posterior (theta block only);
/// non-finite posteriors come back as logp = -inf, never as a throw.
TargetEval eval_theta(const ModelContext& ctx, const Priors& priors,
                      const VectorXd& theta, double sigma2,
                      const VectorXd& beta_sensor, bool want_derivatives);

/// Model mean A(theta) * s(theta) per observation (background excluded).
VectorXd forward_mean(const ModelContext& ctx, const VectorXd& theta);

/// Log prior density of theta (up to the box normalization constant);
/// -inf outside the domain box. Gradient/Hessian contributions are added
/// to the provided accumulators when non-null.
double log_prior_theta(const Priors& priors, const ThetaLayout& layout,
                       const VectorXd& theta, VectorXd* grad = nullptr,
                       MatrixXd* hess = nullptr);

}  // namespace plumeinv
