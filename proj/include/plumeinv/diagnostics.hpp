#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "plumeinv/chain.hpp"

namespace plumeinv {

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double q025 = 0.0, q25 = 0.0, q75 = 0.0, q975 = 0.0;
  double ess = 0.0;
};

struct Summary {
  std::vector<ParamSummary> params;  ///< theta block, then sigma2, then betas
  double acceptance_rate = 0.0;
  int n_samples = 0;           ///< post-burn-in rows
  int burn_in = 0;
  int identity_fallbacks = 0;
  /// Fraction of post-burn-in samples with b_h > 1 or b_v > 1; a nonzero
  /// value is a model-misspecification indicator, not an error.
  double b_exponent_warning_fraction = 0.0;

  void save_csv(const std::filesystem::path& file) const;
  void save_json(const std::filesystem::path& file, double bic_value,
                 double rmse_value) const;
  const ParamSummary& param(const std::string& name) const;
};

/// Linear-interpolation quantile of an unsorted sample (type-7).
double quantile(std::span<const double> sample, double q);

/// Effective sample size from the autocorrelation sum (Geyer initial
/// positive-pair truncation). Permutation of the input changes the result;
/// quantiles do not.
double effective_sample_size(std::span<const double> series);

/// Posterior summaries over the post-burn-in rows.
Summary summarize(const Trace& trace, int burn_in);

/// Bayesian information criterion, k * ln(n_obs) - 2 * max log-likelihood
/// over the trace (likelihood term only; priors excluded).
double bic(const Trace& trace, int n_obs, int k);

/// Parameter count for the BIC: theta block + sigma2 + one background per
/// sensor.
int bic_parameter_count(const ThetaLayout& layout, int n_sensors);

/// Root-mean-square residual at posterior means: d_hat = A(theta_bar) s_bar
/// + beta_bar with every parameter at its post-burn-in posterior mean.
double rmse(const Trace& trace, const ModelContext& ctx, int burn_in);

/// Box-whisker export (one row per parameter: quartiles and 2.5/97.5
/// whiskers), matching the summary CSV columns used by the plots.
void save_boxwhisker_csv(const std::filesystem::path& file,
                         const Summary& summary,
                         const std::string& run_label);

struct KdeGrid {
  std::vector<double> x, y;  ///< grid axes
  MatrixXd density;          ///< y-major: density(iy, ix)
};

/// Gaussian-kernel density of (x, y) samples on a regular grid (Scott's
/// bandwidth), for location-density contour plots.
KdeGrid kde_grid(std::span<const double> xs, std::span<const double> ys,
                 int nx = 50, int ny = 50);

void save_kde_csv(const std::filesystem::path& file, const KdeGrid& grid);

}  // namespace plumeinv
