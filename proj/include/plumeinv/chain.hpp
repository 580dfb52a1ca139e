#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plumeinv/forward_model.hpp"
#include "plumeinv/gibbs.hpp"
#include "plumeinv/mmala.hpp"

namespace plumeinv {

struct InitConfig {
  int grid_nx = 12;
  int grid_ny = 12;
  int grid_ns = 7;          ///< log-spaced rate candidates
  double rate_lo = 1e-5;    ///< [kg/s]
  double rate_hi = 1e-2;
  int lhs_samples = 64;
  double lhs_log_halfwidth = 0.7;  ///< refinement span on log coordinates
};

struct SamplerConfig {
  int n_iterations = 2500;
  int burn_in = 800;
  std::uint64_t seed = 1;
  double zeta0 = 0.25;
  int adapt_window = 25;
  MmalaOptions mmala;
  InitConfig init;
};

/// All sampled blocks at one iteration. theta is in unconstrained
/// coordinates; beta holds one value per sensor.
struct ChainState {
  VectorXd theta;
  double sigma2 = 1.0;
  VectorXd beta_sensor;
  double zeta = 0.25;
  int iteration = 0;
};

/// Everything needed to continue a chain exactly where it stopped.
struct ChainCheckpoint {
  ChainState state;
  std::string rng_state;
  int accepted_in_window = 0;
  int window_position = 0;
  int window_index = 0;

  void save_json(const std::filesystem::path& file) const;
  static ChainCheckpoint load_json(const std::filesystem::path& file);
};

/// Stored MCMC history. Parameters are recorded on the constrained scale.
struct Trace {
  std::vector<std::string> theta_names;
  std::vector<std::string> sensor_ids;
  MatrixXd theta;    ///< n_recorded x dim, constrained
  MatrixXd beta;     ///< n_recorded x n_sensors
  VectorXd sigma2;
  VectorXd log_post;  ///< joint posterior (all blocks)
  VectorXd log_lik;   ///< Gaussian likelihood term only
  VectorXd zeta;
  std::vector<char> accepted;
  int burn_in = 0;
  int first_iteration = 1;      ///< global index of the first recorded row
  int identity_fallbacks = 0;   ///< metric fallbacks encountered

  int size() const { return static_cast<int>(theta.rows()); }
  double acceptance_rate() const;

  void save_csv(const std::filesystem::path& file) const;
  static Trace load_csv(const std::filesystem::path& file);
};

/// M-MALA-within-Gibbs: per iteration (1) M-MALA update of theta,
/// (2) conjugate draw of beta, (3) conjugate draw of sigma^2. Fixed-seed
/// reproducible; aborts if the posterior is non-finite at the start.
/// `checkpoint_out`, when non-null, receives the final sampler state.
Trace run_chain(const ModelContext& ctx, const Priors& priors,
                const SamplerConfig& config, const ChainState& init,
                ChainCheckpoint* checkpoint_out = nullptr);

/// Continues a chain from a checkpoint for `extra_iterations`, reproducing
/// exactly the rows a single longer run would have produced.
Trace continue_chain(const ModelContext& ctx, const Priors& priors,
                     const SamplerConfig& config,
                     const ChainCheckpoint& checkpoint, int extra_iterations,
                     ChainCheckpoint* checkpoint_out = nullptr);

struct GridSearchResult {
  double x = 0.0, y = 0.0, rate = 0.0;
  double log_lik = 0.0;
};

/// Stage 1: coarse grid over (x, y) and log-spaced rates, maximizing the
/// log-likelihood with dispersion parameters at 1.0. Sources are placed
/// greedily for multi-source layouts.
std::vector<GridSearchResult> grid_search(const ModelContext& ctx,
                                          const Priors& priors,
                                          const InitConfig& cfg, double sigma2,
                                          const VectorXd& beta_sensor);

/// Latin hypercube sample on [0,1)^{n x d}: each column's n values occupy n
/// distinct strata.
MatrixXd latin_hypercube(Rng& rng, int n_samples, int dims);

/// Stage 1 + stage 2 (Latin hypercube refinement around the grid optimum,
/// best log-posterior wins). sigma^2 and beta start at their prior means.
ChainState initialize(const ModelContext& ctx, const Priors& priors,
                      const SamplerConfig& config, std::uint64_t seed);

}  // namespace plumeinv
