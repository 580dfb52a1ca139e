#include "plumeinv/chain.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "plumeinv/csv.hpp"
#include "plumeinv/errors.hpp"

namespace plumeinv {

using nlohmann::json;

// --- Trace ---------------------------------------------------------------

double Trace::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  double acc = 0.0;
  for (char a : accepted) acc += a ? 1.0 : 0.0;
  return acc / static_cast<double>(accepted.size());
}

void Trace::save_csv(const std::filesystem::path& file) const {
  CsvWriter w(file);
  std::vector<std::string> header{"iter"};
  for (const auto& n : theta_names) header.push_back(n);
  header.push_back("sigma2");
  for (const auto& id : sensor_ids) header.push_back("beta_" + id);
  header.insert(header.end(), {"log_post", "log_lik", "accepted", "zeta"});
  w.header(header);

  for (int r = 0; r < size(); ++r) {
    std::vector<std::string> cells{std::to_string(first_iteration + r)};
    for (int c = 0; c < theta.cols(); ++c) cells.push_back(fmt_double(theta(r, c)));
    cells.push_back(fmt_double(sigma2[r]));
    for (int c = 0; c < beta.cols(); ++c) cells.push_back(fmt_double(beta(r, c)));
    cells.push_back(fmt_double(log_post[r]));
    cells.push_back(fmt_double(log_lik[r]));
    cells.push_back(accepted[static_cast<std::size_t>(r)] ? "1" : "0");
    cells.push_back(fmt_double(zeta[r]));
    w.cells(cells);
  }
}

Trace Trace::load_csv(const std::filesystem::path& file) {
  CsvReader r(file);
  const auto header = r.read_header();
  if (header.size() < 6 || header.front() != "iter" || header.back() != "zeta")
    throw ParseError(file.filename().string() + ": not a trace file");

  // Columns: iter, theta..., sigma2, beta_..., log_post, log_lik, accepted, zeta
  std::size_t sigma2_col = 0;
  for (std::size_t i = 1; i < header.size(); ++i)
    if (header[i] == "sigma2") { sigma2_col = i; break; }
  if (sigma2_col == 0)
    throw ParseError(file.filename().string() + ": missing sigma2 column");

  Trace tr;
  for (std::size_t i = 1; i < sigma2_col; ++i) tr.theta_names.push_back(header[i]);
  std::size_t beta_end = sigma2_col + 1;
  while (beta_end < header.size() && header[beta_end].rfind("beta_", 0) == 0) {
    tr.sensor_ids.push_back(header[beta_end].substr(5));
    ++beta_end;
  }
  if (beta_end + 4 != header.size())
    throw ParseError(file.filename().string() + ": unexpected trailing columns");

  std::vector<std::vector<double>> rows;
  while (auto row = r.next_row(header.size())) rows.push_back(*row);
  if (rows.empty()) throw ParseError(file.filename().string() + ": empty trace");

  const int n = static_cast<int>(rows.size());
  const int dim = static_cast<int>(tr.theta_names.size());
  const int n_sns = static_cast<int>(tr.sensor_ids.size());
  tr.first_iteration = static_cast<int>(rows.front()[0]);
  tr.theta.resize(n, dim);
  tr.beta.resize(n, n_sns);
  tr.sigma2.resize(n);
  tr.log_post.resize(n);
  tr.log_lik.resize(n);
  tr.zeta.resize(n);
  tr.accepted.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (int c = 0; c < dim; ++c) tr.theta(i, c) = row[1 + static_cast<std::size_t>(c)];
    tr.sigma2[i] = row[sigma2_col];
    for (int c = 0; c < n_sns; ++c)
      tr.beta(i, c) = row[sigma2_col + 1 + static_cast<std::size_t>(c)];
    tr.log_post[i] = row[beta_end];
    tr.log_lik[i] = row[beta_end + 1];
    tr.accepted[static_cast<std::size_t>(i)] = row[beta_end + 2] != 0.0;
    tr.zeta[i] = row[beta_end + 3];
  }
  return tr;
}

// --- Checkpoint ------------------------------------------------------------

void ChainCheckpoint::save_json(const std::filesystem::path& file) const {
  json j{{"theta", std::vector<double>(state.theta.begin(), state.theta.end())},
         {"sigma2", state.sigma2},
         {"beta", std::vector<double>(state.beta_sensor.begin(),
                                      state.beta_sensor.end())},
         {"zeta", state.zeta},
         {"iteration", state.iteration},
         {"rng_state", rng_state},
         {"accepted_in_window", accepted_in_window},
         {"window_position", window_position},
         {"window_index", window_index}};
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write checkpoint: " + file.string());
  out << j.dump(2) << "\n";
}

ChainCheckpoint ChainCheckpoint::load_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open checkpoint: " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(file.filename().string() + ": " + e.what());
  }
  ChainCheckpoint cp;
  const auto theta = j.at("theta").get<std::vector<double>>();
  const auto beta = j.at("beta").get<std::vector<double>>();
  cp.state.theta = Eigen::Map<const VectorXd>(theta.data(),
                                              static_cast<long>(theta.size()));
  cp.state.beta_sensor =
      Eigen::Map<const VectorXd>(beta.data(), static_cast<long>(beta.size()));
  cp.state.sigma2 = j.at("sigma2").get<double>();
  cp.state.zeta = j.at("zeta").get<double>();
  cp.state.iteration = j.at("iteration").get<int>();
  cp.rng_state = j.at("rng_state").get<std::string>();
  cp.accepted_in_window = j.at("accepted_in_window").get<int>();
  cp.window_position = j.at("window_position").get<int>();
  cp.window_index = j.at("window_index").get<int>();
  return cp;
}

// --- Chain driver ----------------------------------------------------------

namespace {

struct Cursor {
  VectorXd theta;
  double sigma2;
  VectorXd beta;
  double zeta;
  int iteration;  // completed iterations (global)
  int accepted_in_window = 0;
  int window_position = 0;
  int window_index = 0;
};

Trace drive_chain(const ModelContext& ctx, const Priors& priors,
                  const SamplerConfig& cfg, Cursor cur, Rng rng,
                  int iterations_to_run, ChainCheckpoint* checkpoint_out) {
  const int dim = ctx.theta.dim();
  const int n_sns = ctx.layout.n_sensors;

  TargetEval eval =
      eval_theta(ctx, priors, cur.theta, cur.sigma2, cur.beta, true);
  if (!std::isfinite(eval.logp))
    throw std::runtime_error(
        "run_chain: non-finite posterior at the initial state");

  Trace trace;
  trace.theta_names = ctx.theta.names();
  trace.sensor_ids = ctx.sensor_ids;
  trace.first_iteration = cur.iteration + 1;
  trace.burn_in = std::max(0, cfg.burn_in - cur.iteration);
  trace.theta.resize(iterations_to_run, dim);
  trace.beta.resize(iterations_to_run, n_sns);
  trace.sigma2.resize(iterations_to_run);
  trace.log_post.resize(iterations_to_run);
  trace.log_lik.resize(iterations_to_run);
  trace.zeta.resize(iterations_to_run);
  trace.accepted.resize(static_cast<std::size_t>(iterations_to_run));

  const VectorXd counts =
      VectorXd::Constant(n_sns, static_cast<double>(ctx.layout.n_times));

  const TargetFn target = [&](const VectorXd& t) {
    return eval_theta(ctx, priors, t, cur.sigma2, cur.beta, true);
  };

  for (int r = 0; r < iterations_to_run; ++r) {
    const int global_iter = cur.iteration + 1;

    // (1) M-MALA update of theta | sigma2, beta.
    StepResult step =
        mmala_step(target, cur.theta, eval, cur.zeta, rng, cfg.mmala);
    cur.theta = step.theta;
    eval = std::move(step.eval);
    if (step.used_identity_metric) ++trace.identity_fallbacks;

    // (2) beta | theta, sigma2 (per-sensor conjugate Gaussian).
    cur.beta = gibbs_beta(eval.sensor_resid_sum, counts, cur.sigma2, priors, rng);

    // (3) sigma2 | theta, beta (conjugate inverse-gamma).
    const double rss = residual_sq_at_beta(eval.sensor_resid_sq,
                                           eval.sensor_resid_sum, counts,
                                           cur.beta);
    cur.sigma2 = gibbs_sigma2(ctx.n_obs(), rss, priors, rng);

    // Step-size adaptation runs during burn-in only, then freezes so the
    // post-burn-in chain is a valid MCMC.
    if (global_iter <= cfg.burn_in) {
      cur.accepted_in_window += step.accepted ? 1 : 0;
      if (++cur.window_position == cfg.adapt_window) {
        const double rate = static_cast<double>(cur.accepted_in_window) /
                            static_cast<double>(cfg.adapt_window);
        cur.zeta = adapt_step_size(cur.zeta, rate, cur.window_index,
                                   cfg.mmala.target_accept);
        ++cur.window_index;
        cur.window_position = 0;
        cur.accepted_in_window = 0;
      }
    }

    // Refresh the conditional evaluation for the new (sigma2, beta); the
    // forward sums at the current theta are reused, not recomputed.
    eval = eval.parts->combine(ctx, priors, cur.theta, cur.sigma2, cur.beta,
                               true);

    trace.theta.row(r) = ctx.theta.to_constrained(cur.theta).transpose();
    trace.beta.row(r) = cur.beta.transpose();
    trace.sigma2[r] = cur.sigma2;
    trace.log_lik[r] = eval.loglik;
    double lp = eval.logp;
    lp += inv_gamma_logpdf(cur.sigma2, priors.sigma2_shape, priors.sigma2_scale);
    for (int j = 0; j < n_sns; ++j) {
      if (priors.beta_var[j] > 0.0) {
        const double z = cur.beta[j] - priors.beta_mean[j];
        lp += -0.5 * z * z / priors.beta_var[j] -
              0.5 * std::log(2.0 * M_PI * priors.beta_var[j]);
      }
    }
    trace.log_post[r] = lp;
    trace.zeta[r] = cur.zeta;
    trace.accepted[static_cast<std::size_t>(r)] = step.accepted;

    cur.iteration = global_iter;
  }

  if (checkpoint_out) {
    checkpoint_out->state = ChainState{cur.theta, cur.sigma2, cur.beta,
                                       cur.zeta, cur.iteration};
    checkpoint_out->rng_state = rng.save_state();
    checkpoint_out->accepted_in_window = cur.accepted_in_window;
    checkpoint_out->window_position = cur.window_position;
    checkpoint_out->window_index = cur.window_index;
  }
  return trace;
}

}  // namespace

Trace run_chain(const ModelContext& ctx, const Priors& priors,
                const SamplerConfig& cfg, const ChainState& init,
                ChainCheckpoint* checkpoint_out) {
  Cursor cur;
  cur.theta = init.theta;
  cur.sigma2 = init.sigma2;
  cur.beta = init.beta_sensor;
  cur.zeta = init.zeta;
  cur.iteration = 0;
  Rng rng(derive_seed(cfg.seed, 11));
  return drive_chain(ctx, priors, cfg, cur, rng, cfg.n_iterations,
                     checkpoint_out);
}

Trace continue_chain(const ModelContext& ctx, const Priors& priors,
                     const SamplerConfig& cfg, const ChainCheckpoint& cp,
                     int extra_iterations, ChainCheckpoint* checkpoint_out) {
  Cursor cur;
  cur.theta = cp.state.theta;
  cur.sigma2 = cp.state.sigma2;
  cur.beta = cp.state.beta_sensor;
  cur.zeta = cp.state.zeta;
  cur.iteration = cp.state.iteration;
  cur.accepted_in_window = cp.accepted_in_window;
  cur.window_position = cp.window_position;
  cur.window_index = cp.window_index;
  Rng rng(0);
  rng.restore_state(cp.rng_state);
  return drive_chain(ctx, priors, cfg, cur, rng, extra_iterations,
                     checkpoint_out);
}

// --- Initialization -----------------------------------------------------------

std::vector<GridSearchResult> grid_search(const ModelContext& ctx,
                                          const Priors& priors,
                                          const InitConfig& cfg, double sigma2,
                                          const VectorXd& beta_sensor) {
  const int dim = ctx.theta.dim();
  VectorXd theta = VectorXd::Zero(dim);  // dispersion coordinates at log(1)

  std::vector<double> xs(static_cast<std::size_t>(cfg.grid_nx));
  std::vector<double> ys(static_cast<std::size_t>(cfg.grid_ny));
  for (int i = 0; i < cfg.grid_nx; ++i)
    xs[static_cast<std::size_t>(i)] =
        priors.box_x_lo + (i + 0.5) * (priors.box_x_hi - priors.box_x_lo) /
                              cfg.grid_nx;
  for (int i = 0; i < cfg.grid_ny; ++i)
    ys[static_cast<std::size_t>(i)] =
        priors.box_y_lo + (i + 0.5) * (priors.box_y_hi - priors.box_y_lo) /
                              cfg.grid_ny;
  std::vector<double> ss(static_cast<std::size_t>(cfg.grid_ns));
  for (int i = 0; i < cfg.grid_ns; ++i) {
    const double f = cfg.grid_ns == 1
                         ? 0.5
                         : static_cast<double>(i) / (cfg.grid_ns - 1);
    ss[static_cast<std::size_t>(i)] =
        std::exp(std::log(cfg.rate_lo) +
                 f * (std::log(cfg.rate_hi) - std::log(cfg.rate_lo)));
  }

  // Greedy placement: one source at a time, previous sources held fixed.
  std::vector<GridSearchResult> placed;
  for (int src = 0; src < ctx.theta.n_sources; ++src) {
    // Unplaced sources contribute nothing: rate at the lower grid bound.
    for (int rest = src; rest < ctx.theta.n_sources; ++rest) {
      theta[ctx.theta.log_rate_index(rest)] = std::log(cfg.rate_lo);
      theta[ctx.theta.x_index(rest)] = xs.front();
      theta[ctx.theta.y_index(rest)] = ys.front();
    }

    GridSearchResult best;
    bool found = false;
    for (double x : xs)
      for (double y : ys)
        for (double s : ss) {
          theta[ctx.theta.log_rate_index(src)] = std::log(s);
          theta[ctx.theta.x_index(src)] = x;
          theta[ctx.theta.y_index(src)] = y;
          const TargetEval ev =
              eval_theta(ctx, priors, theta, sigma2, beta_sensor, false);
          if (!std::isfinite(ev.loglik) || !std::isfinite(ev.logp)) continue;
          if (!found || ev.loglik > best.log_lik) {
            best = GridSearchResult{x, y, s, ev.loglik};
            found = true;
          }
        }
    if (!found)
      throw std::runtime_error(
          "initialize: every grid point has a non-finite likelihood");
    theta[ctx.theta.log_rate_index(src)] = std::log(best.rate);
    theta[ctx.theta.x_index(src)] = best.x;
    theta[ctx.theta.y_index(src)] = best.y;
    placed.push_back(best);
  }
  return placed;
}

MatrixXd latin_hypercube(Rng& rng, int n_samples, int dims) {
  MatrixXd u(n_samples, dims);
  std::vector<int> strata(static_cast<std::size_t>(n_samples));
  for (int d = 0; d < dims; ++d) {
    for (int i = 0; i < n_samples; ++i) strata[static_cast<std::size_t>(i)] = i;
    for (int i = n_samples - 1; i > 0; --i) {  // Fisher-Yates
      const int j = static_cast<int>(rng.integer() %
                                     static_cast<std::uint64_t>(i + 1));
      std::swap(strata[static_cast<std::size_t>(i)],
                strata[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < n_samples; ++i)
      u(i, d) = (strata[static_cast<std::size_t>(i)] + rng.uniform()) /
                static_cast<double>(n_samples);
  }
  return u;
}

ChainState initialize(const ModelContext& ctx, const Priors& priors,
                      const SamplerConfig& config, std::uint64_t seed) {
  const InitConfig& cfg = config.init;
  const double sigma2_init =
      priors.sigma2_shape > 1.0
          ? priors.sigma2_scale / (priors.sigma2_shape - 1.0)
          : priors.sigma2_scale;
  const VectorXd beta_init = priors.beta_mean;

  const auto placed = grid_search(ctx, priors, cfg, sigma2_init, beta_init);

  const int dim = ctx.theta.dim();
  VectorXd center = VectorXd::Zero(dim);
  for (int i = 0; i < ctx.theta.n_sources; ++i) {
    center[ctx.theta.log_rate_index(i)] =
        std::log(placed[static_cast<std::size_t>(i)].rate);
    center[ctx.theta.x_index(i)] = placed[static_cast<std::size_t>(i)].x;
    center[ctx.theta.y_index(i)] = placed[static_cast<std::size_t>(i)].y;
  }

  // Stage 2: Latin hypercube around the grid optimum, best posterior wins.
  const double cell_x = (priors.box_x_hi - priors.box_x_lo) / cfg.grid_nx;
  const double cell_y = (priors.box_y_hi - priors.box_y_lo) / cfg.grid_ny;

  Rng rng(derive_seed(seed, 10));
  const MatrixXd u = latin_hypercube(rng, cfg.lhs_samples, dim);

  VectorXd best_theta = center;
  double best_logp =
      eval_theta(ctx, priors, center, sigma2_init, beta_init, false).logp;

  for (int r = 0; r < cfg.lhs_samples; ++r) {
    VectorXd cand = center;
    for (int c = 0; c < dim; ++c) {
      const double shift = 2.0 * u(r, c) - 1.0;
      if (ctx.theta.is_log_coordinate(c)) {
        cand[c] = center[c] + shift * cfg.lhs_log_halfwidth;
      } else {
        const bool is_x = (c % 3 == 1) && c < 3 * ctx.theta.n_sources;
        cand[c] = center[c] + shift * (is_x ? cell_x : cell_y);
      }
    }
    for (int i = 0; i < ctx.theta.n_sources; ++i) {
      cand[ctx.theta.x_index(i)] = std::clamp(cand[ctx.theta.x_index(i)],
                                              priors.box_x_lo, priors.box_x_hi);
      cand[ctx.theta.y_index(i)] = std::clamp(cand[ctx.theta.y_index(i)],
                                              priors.box_y_lo, priors.box_y_hi);
    }
    const double logp =
        eval_theta(ctx, priors, cand, sigma2_init, beta_init, false).logp;
    if (std::isfinite(logp) && logp > best_logp) {
      best_logp = logp;
      best_theta = cand;
    }
  }
  if (!std::isfinite(best_logp))
    throw std::runtime_error("initialize: non-finite posterior at every candidate");

  ChainState state;
  state.theta = best_theta;
  state.sigma2 = sigma2_init;
  state.beta_sensor = beta_init;
  state.zeta = config.zeta0;
  state.iteration = 0;
  return state;
}

}  // namespace plumeinv
