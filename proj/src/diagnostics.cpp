#include "plumeinv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "plumeinv/csv.hpp"
#include "plumeinv/errors.hpp"

namespace plumeinv {

double quantile(std::span<const double> sample, double q) {
  if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double pos = q * (static_cast<double>(s.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double f = pos - static_cast<double>(lo);
  return (1.0 - f) * s[lo] + f * s[hi];
}

double effective_sample_size(std::span<const double> series) {
  const auto n = static_cast<long>(series.size());
  if (n < 2) return static_cast<double>(n);

  const double mean =
      std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centered(series.size());
  for (long i = 0; i < n; ++i)
    centered[static_cast<std::size_t>(i)] = series[static_cast<std::size_t>(i)] - mean;

  const auto autocov = [&](long lag) {
    double acc = 0.0;
    for (long i = 0; i + lag < n; ++i)
      acc += centered[static_cast<std::size_t>(i)] *
             centered[static_cast<std::size_t>(i + lag)];
    return acc / static_cast<double>(n);
  };

  const double c0 = autocov(0);
  if (c0 <= 0.0) return static_cast<double>(n);  // constant series

  // Geyer: sum initial positive pairs rho(2m) + rho(2m+1).
  double rho_sum = 0.0;
  for (long m = 1; m + 1 < n; m += 2) {
    const double pair = (autocov(m) + autocov(m + 1)) / c0;
    if (pair <= 0.0) break;
    rho_sum += pair;
  }
  const double ess = static_cast<double>(n) / (1.0 + 2.0 * rho_sum);
  return std::min(ess, static_cast<double>(n));
}

namespace {

ParamSummary column_summary(const std::string& name,
                            std::span<const double> col) {
  ParamSummary p;
  p.name = name;
  const double n = static_cast<double>(col.size());
  p.mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : col) ss += (v - p.mean) * (v - p.mean);
  p.sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  p.median = quantile(col, 0.5);
  p.q025 = quantile(col, 0.025);
  p.q25 = quantile(col, 0.25);
  p.q75 = quantile(col, 0.75);
  p.q975 = quantile(col, 0.975);
  p.ess = effective_sample_size(col);
  return p;
}

}  // namespace

Summary summarize(const Trace& trace, int burn_in) {
  if (burn_in >= trace.size())
    throw std::invalid_argument("summarize: burn-in >= trace length");
  const int n = trace.size() - burn_in;

  Summary s;
  s.burn_in = burn_in;
  s.n_samples = n;
  s.identity_fallbacks = trace.identity_fallbacks;

  double acc = 0.0;
  for (int i = burn_in; i < trace.size(); ++i)
    acc += trace.accepted[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  s.acceptance_rate = acc / static_cast<double>(n);

  std::vector<double> col(static_cast<std::size_t>(n));
  for (int c = 0; c < trace.theta.cols(); ++c) {
    for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = trace.theta(burn_in + i, c);
    s.params.push_back(column_summary(trace.theta_names[static_cast<std::size_t>(c)], col));
  }
  for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = trace.sigma2[burn_in + i];
  s.params.push_back(column_summary("sigma2", col));
  for (int c = 0; c < trace.beta.cols(); ++c) {
    for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = trace.beta(burn_in + i, c);
    s.params.push_back(column_summary(
        "beta_" + trace.sensor_ids[static_cast<std::size_t>(c)], col));
  }

  // Exponents above one flag dispersion-model misspecification.
  int warn = 0;
  int b_cols = 0;
  for (int c = 0; c < trace.theta.cols(); ++c) {
    const std::string& name = trace.theta_names[static_cast<std::size_t>(c)];
    if (name != "b_h" && name != "b_v") continue;
    ++b_cols;
  }
  if (b_cols > 0) {
    for (int i = burn_in; i < trace.size(); ++i) {
      bool over = false;
      for (int c = 0; c < trace.theta.cols(); ++c) {
        const std::string& name = trace.theta_names[static_cast<std::size_t>(c)];
        if ((name == "b_h" || name == "b_v") && trace.theta(i, c) > 1.0)
          over = true;
      }
      warn += over ? 1 : 0;
    }
    s.b_exponent_warning_fraction = static_cast<double>(warn) / n;
  }
  return s;
}

const ParamSummary& Summary::param(const std::string& name) const {
  for (const ParamSummary& p : params)
    if (p.name == name) return p;
  throw std::invalid_argument("summary: no parameter named '" + name + "'");
}

void Summary::save_csv(const std::filesystem::path& file) const {
  CsvWriter w(file);
  w.header({"param", "mean", "sd", "median", "q025", "q25", "q75", "q975", "ess"});
  for (const ParamSummary& p : params)
    w.cells({p.name, fmt_double(p.mean), fmt_double(p.sd), fmt_double(p.median),
             fmt_double(p.q025), fmt_double(p.q25), fmt_double(p.q75),
             fmt_double(p.q975), fmt_double(p.ess)});
}

void Summary::save_json(const std::filesystem::path& file, double bic_value,
                        double rmse_value) const {
  nlohmann::json params_j = nlohmann::json::array();
  for (const ParamSummary& p : params)
    params_j.push_back({{"name", p.name},
                        {"mean", p.mean},
                        {"sd", p.sd},
                        {"median", p.median},
                        {"q025", p.q025},
                        {"q25", p.q25},
                        {"q75", p.q75},
                        {"q975", p.q975},
                        {"ess", p.ess}});
  nlohmann::json j{{"params", params_j},
                   {"acceptance_rate", acceptance_rate},
                   {"n_samples", n_samples},
                   {"burn_in", burn_in},
                   {"identity_fallbacks", identity_fallbacks},
                   {"b_exponent_warning_fraction", b_exponent_warning_fraction},
                   {"bic", bic_value},
                   {"rmse", rmse_value}};
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write summary: " + file.string());
  out << j.dump(2) << "\n";
}

double bic(const Trace& trace, int n_obs, int k) {
  if (trace.size() == 0) throw std::invalid_argument("bic: empty trace");
  const double max_loglik = trace.log_lik.maxCoeff();
  return k * std::log(static_cast<double>(n_obs)) - 2.0 * max_loglik;
}

int bic_parameter_count(const ThetaLayout& layout, int n_sensors) {
  return layout.dim() + 1 + n_sensors;
}

double rmse(const Trace& trace, const ModelContext& ctx, int burn_in) {
  if (burn_in >= trace.size())
    throw std::invalid_argument("rmse: burn-in >= trace length");
  const int n = trace.size() - burn_in;

  VectorXd constrained_mean = VectorXd::Zero(trace.theta.cols());
  for (int c = 0; c < trace.theta.cols(); ++c)
    constrained_mean[c] =
        trace.theta.col(c).segment(burn_in, n).mean();
  VectorXd beta_mean = VectorXd::Zero(trace.beta.cols());
  for (int c = 0; c < trace.beta.cols(); ++c)
    beta_mean[c] = trace.beta.col(c).segment(burn_in, n).mean();

  const VectorXd theta = ctx.theta.from_constrained(constrained_mean);
  const VectorXd model = forward_mean(ctx, theta);

  double ss = 0.0;
  for (int j = 0; j < ctx.layout.n_sensors; ++j)
    for (int t = 0; t < ctx.layout.n_times; ++t) {
      const int row = ctx.layout.row(j, t);
      const double resid = ctx.data[row] - model[row] - beta_mean[j];
      ss += resid * resid;
    }
  return std::sqrt(ss / static_cast<double>(ctx.n_obs()));
}

void save_boxwhisker_csv(const std::filesystem::path& file,
                         const Summary& summary,
                         const std::string& run_label) {
  CsvWriter w(file);
  w.header({"run", "param", "whisker_lo", "q25", "median", "q75", "whisker_hi",
            "mean"});
  for (const ParamSummary& p : summary.params)
    w.cells({run_label, p.name, fmt_double(p.q025), fmt_double(p.q25),
             fmt_double(p.median), fmt_double(p.q75), fmt_double(p.q975),
             fmt_double(p.mean)});
}

KdeGrid kde_grid(std::span<const double> xs, std::span<const double> ys,
                 int nx, int ny) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("kde_grid: bad sample");
  const double n = static_cast<double>(xs.size());

  const auto moments = [](std::span<const double> v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) /
                     static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = v.size() > 1
                          ? std::sqrt(ss / (static_cast<double>(v.size()) - 1.0))
                          : 0.0;
    return std::pair<double, double>{m, sd};
  };
  const auto [mx, sx] = moments(xs);
  const auto [my, sy] = moments(ys);

  // Scott's rule in two dimensions; degenerate spreads get a small floor.
  const double hx = std::max(sx, 1e-9) * std::pow(n, -1.0 / 6.0);
  const double hy = std::max(sy, 1e-9) * std::pow(n, -1.0 / 6.0);

  const double x_lo = *std::min_element(xs.begin(), xs.end()) - 3.0 * hx;
  const double x_hi = *std::max_element(xs.begin(), xs.end()) + 3.0 * hx;
  const double y_lo = *std::min_element(ys.begin(), ys.end()) - 3.0 * hy;
  const double y_hi = *std::max_element(ys.begin(), ys.end()) + 3.0 * hy;

  KdeGrid g;
  g.x.resize(static_cast<std::size_t>(nx));
  g.y.resize(static_cast<std::size_t>(ny));
  for (int i = 0; i < nx; ++i)
    g.x[static_cast<std::size_t>(i)] =
        x_lo + (x_hi - x_lo) * i / std::max(nx - 1, 1);
  for (int i = 0; i < ny; ++i)
    g.y[static_cast<std::size_t>(i)] =
        y_lo + (y_hi - y_lo) * i / std::max(ny - 1, 1);

  g.density.setZero(ny, nx);
  const double norm = 1.0 / (n * 2.0 * M_PI * hx * hy);
  for (std::size_t k = 0; k < xs.size(); ++k)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        const double dx = (g.x[static_cast<std::size_t>(ix)] - xs[k]) / hx;
        const double dy = (g.y[static_cast<std::size_t>(iy)] - ys[k]) / hy;
        g.density(iy, ix) += norm * std::exp(-0.5 * (dx * dx + dy * dy));
      }
  return g;
}

void save_kde_csv(const std::filesystem::path& file, const KdeGrid& grid) {
  CsvWriter w(file);
  w.header({"x", "y", "density"});
  for (int iy = 0; iy < grid.density.rows(); ++iy)
    for (int ix = 0; ix < grid.density.cols(); ++ix)
      w.row({grid.x[static_cast<std::size_t>(ix)],
             grid.y[static_cast<std::size_t>(iy)], grid.density(iy, ix)});
}

}  // namespace plumeinv
