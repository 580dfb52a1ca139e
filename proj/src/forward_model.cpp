#include "plumeinv/forward_model.hpp"

#include <cmath>

#include "plumeinv/dual.hpp"
#include "plumeinv/errors.hpp"

namespace plumeinv {

// --- ThetaLayout -------------------------------------------------------------

int ThetaLayout::dispersion_dim() const {
  switch (scheme) {
    case DispersionScheme::Draxler: {
      int n = 0;
      for (bool b : estimate_draxler) n += b ? 1 : 0;
      return n;
    }
    case DispersionScheme::Smith:
    case DispersionScheme::Briggs:
      return estimate_smith_scale ? 2 : 0;
  }
  return 0;
}

bool ThetaLayout::is_log_coordinate(int index) const {
  if (index < 3 * n_sources) return index % 3 == 0;  // log rate
  return true;  // all dispersion coordinates are log scale
}

std::vector<std::string> ThetaLayout::names() const {
  std::vector<std::string> out;
  for (int i = 0; i < n_sources; ++i) {
    const std::string suffix = n_sources > 1 ? "_" + std::to_string(i + 1) : "";
    out.push_back("s" + suffix);
    out.push_back("x" + suffix);
    out.push_back("y" + suffix);
  }
  if (scheme == DispersionScheme::Draxler) {
    static const char* disp_names[4] = {"a_h", "b_h", "a_v", "b_v"};
    for (int k = 0; k < 4; ++k)
      if (estimate_draxler[static_cast<std::size_t>(k)])
        out.push_back(disp_names[k]);
  } else if (estimate_smith_scale) {
    out.push_back("scale_h");
    out.push_back("scale_v");
  }
  return out;
}

VectorXd ThetaLayout::to_constrained(const VectorXd& theta) const {
  VectorXd c = theta;
  for (int i = 0; i < c.size(); ++i)
    if (is_log_coordinate(i)) c[i] = std::exp(c[i]);
  return c;
}

VectorXd ThetaLayout::from_constrained(const VectorXd& constrained) const {
  VectorXd t = constrained;
  for (int i = 0; i < t.size(); ++i)
    if (is_log_coordinate(i)) t[i] = std::log(t[i]);
  return t;
}

// --- ModelContext ------------------------------------------------------------

ModelContext ModelContext::build(const Observations& obs,
                                 const SensorArray& array,
                                 const DispersionSpec& disp,
                                 const AtmosphereSpec& atmos,
                                 const ThetaLayout& theta,
                                 std::vector<double> source_z,
                                 std::vector<double> source_height,
                                 double half_width, double half_height,
                                 AscCoefficientStore store,
                                 double beam_spacing) {
  obs.validate();
  array.validate();
  atmos.validate();
  if (static_cast<int>(array.size()) != obs.layout.n_sensors)
    throw std::invalid_argument("model context: array/observations mismatch");
  if (static_cast<int>(source_z.size()) != theta.n_sources ||
      static_cast<int>(source_height.size()) != theta.n_sources)
    throw std::invalid_argument("model context: per-source geometry mismatch");

  ModelContext ctx;
  for (const Sensor& s : array.sensors)
    ctx.receptors.push_back(sensor_receptors(s, beam_spacing));
  ctx.sensor_ids = obs.sensor_ids;
  ctx.layout = obs.layout;
  ctx.data = obs.d;
  ctx.wind = obs.wind;
  ctx.atmos = atmos;
  ctx.dispersion = disp;
  ctx.store = std::move(store);
  ctx.theta = theta;
  ctx.source_z = std::move(source_z);
  ctx.source_height = std::move(source_height);
  ctx.half_width = half_width;
  ctx.half_height = half_height;
  return ctx;
}

// --- Scalar-generic forward sweep ---------------------------------------------

namespace {

template <class S>
struct Params {
  struct Src {
    S rate, x, y;
  };
  std::vector<Src> sources;
  S a_h{1.0}, b_h{1.0}, a_v{1.0}, b_v{1.0};  // Draxler
  S scale_h{1.0}, scale_v{1.0};              // table schemes
};

/// Builds the active parameter set from theta. `make(i)` lifts coordinate i
/// into S (seeding a derivative lane for dual scalars).
template <class S, class Make>
Params<S> unpack(const ModelContext& ctx, const VectorXd& theta, Make&& make) {
  using std::exp;
  const ThetaLayout& lay = ctx.theta;
  Params<S> p;
  for (int i = 0; i < lay.n_sources; ++i) {
    typename Params<S>::Src src{exp(make(lay.log_rate_index(i))),
                                make(lay.x_index(i)), make(lay.y_index(i))};
    p.sources.push_back(src);
  }
  int k = 3 * lay.n_sources;
  if (lay.scheme == DispersionScheme::Draxler) {
    const DispersionSpec& d = ctx.dispersion;
    p.a_h = lay.estimate_draxler[0] ? exp(make(k++)) : S(d.a_h);
    p.b_h = lay.estimate_draxler[1] ? exp(make(k++)) : S(d.b_h);
    p.a_v = lay.estimate_draxler[2] ? exp(make(k++)) : S(d.a_v);
    p.b_v = lay.estimate_draxler[3] ? exp(make(k++)) : S(d.b_v);
  } else {
    const auto fixed =
        ctx.dispersion.smith_scale.value_or(std::make_pair(1.0, 1.0));
    p.scale_h = lay.estimate_smith_scale ? exp(make(k++)) : S(fixed.first);
    p.scale_v = lay.estimate_smith_scale ? exp(make(k++)) : S(fixed.second);
  }
  return p;
}

/// Calls sink(sensor, time, model_mean) for every observation row.
template <class S, class Sink>
void forward_sweep(const ModelContext& ctx, const Params<S>& p, Sink&& sink) {
  const bool draxler = ctx.theta.scheme == DispersionScheme::Draxler;
  const AscEntry* entry = nullptr;
  if (!draxler)
    entry = &ctx.store.entry(ctx.theta.scheme, ctx.dispersion.asc_class);

  const int n_t = ctx.layout.n_times;
  const int n_sns = ctx.layout.n_sensors;

  for (int t = 0; t < n_t; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    const double u = ctx.wind.speed[ti];
    const double phi = ctx.wind.direction_deg[ti] * M_PI / 180.0;
    const double ex = std::cos(phi), ey = std::sin(phi);
    const double tan_gh = std::tan(ctx.wind.gamma_h[ti]);
    const double tan_gv = std::tan(ctx.wind.gamma_v[ti]);

    for (int j = 0; j < n_sns; ++j) {
      const auto& receptors = ctx.receptors[static_cast<std::size_t>(j)];
      S m(0.0);
      for (const Vector3d& r : receptors) {
        for (int i = 0; i < ctx.theta.n_sources; ++i) {
          const auto& src = p.sources[static_cast<std::size_t>(i)];
          const S rel_x = r.x() - src.x;
          const S rel_y = r.y() - src.y;
          const S down = rel_x * ex + rel_y * ey;
          if (value_of(down) <= 0.0) continue;  // upwind rule
          const S cross = rel_y * ex - rel_x * ey;
          const double vertical =
              r.z() - ctx.source_z[static_cast<std::size_t>(i)];

          SigmaPair<S> sig =
              draxler ? draxler_sigmas(p.a_h, p.b_h, p.a_v, p.b_v, down, tan_gh,
                                       tan_gv, ctx.half_width, ctx.half_height)
                      : table_sigmas(*entry, down, p.scale_h, p.scale_v);
          m += plume_ppm(src.rate, cross, vertical, sig.horizontal,
                         sig.vertical, u,
                         ctx.source_height[static_cast<std::size_t>(i)],
                         ctx.atmos);
        }
      }
      sink(j, t, m * (1.0 / static_cast<double>(receptors.size())));
    }
  }
}

// --- Forward parts --------------------------------------------------------

template <int N>
struct PartsN final : ForwardParts {
  int dim = 0;
  std::vector<Dual2<N>> resid_sq;   // per sensor: sum_t (d - m)^2
  std::vector<Dual2<N>> resid_sum;  // per sensor: sum_t (d - m)
  VectorXd counts;

  TargetEval combine(const ModelContext& ctx, const Priors& priors,
                     const VectorXd& theta, double sigma2,
                     const VectorXd& beta_sensor,
                     bool want_derivatives) const override {
    const int n_sns = static_cast<int>(resid_sq.size());
    if (beta_sensor.size() != n_sns)
      throw std::invalid_argument("combine: beta size mismatch");

    Dual2<N> quad(0.0);
    for (int j = 0; j < n_sns; ++j) {
      const auto js = static_cast<std::size_t>(j);
      const double b = beta_sensor[j];
      quad += resid_sq[js] - (2.0 * b) * resid_sum[js];
      quad += Dual2<N>(counts[j] * b * b);
    }

    const double n = static_cast<double>(ctx.n_obs());
    const Dual2<N> loglik =
        Dual2<N>(-0.5 * n * std::log(2.0 * M_PI * sigma2)) -
        quad * (0.5 / sigma2);

    TargetEval ev;
    ev.sensor_resid_sq.resize(n_sns);
    ev.sensor_resid_sum.resize(n_sns);
    for (int j = 0; j < n_sns; ++j) {
      ev.sensor_resid_sq[j] = resid_sq[static_cast<std::size_t>(j)].val;
      ev.sensor_resid_sum[j] = resid_sum[static_cast<std::size_t>(j)].val;
    }
    ev.loglik = loglik.val;
    if (!std::isfinite(loglik.val)) return ev;  // logp stays -inf

    VectorXd grad = VectorXd::Zero(dim);
    MatrixXd hess = MatrixXd::Zero(dim, dim);
    if (want_derivatives) {
      for (int i = 0; i < dim; ++i) {
        grad[i] = loglik.grad[static_cast<std::size_t>(i)];
        for (int j = 0; j <= i; ++j) {
          const double h =
              loglik.hess[static_cast<std::size_t>(Dual2<N>::hidx(i, j))];
          hess(i, j) = h;
          hess(j, i) = h;
        }
      }
    }

    const double lp = log_prior_theta(priors, ctx.theta, theta,
                                      want_derivatives ? &grad : nullptr,
                                      want_derivatives ? &hess : nullptr);
    if (!std::isfinite(lp)) return ev;

    ev.logp = loglik.val + lp;
    ev.grad = std::move(grad);
    ev.hess = std::move(hess);
    return ev;
  }
};

struct PartsD final : ForwardParts {
  VectorXd resid_sq;
  VectorXd resid_sum;
  VectorXd counts;

  TargetEval combine(const ModelContext& ctx, const Priors& priors,
                     const VectorXd& theta, double sigma2,
                     const VectorXd& beta_sensor,
                     bool want_derivatives) const override {
    if (want_derivatives)
      throw std::logic_error("value-only forward parts cannot supply derivatives");
    const int n_sns = static_cast<int>(resid_sq.size());
    if (beta_sensor.size() != n_sns)
      throw std::invalid_argument("combine: beta size mismatch");

    double quad = 0.0;
    for (int j = 0; j < n_sns; ++j) {
      const double b = beta_sensor[j];
      quad += resid_sq[j] - 2.0 * b * resid_sum[j] + counts[j] * b * b;
    }
    const double n = static_cast<double>(ctx.n_obs());

    TargetEval ev;
    ev.sensor_resid_sq = resid_sq;
    ev.sensor_resid_sum = resid_sum;
    ev.loglik =
        -0.5 * n * std::log(2.0 * M_PI * sigma2) - quad / (2.0 * sigma2);
    if (!std::isfinite(ev.loglik)) return ev;
    const double lp = log_prior_theta(priors, ctx.theta, theta);
    if (!std::isfinite(lp)) return ev;
    ev.logp = ev.loglik + lp;
    return ev;
  }
};

template <int N>
TargetEval eval_with_duals(const ModelContext& ctx, const Priors& priors,
                           const VectorXd& theta, double sigma2,
                           const VectorXd& beta_sensor) {
  const Params<Dual2<N>> params = unpack<Dual2<N>>(
      ctx, theta, [&](int i) { return Dual2<N>::variable(theta[i], i); });

  auto parts = std::make_shared<PartsN<N>>();
  parts->dim = ctx.theta.dim();
  parts->resid_sq.assign(static_cast<std::size_t>(ctx.layout.n_sensors),
                         Dual2<N>(0.0));
  parts->resid_sum.assign(static_cast<std::size_t>(ctx.layout.n_sensors),
                          Dual2<N>(0.0));
  parts->counts =
      VectorXd::Constant(ctx.layout.n_sensors, double(ctx.layout.n_times));

  forward_sweep<Dual2<N>>(ctx, params, [&](int j, int t, const Dual2<N>& m) {
    const auto js = static_cast<std::size_t>(j);
    const Dual2<N> e = Dual2<N>(ctx.data[ctx.layout.row(j, t)]) - m;
    parts->resid_sq[js] += e * e;
    parts->resid_sum[js] += e;
  });

  TargetEval ev = parts->combine(ctx, priors, theta, sigma2, beta_sensor, true);
  ev.parts = std::move(parts);
  return ev;
}

}  // namespace

TargetEval eval_theta(const ModelContext& ctx, const Priors& priors,
                      const VectorXd& theta, double sigma2,
                      const VectorXd& beta_sensor, bool want_derivatives) {
  const int dim = ctx.theta.dim();
  if (theta.size() != dim)
    throw std::invalid_argument("eval_theta: theta dimension mismatch");
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("eval_theta: sigma2 must be > 0");

  // Outside the domain box (or with non-finite coordinates) the posterior is
  // exactly zero; skip the forward sweep entirely.
  TargetEval rejected;
  if (!theta.allFinite()) return rejected;
  if (!std::isfinite(log_prior_theta(priors, ctx.theta, theta))) return rejected;

  if (!want_derivatives) {
    const Params<double> params =
        unpack<double>(ctx, theta, [&](int i) { return theta[i]; });
    auto parts = std::make_shared<PartsD>();
    parts->resid_sq = VectorXd::Zero(ctx.layout.n_sensors);
    parts->resid_sum = VectorXd::Zero(ctx.layout.n_sensors);
    parts->counts =
        VectorXd::Constant(ctx.layout.n_sensors, double(ctx.layout.n_times));
    forward_sweep<double>(ctx, params, [&](int j, int t, double m) {
      const double e = ctx.data[ctx.layout.row(j, t)] - m;
      parts->resid_sq[j] += e * e;
      parts->resid_sum[j] += e;
    });
    TargetEval ev =
        parts->combine(ctx, priors, theta, sigma2, beta_sensor, false);
    ev.parts = std::move(parts);
    return ev;
  }

  if (dim <= 4) return eval_with_duals<4>(ctx, priors, theta, sigma2, beta_sensor);
  if (dim <= 8) return eval_with_duals<8>(ctx, priors, theta, sigma2, beta_sensor);
  if (dim <= 12) return eval_with_duals<12>(ctx, priors, theta, sigma2, beta_sensor);
  if (dim <= 16) return eval_with_duals<16>(ctx, priors, theta, sigma2, beta_sensor);
  throw ConfigError("eval_theta: theta dimension > 16 is not supported");
}

VectorXd forward_mean(const ModelContext& ctx, const VectorXd& theta) {
  if (theta.size() != ctx.theta.dim())
    throw std::invalid_argument("forward_mean: theta dimension mismatch");
  const Params<double> params =
      unpack<double>(ctx, theta, [&](int i) { return theta[i]; });
  VectorXd m = VectorXd::Zero(ctx.n_obs());
  forward_sweep<double>(ctx, params, [&](int j, int t, double v) {
    m[ctx.layout.row(j, t)] = v;
  });
  return m;
}

double log_prior_theta(const Priors& priors, const ThetaLayout& layout,
                       const VectorXd& theta, VectorXd* grad, MatrixXd* hess) {
  const auto gaussian = [&](int index, double mean, double sd) {
    const double z = (theta[index] - mean) / sd;
    if (grad) (*grad)[index] += -z / sd;
    if (hess) (*hess)(index, index) += -1.0 / (sd * sd);
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
  };

  double lp = 0.0;
  for (int i = 0; i < layout.n_sources; ++i) {
    const double x = theta[layout.x_index(i)];
    const double y = theta[layout.y_index(i)];
    if (!priors.in_box(x, y))
      return -std::numeric_limits<double>::infinity();
    lp += gaussian(layout.log_rate_index(i), priors.log_rate_mean,
                   priors.log_rate_sd);
    if (priors.location_sd_x > 0.0)
      lp += gaussian(layout.x_index(i), priors.location_mean_x,
                     priors.location_sd_x);
    if (priors.location_sd_y > 0.0)
      lp += gaussian(layout.y_index(i), priors.location_mean_y,
                     priors.location_sd_y);
  }
  for (int k = 3 * layout.n_sources; k < layout.dim(); ++k)
    lp += gaussian(k, priors.log_dispersion_mean, priors.log_dispersion_sd);
  return lp;
}

}  // namespace plumeinv
