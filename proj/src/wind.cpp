#include "plumeinv/wind.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plumeinv/csv.hpp"
#include "plumeinv/errors.hpp"

namespace plumeinv {

void OUParams::validate() const {
  if (noise_std < 0.0) throw std::invalid_argument("OU: noise_std must be >= 0");
  if (!(rate > 0.0)) throw std::invalid_argument("OU: rate must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("OU: dt must be > 0");
  if (rate * dt >= 1.0)
    throw std::domain_error("OU: unstable discretization, rate*dt must be < 1");
}

std::vector<double> simulate_ou(const OUParams& params, int n_steps, Rng& rng,
                                std::optional<double> init) {
  params.validate();
  if (n_steps < 1) throw std::invalid_argument("OU: n_steps must be >= 1");

  const double decay = 1.0 - params.rate * params.dt;
  const double kick = params.noise_std * std::sqrt(2.0 * params.dt * params.rate);

  std::vector<double> series(static_cast<std::size_t>(n_steps));
  double eta = init.value_or(params.mean) - params.mean;
  series[0] = params.mean + eta;
  for (int i = 1; i < n_steps; ++i) {
    eta = decay * eta + kick * rng.normal();
    series[static_cast<std::size_t>(i)] = params.mean + eta;
  }
  return series;
}

std::vector<double> simulate_ou(const OUParams& params, int n_steps,
                                std::uint64_t seed,
                                std::optional<double> init) {
  Rng rng(seed);
  return simulate_ou(params, n_steps, rng, init);
}

std::vector<double> unwrap_degrees(std::span<const double> direction_deg) {
  std::vector<double> out(direction_deg.begin(), direction_deg.end());
  double offset = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double jump = direction_deg[i] - direction_deg[i - 1];
    if (jump > 180.0) offset -= 360.0;
    else if (jump < -180.0) offset += 360.0;
    out[i] = direction_deg[i] + offset;
  }
  return out;
}

std::vector<double> rolling_direction_std(std::span<const double> direction_deg,
                                          double window_s, double dt) {
  if (direction_deg.empty())
    throw std::invalid_argument("rolling_direction_std: empty series");
  if (!(dt > 0.0) || window_s < dt)
    throw std::invalid_argument("rolling_direction_std: window must be >= dt");

  const std::vector<double> unwrapped = unwrap_degrees(direction_deg);
  const long n = static_cast<long>(unwrapped.size());
  const long k = static_cast<long>(std::ceil(window_s / dt));
  const long before = (k - 1) / 2;
  const long after = k / 2;

  std::vector<double> out(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const long lo = std::max<long>(0, i - before);
    const long hi = std::min<long>(n - 1, i + after);
    const long m = hi - lo + 1;
    double mean = 0.0;
    for (long j = lo; j <= hi; ++j) mean += unwrapped[static_cast<std::size_t>(j)];
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (long j = lo; j <= hi; ++j) {
      const double d = unwrapped[static_cast<std::size_t>(j)] - mean;
      ss += d * d;
    }
    out[static_cast<std::size_t>(i)] =
        std::sqrt(ss / static_cast<double>(m)) * M_PI / 180.0;
  }
  return out;
}

void WindRecord::validate() const {
  const std::size_t n = time.size();
  if (speed.size() != n || direction_deg.size() != n || gamma_h.size() != n ||
      gamma_v.size() != n)
    throw std::invalid_argument("WindRecord: series lengths differ");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(speed[i] > 0.0))
      throw std::invalid_argument("WindRecord: speed must be > 0");
    if (!(gamma_h[i] > 0.0) || !(gamma_v[i] > 0.0))
      throw std::invalid_argument("WindRecord: gammas must be > 0");
  }
}

void WindRecord::save_csv(const std::filesystem::path& file) const {
  CsvWriter w(file);
  w.header({"t", "speed", "direction", "gamma_h", "gamma_v"});
  for (std::size_t i = 0; i < size(); ++i)
    w.row({time[i], speed[i], direction_deg[i], gamma_h[i], gamma_v[i]});
}

WindRecord WindRecord::load_csv(const std::filesystem::path& file) {
  CsvReader r(file);
  r.expect_header({"t", "speed", "direction", "gamma_h", "gamma_v"});
  WindRecord rec;
  while (auto row = r.next_row(5)) {
    rec.time.push_back((*row)[0]);
    rec.speed.push_back((*row)[1]);
    rec.direction_deg.push_back((*row)[2]);
    rec.gamma_h.push_back((*row)[3]);
    rec.gamma_v.push_back((*row)[4]);
  }
  rec.validate();
  return rec;
}

WindRecord synthesize_wind(const WindScenario& sc, std::uint64_t seed) {
  if (!(sc.direction_coverage_deg > 0.0) || sc.direction_coverage_deg > 360.0)
    throw ConfigError("wind scenario: direction coverage must lie in (0, 360]");
  if (!(sc.duration_s > 0.0) || !(sc.dt > 0.0))
    throw ConfigError("wind scenario: duration and dt must be > 0");

  const int n = static_cast<int>(std::llround(sc.duration_s / sc.dt));
  if (n < 1) throw ConfigError("wind scenario: duration shorter than dt");

  Rng rng(seed);

  OUParams speed_p{sc.speed_mean, sc.speed_std, sc.speed_rate, sc.dt};
  std::vector<double> speed = simulate_ou(speed_p, n, rng);
  for (double& u : speed) u = std::max(u, sc.speed_floor);

  // The direction OU runs at a quarter-coverage standard deviation, then the
  // realized series is rescaled to span exactly the target coverage and
  // clipped. Full-circle coverage is left untouched.
  OUParams dir_p{sc.direction_mean_deg, sc.direction_coverage_deg / 4.0,
                 sc.direction_rate, sc.dt};
  std::vector<double> direction = simulate_ou(dir_p, n, rng);
  if (sc.direction_coverage_deg < 360.0) {
    const auto [lo_it, hi_it] = std::minmax_element(direction.begin(), direction.end());
    const double span = *hi_it - *lo_it;
    if (span > 1e-12) {
      const double mid = 0.5 * (*hi_it + *lo_it);
      const double gain = sc.direction_coverage_deg / span;
      const double half = 0.5 * sc.direction_coverage_deg;
      for (double& d : direction) {
        d = sc.direction_mean_deg + (d - mid) * gain;
        d = std::clamp(d, sc.direction_mean_deg - half, sc.direction_mean_deg + half);
      }
    }
  }

  OUParams vert_p{0.0, sc.vertical_std_deg, sc.vertical_rate, sc.dt};
  std::vector<double> vertical = simulate_ou(vert_p, n, rng);

  WindRecord rec;
  rec.time.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rec.time[static_cast<std::size_t>(i)] = i * sc.dt;
  rec.speed = std::move(speed);
  rec.direction_deg = std::move(direction);
  rec.gamma_h = rolling_direction_std(rec.direction_deg, sc.gamma_window_s, sc.dt);
  rec.gamma_v = rolling_direction_std(vertical, sc.gamma_window_s, sc.dt);
  for (double& g : rec.gamma_h) g = std::max(g, sc.gamma_floor);
  for (double& g : rec.gamma_v) g = std::max(g, sc.gamma_floor);
  rec.validate();
  return rec;
}

double circular_mean_deg(std::span<const double> angles_deg) {
  if (angles_deg.empty())
    throw std::invalid_argument("circular_mean_deg: empty input");
  double sx = 0.0, sy = 0.0;
  for (double a : angles_deg) {
    sx += std::cos(a * M_PI / 180.0);
    sy += std::sin(a * M_PI / 180.0);
  }
  double deg = std::atan2(sy, sx) * 180.0 / M_PI;
  if (deg < 0.0) deg += 360.0;
  return deg;
}

}  // namespace plumeinv
