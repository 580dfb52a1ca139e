#include "plumeinv/chilbolton.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "plumeinv/csv.hpp"
#include "plumeinv/errors.hpp"

namespace plumeinv {

namespace {

struct Scan {
  double time;
  int beam;  // index into the sensor array
  double ppm;
};

struct Anemo {
  std::vector<double> time, speed, direction, elevation;
};

Anemo read_anemometer(const std::filesystem::path& file) {
  CsvReader r(file);
  r.expect_header({"time", "speed", "direction_deg", "elevation_deg"});
  Anemo a;
  while (auto row = r.next_row(4)) {
    a.time.push_back((*row)[0]);
    a.speed.push_back((*row)[1]);
    a.direction.push_back((*row)[2]);
    a.elevation.push_back((*row)[3]);
  }
  if (a.time.size() < 2)
    throw ParseError(file.filename().string() + ": need at least two samples");
  return a;
}

}  // namespace

IngestResult ingest_chilbolton(const std::filesystem::path& dir,
                               const IngestOptions& opt) {
  if (!(opt.window_s > 0.0))
    throw ConfigError("ingest: aggregation window must be > 0");

  IngestResult result;
  result.array = SensorArray::load_json(dir / "sensors.json");
  const int n_beams = static_cast<int>(result.array.size());

  std::map<std::string, int> beam_index;
  for (int j = 0; j < n_beams; ++j)
    beam_index[result.array.sensors[static_cast<std::size_t>(j)].id] = j;

  // Raw beam scans.
  std::vector<Scan> scans;
  {
    CsvReader r(dir / "concentrations.csv");
    r.expect_header({"time", "beam_id", "ppm"});
    while (auto cells = r.next_cells()) {
      if (cells->size() != 3)
        throw ParseError(r.file_name(), r.line_number(), "expected 3 columns");
      const auto it = beam_index.find((*cells)[1]);
      if (it == beam_index.end())
        throw ParseError(r.file_name(), r.line_number(),
                         "unknown beam id '" + (*cells)[1] + "'");
      try {
        scans.push_back({std::stod((*cells)[0]), it->second, std::stod((*cells)[2])});
      } catch (const std::exception&) {
        throw ParseError(r.file_name(), r.line_number(), "bad number");
      }
    }
  }
  if (scans.empty()) throw ParseError("concentrations.csv: no scans");

  const Anemo anemo = read_anemometer(dir / "anemometer.csv");

  // Tumbling windows indexed by floor(t / window).
  const auto window_of = [&](double t) {
    return static_cast<long>(std::floor(t / opt.window_s));
  };

  std::map<long, std::vector<std::pair<double, int>>> window_ppm_count;
  for (const Scan& s : scans) {
    auto& acc = window_ppm_count[window_of(s.time)];
    if (acc.empty()) acc.assign(static_cast<std::size_t>(n_beams), {0.0, 0});
    acc[static_cast<std::size_t>(s.beam)].first += s.ppm;
    acc[static_cast<std::size_t>(s.beam)].second += 1;
  }

  // Direction variability from the raw anemometer series, then averaged per
  // window. Sample spacing is taken as the median timestamp increment.
  std::vector<double> diffs(anemo.time.size() - 1);
  for (std::size_t i = 0; i + 1 < anemo.time.size(); ++i)
    diffs[i] = anemo.time[i + 1] - anemo.time[i];
  std::nth_element(diffs.begin(), diffs.begin() + static_cast<long>(diffs.size()) / 2,
                   diffs.end());
  const double dt_raw = diffs[diffs.size() / 2];
  if (!(dt_raw > 0.0))
    throw ParseError("anemometer.csv: non-increasing timestamps");

  const std::vector<double> gamma_h_raw =
      rolling_direction_std(anemo.direction, opt.window_s, dt_raw);
  const std::vector<double> gamma_v_raw =
      rolling_direction_std(anemo.elevation, opt.window_s, dt_raw);

  // Keep only windows where every beam reported and wind data exists.
  std::vector<long> kept;
  for (const auto& [w, acc] : window_ppm_count) {
    bool complete = true;
    for (const auto& [sum, count] : acc) {
      if (count == 0) {
        complete = false;
        ++result.missing_pairs;
      }
    }
    if (!complete) {
      ++result.windows_dropped;
      continue;
    }

    bool has_wind = false;
    for (double t : anemo.time)
      if (window_of(t) == w) { has_wind = true; break; }
    if (!has_wind) {
      ++result.windows_dropped;
      continue;
    }
    kept.push_back(w);
  }
  if (kept.empty())
    throw ParseError("ingest: no complete aggregation windows");

  const int n_t = static_cast<int>(kept.size());
  Observations obs;
  obs.layout = ObsLayout{n_beams, n_t};
  obs.d.resize(obs.layout.rows());
  obs.sensor_ids.clear();
  for (const Sensor& s : result.array.sensors) obs.sensor_ids.push_back(s.id);

  obs.times.resize(static_cast<std::size_t>(n_t));
  obs.wind.time.resize(static_cast<std::size_t>(n_t));
  obs.wind.speed.resize(static_cast<std::size_t>(n_t));
  obs.wind.direction_deg.resize(static_cast<std::size_t>(n_t));
  obs.wind.gamma_h.resize(static_cast<std::size_t>(n_t));
  obs.wind.gamma_v.resize(static_cast<std::size_t>(n_t));

  for (int ti = 0; ti < n_t; ++ti) {
    const long w = kept[static_cast<std::size_t>(ti)];
    const auto& acc = window_ppm_count.at(w);
    for (int j = 0; j < n_beams; ++j) {
      const auto& [sum, count] = acc[static_cast<std::size_t>(j)];
      obs.d[obs.layout.row(j, ti)] = sum / count;
    }

    double speed_sum = 0.0, gh_sum = 0.0, gv_sum = 0.0;
    std::vector<double> dirs;
    int n_in = 0;
    for (std::size_t i = 0; i < anemo.time.size(); ++i) {
      if (window_of(anemo.time[i]) != w) continue;
      speed_sum += anemo.speed[i];
      gh_sum += gamma_h_raw[i];
      gv_sum += gamma_v_raw[i];
      dirs.push_back(anemo.direction[i]);
      ++n_in;
    }
    const double center = (static_cast<double>(w) + 0.5) * opt.window_s;
    obs.times[static_cast<std::size_t>(ti)] = center;
    obs.wind.time[static_cast<std::size_t>(ti)] = center;
    obs.wind.speed[static_cast<std::size_t>(ti)] =
        std::max(speed_sum / n_in, opt.speed_floor);
    obs.wind.direction_deg[static_cast<std::size_t>(ti)] = circular_mean_deg(dirs);
    obs.wind.gamma_h[static_cast<std::size_t>(ti)] =
        std::max(gh_sum / n_in, opt.gamma_floor);
    obs.wind.gamma_v[static_cast<std::size_t>(ti)] =
        std::max(gv_sum / n_in, opt.gamma_floor);
  }

  obs.validate();
  result.obs = std::move(obs);
  return result;
}

}  // namespace plumeinv
