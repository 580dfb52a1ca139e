#include "plumeinv/sensing.hpp"

#include <fstream>

#include "json.hpp"
#include "plumeinv/csv.hpp"
#include "plumeinv/errors.hpp"
#include "plumeinv/rng.hpp"

namespace plumeinv {

using nlohmann::json;

void SensorArray::validate() const {
  if (sensors.empty()) throw std::invalid_argument("sensor array is empty");
  if (!(sample_rate_hz > 0.0))
    throw std::invalid_argument("sample rate must be > 0");
  for (const Sensor& s : sensors) {
    if (s.kind == Sensor::Kind::Point) {
      if (!s.position.allFinite())
        throw std::invalid_argument("sensor " + s.id + ": non-finite position");
    } else {
      if (!s.beam_origin.allFinite() || !s.beam_reflector.allFinite())
        throw std::invalid_argument("sensor " + s.id + ": non-finite beam");
      if (s.beam_origin == s.beam_reflector)
        throw std::invalid_argument("sensor " + s.id + ": zero-length beam");
    }
  }
}

std::vector<Vector3d> beam_receptors(const Vector3d& origin,
                                     const Vector3d& reflector,
                                     double spacing) {
  const double length = (reflector - origin).norm();
  if (length == 0.0)
    throw std::invalid_argument("beam_receptors: zero-length beam");
  if (!(spacing > 0.0) || spacing > length)
    throw std::invalid_argument(
        "beam_receptors: spacing must be in (0, beam length]");

  const int count = static_cast<int>(std::floor(length / spacing)) + 1;
  std::vector<Vector3d> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    points.push_back(origin + f * (reflector - origin));
  }
  return points;
}

std::vector<Vector3d> sensor_receptors(const Sensor& sensor,
                                       double beam_spacing) {
  if (sensor.kind == Sensor::Kind::Point) return {sensor.position};
  return beam_receptors(sensor.beam_origin, sensor.beam_reflector, beam_spacing);
}

CouplingMatrix coupling_matrix(const std::vector<SourceGeometry>& sources,
                               const SensorArray& array, const WindRecord& wind,
                               const DispersionSpec& disp,
                               const AtmosphereSpec& atmos,
                               const AscCoefficientStore* store,
                               double beam_spacing) {
  array.validate();
  wind.validate();
  atmos.validate();
  disp.validate();
  if (sources.empty()) throw std::invalid_argument("no sources");

  const int n_sns = static_cast<int>(array.size());
  const int n_t = static_cast<int>(wind.size());
  const int n_src = static_cast<int>(sources.size());

  CouplingMatrix A;
  A.layout = ObsLayout{n_sns, n_t};
  A.ppm_per_rate.setZero(A.layout.rows(), n_src);

  for (int j = 0; j < n_sns; ++j) {
    const auto receptors = sensor_receptors(array.sensors[j], beam_spacing);
    const double inv_count = 1.0 / static_cast<double>(receptors.size());
    for (int t = 0; t < n_t; ++t) {
      const double u = wind.speed[static_cast<std::size_t>(t)];
      const double dir = wind.direction_deg[static_cast<std::size_t>(t)];
      const double gh = wind.gamma_h[static_cast<std::size_t>(t)];
      const double gv = wind.gamma_v[static_cast<std::size_t>(t)];
      for (int i = 0; i < n_src; ++i) {
        double acc = 0.0;
        for (const Vector3d& p : receptors) {
          ReceptorFrame frame;
          try {
            frame = receptor_frame(p, sources[static_cast<std::size_t>(i)], dir);
            if (frame.upwind || frame.downwind == 0.0) continue;
            const auto sig = wind_sigmas(disp, frame, gh, gv,
                                         sources[static_cast<std::size_t>(i)], store);
            acc += plume_concentration(sources[static_cast<std::size_t>(i)], 1.0,
                                       frame, sig.horizontal, sig.vertical, u,
                                       atmos);
          } catch (const std::exception& e) {
            throw std::invalid_argument(
                "coupling_matrix: sensor " + array.sensors[j].id + ", t=" +
                std::to_string(wind.time[static_cast<std::size_t>(t)]) + ": " +
                e.what());
          }
        }
        A.ppm_per_rate(A.layout.row(j, t), i) = acc * inv_count;
      }
    }
  }
  return A;
}

void BackgroundModel::validate(int n_sensors) const {
  if (mean_ppm.size() != n_sensors || var_ppm2.size() != n_sensors)
    throw std::invalid_argument("background model: size mismatch");
  for (int j = 0; j < n_sensors; ++j)
    if (!(var_ppm2[j] >= 0.0))
      throw std::invalid_argument("background model: negative variance");
}

Eigen::VectorXd BackgroundModel::expand(const ObsLayout& layout) const {
  if (realized_ppm.size() != layout.n_sensors)
    throw std::invalid_argument("background model: realized values missing");
  Eigen::VectorXd full(layout.rows());
  for (int j = 0; j < layout.n_sensors; ++j)
    for (int t = 0; t < layout.n_times; ++t)
      full[layout.row(j, t)] = realized_ppm[j];
  return full;
}

void Observations::validate() const {
  if (layout.rows() != d.size())
    throw std::invalid_argument("observations: d size != layout rows");
  if (static_cast<int>(sensor_ids.size()) != layout.n_sensors)
    throw std::invalid_argument("observations: sensor id count mismatch");
  if (static_cast<int>(times.size()) != layout.n_times)
    throw std::invalid_argument("observations: time count mismatch");
  if (wind.size() != times.size())
    throw std::invalid_argument("observations: wind not aligned to times");
  if (!d.allFinite()) throw std::invalid_argument("observations: non-finite d");
}

Observations synthesize_observations(const CouplingMatrix& A,
                                     const Eigen::VectorXd& rates,
                                     BackgroundModel& bg, double noise_var,
                                     std::uint64_t seed,
                                     const std::vector<std::string>& sensor_ids,
                                     const std::vector<double>& times,
                                     const WindRecord& wind) {
  if (rates.size() != A.ppm_per_rate.cols())
    throw std::invalid_argument("synthesize_observations: rate count mismatch");
  if (!(noise_var > 0.0))
    throw std::invalid_argument("synthesize_observations: noise_var must be > 0");
  bg.validate(A.layout.n_sensors);

  Rng rng(seed);
  bg.realized_ppm.resize(A.layout.n_sensors);
  for (int j = 0; j < A.layout.n_sensors; ++j)
    bg.realized_ppm[j] = rng.normal(bg.mean_ppm[j], std::sqrt(bg.var_ppm2[j]));

  Observations obs;
  obs.layout = A.layout;
  obs.sensor_ids = sensor_ids;
  obs.times = times;
  obs.wind = wind;
  obs.d = A.ppm_per_rate * rates + bg.expand(A.layout);
  const double noise_sd = std::sqrt(noise_var);
  for (int k = 0; k < obs.d.size(); ++k) obs.d[k] += noise_sd * rng.normal();
  obs.validate();
  return obs;
}

void Observations::save_csv(const std::filesystem::path& file) const {
  CsvWriter w(file);
  w.header({"obs_id", "sensor_id", "t", "ppm"});
  for (int j = 0; j < layout.n_sensors; ++j)
    for (int t = 0; t < layout.n_times; ++t) {
      const int k = layout.row(j, t);
      w.cells({std::to_string(k), sensor_ids[static_cast<std::size_t>(j)],
               fmt_double(times[static_cast<std::size_t>(t)]), fmt_double(d[k])});
    }
}

Observations Observations::load_csv(const std::filesystem::path& file,
                                    const WindRecord& wind) {
  CsvReader r(file);
  r.expect_header({"obs_id", "sensor_id", "t", "ppm"});

  std::vector<std::string> ids;
  std::vector<double> times;
  std::vector<double> values;
  while (auto cells = r.next_cells()) {
    if (cells->size() != 4)
      throw ParseError(r.file_name(), r.line_number(), "expected 4 columns");
    try {
      if (ids.empty() || ids.back() != (*cells)[1]) ids.push_back((*cells)[1]);
      const double t = std::stod((*cells)[2]);
      if (ids.size() == 1) times.push_back(t);
      values.push_back(std::stod((*cells)[3]));
    } catch (const std::exception&) {
      throw ParseError(r.file_name(), r.line_number(), "bad number");
    }
  }
  if (values.empty()) throw ParseError(file.filename().string() + ": no rows");

  Observations obs;
  obs.layout = ObsLayout{static_cast<int>(ids.size()),
                         static_cast<int>(times.size())};
  if (static_cast<std::size_t>(obs.layout.rows()) != values.size())
    throw ParseError(file.filename().string() + ": ragged sensor blocks");
  obs.sensor_ids = std::move(ids);
  obs.times = std::move(times);
  obs.wind = wind;
  obs.d = Eigen::Map<Eigen::VectorXd>(values.data(),
                                      static_cast<long>(values.size()));
  obs.validate();
  return obs;
}

// --- SensorArray JSON ------------------------------------------------------

namespace {
json vec3_to_json(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Vector3d vec3_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(where + ": expected [x, y, z]");
  return Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}
}  // namespace

void SensorArray::save_json(const std::filesystem::path& file) const {
  json sensors_j = json::array();
  for (const Sensor& s : sensors) {
    json sj{{"id", s.id}};
    if (s.kind == Sensor::Kind::Point) {
      sj["kind"] = "point";
      sj["position"] = vec3_to_json(s.position);
    } else {
      sj["kind"] = "beam";
      sj["origin"] = vec3_to_json(s.beam_origin);
      sj["reflector"] = vec3_to_json(s.beam_reflector);
    }
    sensors_j.push_back(sj);
  }
  json j{{"sample_rate_hz", sample_rate_hz}, {"sensors", sensors_j}};
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write file: " + file.string());
  out << j.dump(2) << "\n";
}

SensorArray SensorArray::load_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open file: " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(file.filename().string() + ": " + e.what());
  }

  SensorArray array;
  array.sample_rate_hz = j.value("sample_rate_hz", 1.0);
  for (const json& sj : j.at("sensors")) {
    Sensor s;
    s.id = sj.at("id").get<std::string>();
    const std::string kind = sj.at("kind").get<std::string>();
    if (kind == "point") {
      s.kind = Sensor::Kind::Point;
      s.position = vec3_from_json(sj.at("position"), s.id);
    } else if (kind == "beam") {
      s.kind = Sensor::Kind::Beam;
      s.beam_origin = vec3_from_json(sj.at("origin"), s.id);
      s.beam_reflector = vec3_from_json(sj.at("reflector"), s.id);
    } else {
      throw ConfigError("sensor " + s.id + ": unknown kind '" + kind + "'");
    }
    array.sensors.push_back(s);
  }
  array.validate();
  return array;
}

}  // namespace plumeinv
