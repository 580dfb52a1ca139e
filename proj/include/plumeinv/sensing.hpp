#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "plumeinv/plume.hpp"
#include "plumeinv/wind.hpp"

namespace plumeinv {

struct Sensor {
  enum class Kind { Point, Beam };

  std::string id;
  Kind kind = Kind::Point;
  Vector3d position = Vector3d::Zero();        ///< point sensors
  Vector3d beam_origin = Vector3d::Zero();     ///< beam sensors
  Vector3d beam_reflector = Vector3d::Zero();  ///< beam sensors
};

struct SensorArray {
  std::vector<Sensor> sensors;
  double sample_rate_hz = 1.0;

  std::size_t size() const { return sensors.size(); }
  void validate() const;

  void save_json(const std::filesystem::path& file) const;
  static SensorArray load_json(const std::filesystem::path& file);
};

/// Evenly spaced points along a beam segment, endpoints included;
/// count = floor(length/spacing) + 1.
std::vector<Vector3d> beam_receptors(const Vector3d& origin,
                                     const Vector3d& reflector, double spacing);

/// Receptor points a sensor integrates over: the point itself, or the beam
/// discretization whose arithmetic mean models the path average.
std::vector<Vector3d> sensor_receptors(const Sensor& sensor,
                                       double beam_spacing = 0.4);

/// Row ordering of stacked observations: sensor-major, time-minor, matching
/// d = (d_1^T, ..., d_nsns^T)^T.
struct ObsLayout {
  int n_sensors = 0;
  int n_times = 0;

  int rows() const { return n_sensors * n_times; }
  int row(int sensor, int t) const { return sensor * n_times + t; }
  int sensor_of(int row) const { return row / n_times; }
  int time_of(int row) const { return row % n_times; }
};

/// n_obs x n_src plume responses at unit emission rate [PPM per kg/s].
struct CouplingMatrix {
  Eigen::MatrixXd ppm_per_rate;
  ObsLayout layout;
};

/// Assembles the coupling matrix for the given sources, sensor array, and
/// per-time wind conditions. Beam sensors average their receptor points;
/// upwind receptors contribute exactly zero. Table schemes need `store`.
CouplingMatrix coupling_matrix(const std::vector<SourceGeometry>& sources,
                               const SensorArray& array, const WindRecord& wind,
                               const DispersionSpec& disp,
                               const AtmosphereSpec& atmos,
                               const AscCoefficientStore* store = nullptr,
                               double beam_spacing = 0.4);

/// Per-sensor background prior and one realized value per sensor; the
/// realized background is constant across time within a sensor.
struct BackgroundModel {
  Eigen::VectorXd mean_ppm;      ///< prior mean, per sensor
  Eigen::VectorXd var_ppm2;      ///< diagonal prior variance, per sensor
  Eigen::VectorXd realized_ppm;  ///< drawn values, per sensor (may be empty)

  void validate(int n_sensors) const;
  /// Expands the realized per-sensor values to an n_obs vector.
  Eigen::VectorXd expand(const ObsLayout& layout) const;
};

struct Observations {
  Eigen::VectorXd d;  ///< [PPM], layout.rows() entries
  ObsLayout layout;
  std::vector<std::string> sensor_ids;
  std::vector<double> times;  ///< [s], n_times entries
  WindRecord wind;            ///< aligned: one entry per observation time

  void validate() const;
  void save_csv(const std::filesystem::path& file) const;
  static Observations load_csv(const std::filesystem::path& file,
                               const WindRecord& wind);
};

/// d = A s + beta + eps with beta drawn once per sensor from the background
/// prior and replicated over time, eps iid N(0, noise_var). Fills
/// bg.realized_ppm. Deterministic for a fixed seed (backgrounds drawn in
/// sensor order, then noise in row order).
Observations synthesize_observations(const CouplingMatrix& A,
                                     const Eigen::VectorXd& rates,
                                     BackgroundModel& bg, double noise_var,
                                     std::uint64_t seed,
                                     const std::vector<std::string>& sensor_ids,
                                     const std::vector<double>& times,
                                     const WindRecord& wind);

}  // namespace plumeinv
