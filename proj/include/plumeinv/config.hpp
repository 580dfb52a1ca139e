#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "plumeinv/chain.hpp"
#include "plumeinv/sensing.hpp"

namespace plumeinv {

enum class SensorLayoutKind { Line, Grid, SparseLine };
enum class FactorLevel { L, M, H };

std::string to_string(SensorLayoutKind k);
std::string to_string(FactorLevel l);
SensorLayoutKind sensor_layout_from_string(const std::string& s);
FactorLevel factor_level_from_string(const std::string& s);

struct DraxlerParams {
  double a_h = 1.0, b_h = 1.0, a_v = 1.0, b_v = 1.0;
};

/// The six experimental factors of the main-effects design.
struct FactorLevels {
  FactorLevel wdc = FactorLevel::M;  ///< wind direction coverage
  FactorLevel dpv = FactorLevel::M;  ///< dispersion parameter values
  FactorLevel ser = FactorLevel::M;  ///< source emission rate
  FactorLevel dts = FactorLevel::M;  ///< source-to-sensor distance
  FactorLevel ops = FactorLevel::M;  ///< observations per sensor
  FactorLevel sl = FactorLevel::M;   ///< sensor layout
};

/// Level definitions. Coverage, rates, and dispersion cases carry the
/// published study values; distances and sample counts are configurable
/// defaults (the study's exact axis values live in supplementary material).
struct LevelTables {
  std::array<double, 3> wdc_deg{60.0, 140.0, 360.0};
  std::array<DraxlerParams, 3> dpv{
      DraxlerParams{1.4, 0.9, 1.2, 0.95},   // case 1
      DraxlerParams{1.0, 1.0, 1.0, 1.0},    // case 2
      DraxlerParams{0.9, 0.8, 0.7, 0.85}};  // case 3
  std::array<double, 3> ser_kg_s{0.000195, 0.00039, 0.00078};
  std::array<double, 3> dts_m{25.0, 50.0, 100.0};
  std::array<int, 3> ops{50, 100, 200};
  std::array<SensorLayoutKind, 3> sl{SensorLayoutKind::Line,
                                     SensorLayoutKind::Grid,
                                     SensorLayoutKind::SparseLine};
};

/// Complete synthetic-scenario description; defaults are the mid (M) levels:
/// source at (50, 50, 5) m in a 110 m x 110 m domain, 0.00039 kg/s, 36
/// sensors, 100 observations per sensor at 1 Hz, noise variance 1e-6 PPM^2,
/// 6 m/s mean wind over a 140-degree direction range.
struct ScenarioConfig {
  FactorLevels factors;
  LevelTables levels;

  double source_x = 50.0, source_y = 50.0, source_z = 5.0;
  double source_height = 5.0;
  double half_width = 1.0, half_height = 1.0;

  double box_x_lo = 0.0, box_x_hi = 110.0;
  double box_y_lo = 0.0, box_y_hi = 110.0;

  AtmosphereSpec atmosphere;
  WindScenario wind;  ///< duration is overridden by the OPS factor

  double background_mean_ppm = 1.9;
  double background_var_ppm2 = 0.01;
  double noise_var_ppm2 = 1e-6;

  double sensor_span_m = 50.0;  ///< crosswind extent of the layouts
  double line_z_m = 1.0;
  double grid_z_lo_m = 0.0, grid_z_hi_m = 10.0;

  std::uint64_t seed = 1;

  double wdc() const { return levels.wdc_deg[idx(factors.wdc)]; }
  DraxlerParams dpv() const { return levels.dpv[idx(factors.dpv)]; }
  double ser() const { return levels.ser_kg_s[idx(factors.ser)]; }
  double dts() const { return levels.dts_m[idx(factors.dts)]; }
  int ops() const { return levels.ops[idx(factors.ops)]; }
  SensorLayoutKind sl() const { return levels.sl[idx(factors.sl)]; }

  static std::size_t idx(FactorLevel l) { return static_cast<std::size_t>(l); }
};

/// Settings for one inversion run: which dispersion model is sampled, the
/// fixed values of anything not estimated, priors, and sampler controls.
struct InversionConfig {
  DispersionScheme scheme = DispersionScheme::Draxler;
  std::array<bool, 4> estimate_draxler{true, true, true, true};
  DraxlerParams fixed_draxler;
  AscClass asc_class = AscClass::B;
  bool estimate_smith_scale = false;

  SamplerConfig sampler;
  Priors priors;  ///< beta_mean/beta_var empty: filled per dataset

  double background_prior_mean_ppm = 1.9;
  double background_prior_var_ppm2 = 0.01;

  /// Fixed source geometry; NaN means "take it from the dataset ground
  /// truth when available, else 0".
  double source_z = std::numeric_limits<double>::quiet_NaN();
  double source_height = std::numeric_limits<double>::quiet_NaN();
  double half_width = 1.0, half_height = 1.0;
  int n_sources = 1;
  double beam_spacing_m = 0.4;
};

struct RunConfig {
  ScenarioConfig scenario;
  InversionConfig inversion;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
};

/// Iteration-count presets; data-shaping factors are untouched.
enum class ScalePreset { Paper, Desk, Ci };
ScalePreset scale_preset_from_string(const std::string& s);
void apply_scale(ScalePreset preset, SamplerConfig& sampler);

/// Simulated ground truth written next to each synthetic dataset.
struct GroundTruth {
  double source_x = 0.0, source_y = 0.0, source_z = 0.0;
  double source_height = 0.0;
  double half_width = 1.0, half_height = 1.0;
  double rate_kg_s = 0.0;
  DraxlerParams dispersion;
  double noise_var_ppm2 = 0.0;
  double box_x_lo = 0.0, box_x_hi = 0.0, box_y_lo = 0.0, box_y_hi = 0.0;
  AtmosphereSpec atmosphere;
  std::vector<double> background_ppm;  ///< realized, per sensor

  void save_json(const std::filesystem::path& file) const;
  static GroundTruth load_json(const std::filesystem::path& file);
};

/// FNV-1a hash of a canonical JSON dump, for run manifests.
std::string config_hash(const nlohmann::json& j);

/// Writes manifest.json (command, config, hash, seed, version, timestamp).
/// The timestamp is the only non-deterministic field.
void write_manifest(const std::filesystem::path& out_dir,
                    const std::string& command, const nlohmann::json& config,
                    std::uint64_t seed);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace plumeinv
