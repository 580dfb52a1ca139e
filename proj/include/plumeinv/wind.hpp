#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "plumeinv/rng.hpp"

namespace plumeinv {

/// Euler-Maruyama discretization of a mean-reverting OU process,
///   eta(t+dt) = eta(t) - rate*dt*eta(t) + nu_t * noise_std * sqrt(2*dt*rate)
/// applied to the deviation eta from `mean`.
struct OUParams {
  double mean = 0.0;
  double noise_std = 0.0;   ///< xi, stationary-scale standard deviation
  double rate = 1.0;        ///< Theta [1/s]
  double dt = 1.0;          ///< [s]; requires rate * dt < 1 for stability

  void validate() const;
};

/// Simulates n_steps samples; series[0] is `init` (default: the mean).
/// Deterministic for a fixed seed.
std::vector<double> simulate_ou(const OUParams& params, int n_steps,
                                std::uint64_t seed,
                                std::optional<double> init = {});
std::vector<double> simulate_ou(const OUParams& params, int n_steps, Rng& rng,
                                std::optional<double> init = {});

/// Centered rolling standard deviation of a wind-direction series [deg] over
/// ceil(window/dt) samples, computed on unwrapped angles and returned in
/// radians. Series edges use the available partial window.
std::vector<double> rolling_direction_std(std::span<const double> direction_deg,
                                          double window_s, double dt);

/// Unwraps an angle series so consecutive samples never jump more than 180
/// degrees; result differs from the input by multiples of 360 per sample.
std::vector<double> unwrap_degrees(std::span<const double> direction_deg);

/// Time series of wind conditions driving the plume model: speed [m/s],
/// direction [deg mathematical], and the rolling direction-variability
/// angles gamma_h / gamma_v [rad] consumed by the sigma formulas.
struct WindRecord {
  std::vector<double> time;           ///< [s]
  std::vector<double> speed;          ///< [m/s], > 0 entrywise
  std::vector<double> direction_deg;  ///< degrees mathematical
  std::vector<double> gamma_h;        ///< [rad], > 0 entrywise
  std::vector<double> gamma_v;        ///< [rad], > 0 entrywise

  std::size_t size() const { return time.size(); }
  void validate() const;

  void save_csv(const std::filesystem::path& file) const;
  static WindRecord load_csv(const std::filesystem::path& file);
};

/// Scenario knobs for synthetic wind generation.
struct WindScenario {
  double duration_s = 100.0;
  double dt = 1.0;
  double speed_mean = 6.0;        ///< [m/s]
  double speed_std = 0.5;         ///< [m/s]
  double speed_rate = 0.1;        ///< Theta for the speed OU [1/s]
  double direction_mean_deg = 0.0;
  double direction_coverage_deg = 140.0;  ///< target span, in (0, 360]
  double direction_rate = 0.1;
  double vertical_std_deg = 5.0;  ///< drives the synthetic gamma_v series
  double vertical_rate = 0.5;
  double gamma_window_s = 60.0;   ///< rolling-std window for both gammas

  double speed_floor = 0.1;   ///< [m/s], the plume divides by speed
  double gamma_floor = 1e-4;  ///< [rad], tan(gamma) must stay positive
};

/// Generates a WindRecord whose direction span matches the configured
/// coverage: the direction OU output is rescaled to the exact target span and
/// clipped; full 360 coverage leaves the raw series untouched. The gamma_v
/// series is synthetic (an independent OU rolling std) since only horizontal
/// direction data exists at a single anemometer.
WindRecord synthesize_wind(const WindScenario& scenario, std::uint64_t seed);

/// Circular mean of angles in degrees, range [0, 360).
double circular_mean_deg(std::span<const double> angles_deg);

}  // namespace plumeinv
