#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <utility>

#include "plumeinv/asc_tables.hpp"
#include "plumeinv/dual.hpp"
#include "plumeinv/errors.hpp"

namespace plumeinv {

using Vector3d = Eigen::Vector3d;

/// Emitting source: location [m], release height used by the reflection
/// terms [m], and aperture half-extents [m] that enter the sigma formulas.
struct SourceGeometry {
  Vector3d location = Vector3d::Zero();  ///< (x, y, z) [m]
  double height = 0.0;                   ///< release height H [m]
  double half_width = 0.0;               ///< w [m]
  double half_height = 0.0;              ///< h [m]

  void validate() const;
};

struct AtmosphereSpec {
  double abl_height = 1000.0;    ///< boundary-layer lid P [m]
  int n_reflections = 3;         ///< image-source pairs retained
  double gas_density = 0.6682;   ///< rho of the emitted gas [kg/m^3], CH4 at 20 C

  void validate() const;
};

/// Which sigma parameterization is active and its current values.
/// Draxler-style: sigma = a * (deltaR * tan(gamma))^b + aperture half-extent.
/// Smith/Briggs: class-based curves from the coefficient table; the optional
/// smith_scale multipliers support the estimated-Smith variant where the
/// class-B curves are rescaled by positive factors.
struct DispersionSpec {
  DispersionScheme scheme = DispersionScheme::Draxler;

  // Draxler parameters (scheme == Draxler).
  double a_h = 1.0, b_h = 1.0, a_v = 1.0, b_v = 1.0;

  // Table schemes (scheme == Smith or Briggs).
  AscClass asc_class = AscClass::B;
  std::optional<std::pair<double, double>> smith_scale;  ///< (scale_h, scale_v)

  void validate() const;
};

/// Receptor position expressed in the wind-aligned frame of one source.
struct ReceptorFrame {
  double downwind = 0.0;   ///< deltaR [m], along the wind bearing
  double crosswind = 0.0;  ///< deltaH [m], horizontal, perpendicular
  double vertical = 0.0;   ///< deltaV = z_receptor - z_source [m]
  bool upwind = false;     ///< true exactly when downwind < 0
};

/// Wind-aligned coordinates of a receptor relative to a source.
///
/// Wind direction is degrees mathematical: measured counterclockwise from
/// east (+x), naming the bearing the wind blows TOWARD. A receptor due east
/// of the source under a 0 degree wind is exactly downwind.
ReceptorFrame receptor_frame(const Vector3d& receptor,
                             const SourceGeometry& source,
                             double wind_direction_deg);

inline constexpr double kSigmaFloor = 1e-6;  // [m], guards 1/sigma overflow

// ---------------------------------------------------------------------------
// Scalar-generic kernels. S is double for plain evaluation or Dual2<N> when
// derivatives with respect to source/dispersion parameters are needed.
// ---------------------------------------------------------------------------

template <class S>
struct SigmaPair {
  S horizontal;
  S vertical;
};

template <class S>
S floor_sigma(const S& s) {
  return value_of(s) < kSigmaFloor ? S(kSigmaFloor) : s;
}

/// Draxler-style sigmas at downwind distance `downwind` [m] for wind
/// variability angles gamma [rad].
template <class S>
SigmaPair<S> draxler_sigmas(const S& a_h, const S& b_h, const S& a_v,
                            const S& b_v, const S& downwind, double tan_gamma_h,
                            double tan_gamma_v, double half_width,
                            double half_height) {
  using std::pow;
  SigmaPair<S> s;
  s.horizontal = floor_sigma(a_h * pow(downwind * tan_gamma_h, b_h) + half_width);
  s.vertical = floor_sigma(a_v * pow(downwind * tan_gamma_v, b_v) + half_height);
  return s;
}

/// Class-based sigmas from the coefficient table, optionally rescaled
/// (estimated-Smith mode).
template <class S>
SigmaPair<S> table_sigmas(const AscEntry& entry, const S& downwind,
                          const S& scale_h, const S& scale_v) {
  SigmaPair<S> s;
  s.horizontal = floor_sigma(scale_h * entry.sigma_h.eval(downwind));
  s.vertical = floor_sigma(scale_v * entry.sigma_v.eval(downwind));
  return s;
}

/// Reflected Gaussian plume concentration [PPM].
///
/// Evaluates the closed-form plume with a ground plane and an impermeable
/// boundary-layer lid at height P: the direct vertical term plus
/// n_reflections image pairs with the floor-indexed offsets
///   2*floor((j+1)/2)*P + (-1)^j     * (deltaV + H) - H
///   2*floor(j/2)*P     + (-1)^(j-1) * (deltaV + H) + H
/// for j = 1..n_reflections. The caller handles the upwind rule; this kernel
/// assumes the receptor is downwind or crosswind of the source.
template <class S>
S plume_ppm(const S& rate, const S& crosswind, double vertical,
            const S& sigma_h, const S& sigma_v, double wind_speed,
            double source_height, const AtmosphereSpec& atmos) {
  using std::exp;

  const double P = atmos.abl_height;
  const double H = source_height;
  const double dv = vertical;

  const S inv_sv2 = 0.5 / (sigma_v * sigma_v);
  S vertical_sum = exp(-(dv * dv) * inv_sv2);
  for (int j = 1; j <= atmos.n_reflections; ++j) {
    const double sj = (j % 2 == 0) ? 1.0 : -1.0;  // (-1)^j
    const double t1 = 2.0 * ((j + 1) / 2) * P + sj * (dv + H) - H;
    const double t2 = 2.0 * (j / 2) * P - sj * (dv + H) + H;
    vertical_sum += exp(-(t1 * t1) * inv_sv2);
    vertical_sum += exp(-(t2 * t2) * inv_sv2);
  }

  const double unit = 1e6 / atmos.gas_density;  // kg/m^3 -> PPM
  const S gauss_h = exp(-(crosswind * crosswind) / (2.0 * sigma_h * sigma_h));
  return unit * rate / (2.0 * M_PI * wind_speed * sigma_h * sigma_v) * gauss_h *
         vertical_sum;
}

// ---------------------------------------------------------------------------
// Concrete operations.
// ---------------------------------------------------------------------------

/// Sigma pair for a downwind receptor. Throws std::domain_error for
/// non-downwind frames or gamma outside (0, pi/2); table schemes require a
/// coefficient store.
SigmaPair<double> wind_sigmas(const DispersionSpec& spec,
                              const ReceptorFrame& frame, double gamma_h,
                              double gamma_v, const SourceGeometry& source,
                              const AscCoefficientStore* store = nullptr);

/// Plume concentration [PPM] at a receptor given precomputed sigmas.
/// Returns exactly 0 for upwind frames and for zero emission rate.
double plume_concentration(const SourceGeometry& source, double rate,
                           const ReceptorFrame& frame, double sigma_h,
                           double sigma_v, double wind_speed,
                           const AtmosphereSpec& atmos);

}  // namespace plumeinv
