#include "plumeinv/plume.hpp"

#include <stdexcept>

namespace plumeinv {

void SourceGeometry::validate() const {
  if (!location.allFinite())
    throw std::invalid_argument("source location must be finite");
  if (height < 0.0) throw std::invalid_argument("source height must be >= 0");
  if (half_width < 0.0 || half_height < 0.0)
    throw std::invalid_argument("source half-extents must be >= 0");
}

void AtmosphereSpec::validate() const {
  if (!(abl_height > 0.0) || !std::isfinite(abl_height))
    throw std::invalid_argument("ABL height must be positive and finite");
  if (n_reflections < 0)
    throw std::invalid_argument("reflection count must be >= 0");
  if (!(gas_density > 0.0))
    throw std::invalid_argument("gas density must be > 0");
}

void DispersionSpec::validate() const {
  if (scheme == DispersionScheme::Draxler) {
    // b_h, b_v <= 1 is deliberately NOT enforced; exponents above one are a
    // model-misspecification signal surfaced by the diagnostics, not an error.
    if (!(a_h > 0.0 && b_h > 0.0 && a_v > 0.0 && b_v > 0.0))
      throw std::invalid_argument("Draxler parameters must be > 0");
  }
  if (smith_scale) {
    if (!(smith_scale->first > 0.0 && smith_scale->second > 0.0))
      throw std::invalid_argument("Smith scale factors must be > 0");
  }
}

ReceptorFrame receptor_frame(const Vector3d& receptor,
                             const SourceGeometry& source,
                             double wind_direction_deg) {
  if (!receptor.allFinite() || !source.location.allFinite() ||
      !std::isfinite(wind_direction_deg))
    throw std::invalid_argument("receptor_frame: non-finite input");
  if (receptor == source.location)
    throw std::invalid_argument("receptor_frame: receptor at source location");

  const double phi = wind_direction_deg * M_PI / 180.0;
  const double ex = std::cos(phi), ey = std::sin(phi);
  const Vector3d rel = receptor - source.location;

  ReceptorFrame f;
  f.downwind = rel.x() * ex + rel.y() * ey;
  f.crosswind = -rel.x() * ey + rel.y() * ex;
  f.vertical = rel.z();
  f.upwind = f.downwind < 0.0;
  return f;
}

SigmaPair<double> wind_sigmas(const DispersionSpec& spec,
                              const ReceptorFrame& frame, double gamma_h,
                              double gamma_v, const SourceGeometry& source,
                              const AscCoefficientStore* store) {
  if (!(frame.downwind > 0.0))
    throw std::domain_error(
        "wind_sigmas: receptor not downwind (apply the upwind rule first)");

  switch (spec.scheme) {
    case DispersionScheme::Draxler: {
      if (!(gamma_h > 0.0 && gamma_h < M_PI_2 && gamma_v > 0.0 && gamma_v < M_PI_2))
        throw std::domain_error("wind_sigmas: gamma must lie in (0, pi/2)");
      return draxler_sigmas(spec.a_h, spec.b_h, spec.a_v, spec.b_v,
                            frame.downwind, std::tan(gamma_h),
                            std::tan(gamma_v), source.half_width,
                            source.half_height);
    }
    case DispersionScheme::Smith:
    case DispersionScheme::Briggs: {
      if (store == nullptr)
        throw ConfigError("wind_sigmas: table scheme requires a coefficient store");
      const AscEntry& entry = store->entry(spec.scheme, spec.asc_class);
      const double sh = spec.smith_scale ? spec.smith_scale->first : 1.0;
      const double sv = spec.smith_scale ? spec.smith_scale->second : 1.0;
      return table_sigmas(entry, frame.downwind, sh, sv);
    }
  }
  throw ConfigError("wind_sigmas: unknown scheme");
}

double plume_concentration(const SourceGeometry& source, double rate,
                           const ReceptorFrame& frame, double sigma_h,
                           double sigma_v, double wind_speed,
                           const AtmosphereSpec& atmos) {
  if (!(wind_speed > 0.0))
    throw std::domain_error("plume_concentration: wind speed must be > 0");
  if (!(sigma_h > 0.0) || !(sigma_v > 0.0))
    throw std::domain_error("plume_concentration: sigmas must be > 0");
  if (rate < 0.0)
    throw std::invalid_argument("plume_concentration: rate must be >= 0");
  if (!(atmos.abl_height > source.height))
    throw std::invalid_argument(
        "plume_concentration: ABL height must exceed the release height");

  if (frame.upwind || rate == 0.0) return 0.0;
  return plume_ppm(rate, frame.crosswind, frame.vertical,
                   floor_sigma(sigma_h), floor_sigma(sigma_v), wind_speed,
                   source.height, atmos);
}

}  // namespace plumeinv
