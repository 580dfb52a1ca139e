#pragma once

#include <filesystem>

#include "plumeinv/sensing.hpp"

namespace plumeinv {

/// Ingestion of raw open-path beam data in the intermediate CSV layout:
///   <dir>/concentrations.csv  time,beam_id,ppm     (one row per beam scan)
///   <dir>/anemometer.csv      time,speed,direction_deg,elevation_deg
///   <dir>/sensors.json        SensorArray (beam geometry)
/// Raw scans are aggregated into tumbling windows; a window survives only if
/// every beam reported at least one scan in it, so the observation vector
/// stays rectangular (n_obs = n_beams * n_windows).
struct IngestOptions {
  double window_s = 60.0;       ///< tumbling aggregation window
  double gamma_floor = 1e-4;    ///< [rad]
  double speed_floor = 0.1;     ///< [m/s]
};

struct IngestResult {
  Observations obs;
  SensorArray array;
  int windows_dropped = 0;    ///< windows discarded for missing beams
  int missing_pairs = 0;      ///< (beam, window) gaps encountered
};

IngestResult ingest_chilbolton(const std::filesystem::path& dir,
                               const IngestOptions& options = {});

}  // namespace plumeinv
