#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risdet/channel.hpp"
#include "risdet/sensing.hpp"

namespace risdet {

/// Every scalar parameter of a simulated deployment. Defaults reproduce the
/// reference scenario; load_config overrides them from a flat JSON object
/// (all angles in degrees there, converted to radians here).
struct ScenarioConfig {
  channel::ScenarioGeometry geometry;

  int symbols = 5;
  double sigma2 = 1.0;
  double transmit_power = 1.0;
  double gamma_th = 10.0;
  sensing::RcsVariances betas{0.1, 4.0, 1.0};
  double alpha = 1e-3;
  double cnr_db = 20.0;
  std::vector<double> snr_grid_db = {-55.0, -50.0, -45.0, -40.0,
                                     -35.0, -30.0, -25.0};
  double rician_kappa_db = 10.0;     // LOS power / NLOS trace budget
  double ris_element_gain_db = -10.0;
  double ue_gain_db = 0.0;           // P_t * gain / sigma2 at the UE
  double clutter_energy_fraction = 0.99;
  long long clutter_rank = -1;       // fixed subspace rank; -1 = energy rule
  int trials_calibration = 200000;
  int trials_detection = 10000;
  std::uint64_t master_seed = 1;
  int threads = 0;                   // 0 = hardware concurrency

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

ScenarioConfig default_config();

/// Reads a flat JSON object; keys not present keep their defaults, unknown
/// keys are rejected.
ScenarioConfig load_config(const std::string& path);

/// The default configuration serialized as the flat JSON document
/// load_config expects.
std::string default_config_json();

}  // namespace risdet
