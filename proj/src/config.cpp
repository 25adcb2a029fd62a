#include "risdet/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "risdet/errors.hpp"

namespace risdet {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

channel::ScenarioGeometry reference_geometry() {
  channel::ScenarioGeometry g;
  g.transceiver = {6, 6};
  g.ris = {8, 8};
  g.ue_from_bs = channel::Direction(60.0 * kDeg, -36.0 * kDeg);
  g.target_from_bs = channel::Direction(30.0 * kDeg, -36.0 * kDeg);
  g.ris_from_bs = channel::Direction(-45.0 * kDeg, 0.0);
  g.ue_from_ris = channel::Direction(0.0, -36.0 * kDeg);
  g.target_from_ris = channel::Direction(-45.0 * kDeg, -36.0 * kDeg);
  g.bs_from_ris = channel::Direction(45.0 * kDeg, 0.0);
  g.clusters = 6;
  g.channel_az_spread = 40.0 * kDeg;
  g.channel_el_spread = 20.0 * kDeg;
  g.channel_asd = 10.0 * kDeg;
  g.clutter_az_spread = 20.0 * kDeg;
  g.clutter_el_spread = 10.0 * kDeg;
  g.clutter_asd = 5.0 * kDeg;
  g.scattering_samples = 100000;
  return g;
}

}  // namespace

ScenarioConfig default_config() {
  ScenarioConfig cfg;
  cfg.geometry = reference_geometry();
  return cfg;
}

void ScenarioConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (geometry.transceiver.horizontal < 1 || geometry.transceiver.vertical < 1)
    fail("config: transceiver array counts must be positive");
  if (geometry.ris.horizontal < 1 || geometry.ris.vertical < 1)
    fail("config: ris array counts must be positive");
  if (geometry.clusters < 1) fail("config: clusters must be positive");
  if (geometry.scattering_samples < 10000)
    fail("config: scattering_samples must be at least 1e4");
  if (symbols < 1) fail("config: symbols must be positive");
  if (!(sigma2 > 0.0)) fail("config: sigma2 must be positive");
  if (!(transmit_power > 0.0)) fail("config: transmit_power must be positive");
  if (gamma_th < 0.0) fail("config: gamma_th must be nonnegative");
  if (betas.beta1 < 0.0 || betas.beta2 < 0.0 || betas.beta3 < 0.0)
    fail("config: RCS variances must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("config: alpha outside (0, 1)");
  if (snr_grid_db.empty()) fail("config: snr_grid_db is empty");
  for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
    if (snr_grid_db[i] <= snr_grid_db[i - 1])
      fail("config: snr_grid_db must be strictly increasing");
  if (!(clutter_energy_fraction > 0.0 && clutter_energy_fraction <= 1.0))
    fail("config: clutter_energy_fraction outside (0, 1]");
  if (trials_calibration < 1 || trials_detection < 1)
    fail("config: trial counts must be positive");
  if (static_cast<double>(trials_calibration) < 50.0 / alpha)
    fail("config: trials_calibration below 50/alpha");
  if (threads < 0) fail("config: threads must be nonnegative");
}

namespace {

using nlohmann::json;

struct KeyReader {
  const json& doc;
  std::set<std::string> seen;

  template <typename T>
  void get(const char* key, T& out) {
    seen.insert(key);
    if (!doc.contains(key)) return;
    try {
      out = doc.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: bad value for '") + key +
                        "': " + e.what());
    }
  }

  void get_angle(const char* key, double& radians) {
    double deg = radians / kDeg;
    get(key, deg);
    radians = deg * kDeg;
  }
};

}  // namespace

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw IoError("config: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config: parse failure in " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");

  ScenarioConfig cfg = default_config();
  KeyReader r{doc, {}};

  r.get("tx_horizontal", cfg.geometry.transceiver.horizontal);
  r.get("tx_vertical", cfg.geometry.transceiver.vertical);
  r.get("ris_horizontal", cfg.geometry.ris.horizontal);
  r.get("ris_vertical", cfg.geometry.ris.vertical);
  r.get("clusters", cfg.geometry.clusters);
  r.get("scattering_samples", cfg.geometry.scattering_samples);

  double az, el;
  const auto read_direction = [&](const char* az_key, const char* el_key,
                                  channel::Direction& dir) {
    az = dir.azimuth / kDeg;
    el = dir.elevation / kDeg;
    r.get(az_key, az);
    r.get(el_key, el);
    dir = channel::Direction(az * kDeg, el * kDeg);
  };
  read_direction("ue_from_bs_az_deg", "ue_from_bs_el_deg",
                 cfg.geometry.ue_from_bs);
  read_direction("target_from_bs_az_deg", "target_from_bs_el_deg",
                 cfg.geometry.target_from_bs);
  read_direction("ris_from_bs_az_deg", "ris_from_bs_el_deg",
                 cfg.geometry.ris_from_bs);
  read_direction("ue_from_ris_az_deg", "ue_from_ris_el_deg",
                 cfg.geometry.ue_from_ris);
  read_direction("target_from_ris_az_deg", "target_from_ris_el_deg",
                 cfg.geometry.target_from_ris);
  read_direction("bs_from_ris_az_deg", "bs_from_ris_el_deg",
                 cfg.geometry.bs_from_ris);

  r.get_angle("channel_az_spread_deg", cfg.geometry.channel_az_spread);
  r.get_angle("channel_el_spread_deg", cfg.geometry.channel_el_spread);
  r.get_angle("channel_asd_deg", cfg.geometry.channel_asd);
  r.get_angle("clutter_az_spread_deg", cfg.geometry.clutter_az_spread);
  r.get_angle("clutter_el_spread_deg", cfg.geometry.clutter_el_spread);
  r.get_angle("clutter_asd_deg", cfg.geometry.clutter_asd);

  r.get("symbols", cfg.symbols);
  r.get("sigma2", cfg.sigma2);
  r.get("transmit_power", cfg.transmit_power);
  r.get("gamma_th", cfg.gamma_th);
  r.get("beta1", cfg.betas.beta1);
  r.get("beta2", cfg.betas.beta2);
  r.get("beta3", cfg.betas.beta3);
  r.get("alpha", cfg.alpha);
  r.get("cnr_db", cfg.cnr_db);
  r.get("snr_grid_db", cfg.snr_grid_db);
  r.get("rician_kappa_db", cfg.rician_kappa_db);
  r.get("ris_element_gain_db", cfg.ris_element_gain_db);
  r.get("ue_gain_db", cfg.ue_gain_db);
  r.get("clutter_energy_fraction", cfg.clutter_energy_fraction);
  r.get("clutter_rank", cfg.clutter_rank);
  r.get("trials_calibration", cfg.trials_calibration);
  r.get("trials_detection", cfg.trials_detection);
  r.get("master_seed", cfg.master_seed);
  r.get("threads", cfg.threads);

  for (const auto& [key, value] : doc.items())
    if (!r.seen.contains(key))
      throw ConfigError("config: unknown key '" + key + "' in " + path);

  cfg.validate();
  return cfg;
}

std::string default_config_json() {
  const ScenarioConfig cfg = default_config();
  json doc;
  doc["tx_horizontal"] = cfg.geometry.transceiver.horizontal;
  doc["tx_vertical"] = cfg.geometry.transceiver.vertical;
  doc["ris_horizontal"] = cfg.geometry.ris.horizontal;
  doc["ris_vertical"] = cfg.geometry.ris.vertical;
  doc["clusters"] = cfg.geometry.clusters;
  doc["scattering_samples"] = cfg.geometry.scattering_samples;
  doc["ue_from_bs_az_deg"] = cfg.geometry.ue_from_bs.azimuth / kDeg;
  doc["ue_from_bs_el_deg"] = cfg.geometry.ue_from_bs.elevation / kDeg;
  doc["target_from_bs_az_deg"] = cfg.geometry.target_from_bs.azimuth / kDeg;
  doc["target_from_bs_el_deg"] = cfg.geometry.target_from_bs.elevation / kDeg;
  doc["ris_from_bs_az_deg"] = cfg.geometry.ris_from_bs.azimuth / kDeg;
  doc["ris_from_bs_el_deg"] = cfg.geometry.ris_from_bs.elevation / kDeg;
  doc["ue_from_ris_az_deg"] = cfg.geometry.ue_from_ris.azimuth / kDeg;
  doc["ue_from_ris_el_deg"] = cfg.geometry.ue_from_ris.elevation / kDeg;
  doc["target_from_ris_az_deg"] = cfg.geometry.target_from_ris.azimuth / kDeg;
  doc["target_from_ris_el_deg"] = cfg.geometry.target_from_ris.elevation / kDeg;
  doc["bs_from_ris_az_deg"] = cfg.geometry.bs_from_ris.azimuth / kDeg;
  doc["bs_from_ris_el_deg"] = cfg.geometry.bs_from_ris.elevation / kDeg;
  doc["channel_az_spread_deg"] = cfg.geometry.channel_az_spread / kDeg;
  doc["channel_el_spread_deg"] = cfg.geometry.channel_el_spread / kDeg;
  doc["channel_asd_deg"] = cfg.geometry.channel_asd / kDeg;
  doc["clutter_az_spread_deg"] = cfg.geometry.clutter_az_spread / kDeg;
  doc["clutter_el_spread_deg"] = cfg.geometry.clutter_el_spread / kDeg;
  doc["clutter_asd_deg"] = cfg.geometry.clutter_asd / kDeg;
  doc["symbols"] = cfg.symbols;
  doc["sigma2"] = cfg.sigma2;
  doc["transmit_power"] = cfg.transmit_power;
  doc["gamma_th"] = cfg.gamma_th;
  doc["beta1"] = cfg.betas.beta1;
  doc["beta2"] = cfg.betas.beta2;
  doc["beta3"] = cfg.betas.beta3;
  doc["alpha"] = cfg.alpha;
  doc["cnr_db"] = cfg.cnr_db;
  doc["snr_grid_db"] = cfg.snr_grid_db;
  doc["rician_kappa_db"] = cfg.rician_kappa_db;
  doc["ris_element_gain_db"] = cfg.ris_element_gain_db;
  doc["ue_gain_db"] = cfg.ue_gain_db;
  doc["clutter_energy_fraction"] = cfg.clutter_energy_fraction;
  doc["clutter_rank"] = cfg.clutter_rank;
  doc["trials_calibration"] = cfg.trials_calibration;
  doc["trials_detection"] = cfg.trials_detection;
  doc["master_seed"] = cfg.master_seed;
  doc["threads"] = cfg.threads;
  return doc.dump(2) + "\n";
}

}  // namespace risdet
