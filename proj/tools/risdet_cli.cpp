// Command-line front end: scenario selftest, threshold calibration, detection
// curves, and one-shot joint configuration.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "risdet/config.hpp"
#include "risdet/detector.hpp"
#include "risdet/harness.hpp"
#include "risdet/optimizer.hpp"
#include "risdet/selftest.hpp"

namespace {

struct CommonOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> trials_cal;
  std::optional<int> trials_det;
};

void add_common(CLI::App* cmd, CommonOverrides& common) {
  cmd->add_option("--seed", common.seed, "Master seed override");
  cmd->add_option("--threads", common.threads,
                  "Worker threads (0 = hardware)");
  cmd->add_option("--trials-cal", common.trials_cal,
                  "Calibration trials override");
  cmd->add_option("--trials-det", common.trials_det,
                  "Detection trials override");
}

risdet::ScenarioConfig load_with_overrides(const std::string& path,
                                           const CommonOverrides& common) {
  risdet::ScenarioConfig cfg =
      path.empty() ? risdet::default_config() : risdet::load_config(path);
  if (common.seed) cfg.master_seed = *common.seed;
  if (common.threads) cfg.threads = *common.threads;
  if (common.trials_cal) cfg.trials_calibration = *common.trials_cal;
  if (common.trials_det) cfg.trials_detection = *common.trials_det;
  cfg.validate();
  return cfg;
}

int run_calibrate(const risdet::ScenarioConfig& cfg, double snr_db) {
  using namespace risdet;
  const harness::PointSetup setup =
      harness::configure_point(cfg, snr_db, harness::kOptimized);
  const detector::ReceivedSimulator sim(
      setup.channels, setup.phases, setup.precoder.p, cfg.betas, setup.clutter,
      cfg.cnr_db, cfg.sigma2, cfg.symbols);
  const detector::StreamKey cal_key{cfg.master_seed, harness::kOptimized, 0,
                                    rng::Purpose::kCalibration};
  const detector::ThresholdCalibration cal = detector::calibrate_threshold(
      sim, setup.test_matrix, cfg.alpha, cfg.trials_calibration, cal_key,
      cfg.threads);
  const detector::DetectorSpec spec{setup.test_matrix, cal.threshold,
                                    cfg.alpha, cfg.symbols};
  const detector::StreamKey pfa_key{cfg.master_seed, harness::kOptimized, 0,
                                    rng::Purpose::kPfaMeasure};
  const detector::RateEstimate pfa = detector::decision_rate(
      sim, spec, detector::Hypothesis::kNull, cfg.trials_calibration, pfa_key,
      cfg.threads);
  std::cout << "snr_db " << snr_db << "\n"
            << "threshold " << cal.threshold << "\n"
            << "alpha " << cfg.alpha << "\n"
            << "realized_pfa " << pfa.rate << " (" << pfa.hits << "/"
            << pfa.trials << " fresh trials)\n"
            << "expected_band [" << cal.ci_lo << ", " << cal.ci_hi << "]\n";
  return 0;
}

int run_optimize(const risdet::ScenarioConfig& cfg, double snr_db) {
  using namespace risdet;
  const harness::PointSetup setup =
      harness::configure_point(cfg, snr_db, harness::kOptimized);
  std::cout << "snr_db " << snr_db << "\n";
  std::cout << "case "
            << (setup.precoder.case_fired ==
                        optimizer::PrecoderCase::kEigenvectorInterior
                    ? "eigenvector-interior"
                    : "boundary-qp")
            << "\n";
  std::cout << "objective " << setup.precoder.objective << "\n";
  std::cout << "comm_snr " << setup.precoder.comm_snr << " (target >= "
            << cfg.gamma_th << ")\n";
  std::cout << "clutter_rank " << setup.clutter.rank() << "\n";
  std::cout << "phases_rad";
  for (Eigen::Index i = 0; i < setup.phases.psi.size(); ++i)
    std::cout << ' ' << setup.phases.psi(i);
  std::cout << "\nprecoder_re_im";
  for (Eigen::Index i = 0; i < setup.precoder.p.size(); ++i)
    std::cout << ' ' << setup.precoder.p(i).real() << ' '
              << setup.precoder.p(i).imag();
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-assisted mono-static detection simulator"};
  app.require_subcommand(1);

  CommonOverrides common;
  std::string config_path;
  std::string out_csv;
  std::string out_json;
  double snr_db = 0.0;

  CLI::App* selftest = app.add_subcommand("selftest", "Run the oracle suite");
  selftest->add_option("--seed", common.seed, "Suite seed");

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Calibrate the detector threshold");
  calibrate->add_option("--config", config_path, "Scenario JSON");
  calibrate->add_option("--snr-db", snr_db, "Static two-way target SNR [dB]")
      ->required();
  add_common(calibrate, common);

  CLI::App* curve =
      app.add_subcommand("curve", "Detection probability over the SNR sweep");
  curve->add_option("--config", config_path, "Scenario JSON");
  curve->add_option("--out", out_csv, "Output CSV path")->required();
  curve->add_option("--json", out_json, "Optional JSON output path");
  add_common(curve, common);

  CLI::App* optimize = app.add_subcommand(
      "optimize", "Print the jointly configured phases and precoder");
  optimize->add_option("--config", config_path, "Scenario JSON");
  CLI::Option* opt_snr =
      optimize->add_option("--snr-db", snr_db,
                           "Sweep point (default: top of the grid)");
  add_common(optimize, common);

  CLI::App* defaults = app.add_subcommand(
      "default-config", "Print the default scenario configuration");

  try {
    app.parse(argc, argv);

    if (selftest->parsed()) {
      const bool ok = risdet::selftest::run(std::cout, common.seed.value_or(1));
      return ok ? 0 : 1;
    }
    if (defaults->parsed()) {
      std::cout << risdet::default_config_json();
      return 0;
    }

    risdet::ScenarioConfig cfg = load_with_overrides(config_path, common);
    if (calibrate->parsed()) return run_calibrate(cfg, snr_db);
    if (optimize->parsed()) {
      const double point =
          opt_snr->count() > 0 ? snr_db : cfg.snr_grid_db.back();
      return run_optimize(cfg, point);
    }
    if (curve->parsed()) {
      const risdet::harness::CurveTable table = risdet::harness::run_curve(cfg);
      risdet::harness::emit_csv(table, out_csv);
      if (!out_json.empty()) risdet::harness::emit_json(table, out_json);
      std::cerr << "wrote " << out_csv << " (" << table.rows.size()
                << " sweep points)\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
