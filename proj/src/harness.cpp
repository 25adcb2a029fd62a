#include "risdet/harness.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "risdet/errors.hpp"
#include "risdet/parallel.hpp"
#include "risdet/rng.hpp"
#include "risdet/sensing.hpp"

namespace risdet::harness {

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

detector::RankRule rank_rule(const ScenarioConfig& cfg) {
  detector::RankRule rule;
  rule.energy_fraction = cfg.clutter_energy_fraction;
  rule.fixed_rank = cfg.clutter_rank >= 0
                        ? static_cast<Eigen::Index>(cfg.clutter_rank)
                        : Eigen::Index{-1};
  return rule;
}

struct SchemeSetup {
  channel::RisPhases phases;
  optimizer::PrecoderSolution precoder;
  Matrix covariance;
  Matrix test_matrix;
};

/// Configures phases, precoder, covariance, and test matrix for one scheme
/// at one sweep point. The clutter-unaware scheme reuses the optimized
/// configuration and only drops the subspace from the detector.
SchemeSetup configure_scheme(const ScenarioConfig& cfg,
                             const channel::ChannelSet& ch, Scheme scheme,
                             const channel::RisPhases& random_phases,
                             const detector::ClutterSubspace& clutter,
                             double snr_db) {
  SchemeSetup s;
  const Eigen::Index n = ch.b_t.size();
  switch (scheme) {
    case kNoRis:
      s.phases = channel::RisPhases::zero(n);
      break;
    case kRandomRis:
      s.phases = random_phases;
      break;
    case kOptimized:
    case kClutterUnaware:
      s.phases = optimizer::optimize_phases(ch.b_t, ch.hbar_r2);
      break;
  }
  const Vector h1 =
      ch.h_s1 + channel::cascaded_channel(ch.a_t, ch.b_t, s.phases, ch.h_r1);
  const Matrix gain = sensing::gain_matrix(ch, s.phases, cfg.betas);
  try {
    if (gain.cwiseAbs().maxCoeff() == 0.0) {
      // degenerate objective (all RCS variances zero): every feasible
      // precoder is optimal, use the matched filter
      const double h1_norm2 = h1.squaredNorm();
      if (cfg.transmit_power * h1_norm2 < cfg.gamma_th * cfg.sigma2)
        throw InfeasibleError(
            "optimize_precoder: SNR target exceeds the matched-filter bound");
      s.precoder.p = std::sqrt(cfg.transmit_power) * h1.conjugate() /
                     std::sqrt(h1_norm2);
      s.precoder.objective = 0.0;
      s.precoder.comm_snr =
          optimizer::communication_snr(h1, s.precoder.p, cfg.sigma2);
      s.precoder.case_fired = optimizer::PrecoderCase::kEigenvectorInterior;
    } else {
      s.precoder = optimizer::optimize_precoder(
          gain, h1, cfg.transmit_power, cfg.gamma_th, cfg.sigma2);
    }
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(std::string(e.what()) + " (sweep point snr_db=" +
                          std::to_string(snr_db) + ")");
  }
  s.covariance = sensing::target_covariance(ch, s.phases, s.precoder.p,
                                            cfg.betas);
  const Matrix u_for_detector = scheme == kClutterUnaware
                                    ? Matrix::Zero(ch.hbar_s2.size(), 0)
                                    : clutter.u;
  s.test_matrix = detector::build_test_matrix(s.covariance, u_for_detector,
                                              cfg.sigma2);
  return s;
}

}  // namespace

channel::ChannelGains apply_snr_point(const ScenarioConfig& cfg,
                                      double snr_db) {
  const double k = cfg.geometry.transceiver.elements();
  const double snr = db_to_linear(snr_db);
  const double rcs = cfg.betas.beta1 > 0.0 ? cfg.betas.beta1 : 1.0;
  channel::ChannelGains gains;
  gains.target_element =
      std::sqrt(snr * cfg.sigma2 / (cfg.transmit_power * rcs)) / k;
  gains.ue_element =
      db_to_linear(cfg.ue_gain_db) * cfg.sigma2 / cfg.transmit_power;
  gains.ris_element_factor = db_to_linear(cfg.ris_element_gain_db);
  gains.nlos_fraction = db_to_linear(-cfg.rician_kappa_db);
  return gains;
}

CurveTable run_curve(const ScenarioConfig& cfg) {
  cfg.validate();
  const int threads = resolve_threads(cfg.threads);
  const channel::ScenarioBuilder builder(cfg.geometry, cfg.master_seed);

  // clutter statistics and the diffuse surface draw are per-run quantities
  const channel::ChannelGains probe = apply_snr_point(cfg, cfg.snr_grid_db[0]);
  const detector::ClutterSubspace clutter = detector::estimate_clutter_subspace(
      builder.channels(probe).r_clutter, rank_rule(cfg));
  std::mt19937_64 phase_gen = rng::derive_stream(
      cfg.master_seed, {rng::tag(rng::Purpose::kRandomPhases)});
  const channel::RisPhases random_phases =
      channel::RisPhases::random(cfg.geometry.ris.elements(), phase_gen);

  CurveTable table;
  table.rows.reserve(cfg.snr_grid_db.size());
  for (std::size_t sweep = 0; sweep < cfg.snr_grid_db.size(); ++sweep) {
    const double snr_db = cfg.snr_grid_db[sweep];
    const channel::ChannelGains gains = apply_snr_point(cfg, snr_db);
    const channel::ChannelSet with_ris = builder.channels(gains, true);
    const channel::ChannelSet without_ris = builder.channels(gains, false);

    CurveRow row;
    row.snr_db = snr_db;
    for (int scheme = 0; scheme < kSchemeCount; ++scheme) {
      const channel::ChannelSet& ch =
          scheme == kNoRis ? without_ris : with_ris;
      const SchemeSetup setup =
          configure_scheme(cfg, ch, static_cast<Scheme>(scheme),
                           random_phases, clutter, snr_db);
      const detector::ReceivedSimulator sim(
          ch, setup.phases, setup.precoder.p, cfg.betas, clutter, cfg.cnr_db,
          cfg.sigma2, cfg.symbols);

      const detector::StreamKey cal_key{cfg.master_seed,
                                        static_cast<std::uint64_t>(scheme),
                                        sweep, rng::Purpose::kCalibration};
      const detector::ThresholdCalibration cal = detector::calibrate_threshold(
          sim, setup.test_matrix, cfg.alpha, cfg.trials_calibration, cal_key,
          threads);
      const detector::DetectorSpec spec{setup.test_matrix, cal.threshold,
                                        cfg.alpha, cfg.symbols};

      const detector::StreamKey pfa_key{cfg.master_seed,
                                        static_cast<std::uint64_t>(scheme),
                                        sweep, rng::Purpose::kPfaMeasure};
      row.pfa[scheme] =
          detector::decision_rate(sim, spec, detector::Hypothesis::kNull,
                                  cfg.trials_calibration, pfa_key, threads);

      const detector::StreamKey det_key{cfg.master_seed,
                                        static_cast<std::uint64_t>(scheme),
                                        sweep, rng::Purpose::kDetection};
      row.pd[scheme] =
          detector::decision_rate(sim, spec, detector::Hypothesis::kTarget,
                                  cfg.trials_detection, det_key, threads);

      row.threshold[scheme] = cal.threshold;
      row.comm_snr[scheme] = setup.precoder.comm_snr;
      row.case_fired[scheme] = setup.precoder.case_fired;
    }
    row.pd_no_ris = row.pd[kNoRis].rate;
    row.pd_random_ris = row.pd[kRandomRis].rate;
    row.pd_optimized = row.pd[kOptimized].rate;
    row.pd_clutter_unaware = row.pd[kClutterUnaware].rate;
    row.realized_pfa = row.pfa[kOptimized].rate;
    row.ci_halfwidth =
        1.96 * std::sqrt(cfg.alpha * (1.0 - cfg.alpha) *
                         (1.0 / cfg.trials_calibration +
                          1.0 / cfg.trials_calibration));
    table.rows.push_back(std::move(row));
  }
  return table;
}

PointSetup configure_point(const ScenarioConfig& cfg, double snr_db,
                           Scheme scheme) {
  cfg.validate();
  const channel::ScenarioBuilder builder(cfg.geometry, cfg.master_seed);
  const channel::ChannelGains gains = apply_snr_point(cfg, snr_db);
  const channel::ChannelSet ch = builder.channels(gains, scheme != kNoRis);
  const detector::ClutterSubspace clutter = detector::estimate_clutter_subspace(
      ch.r_clutter, rank_rule(cfg));
  std::mt19937_64 phase_gen = rng::derive_stream(
      cfg.master_seed, {rng::tag(rng::Purpose::kRandomPhases)});
  const channel::RisPhases random_phases =
      channel::RisPhases::random(cfg.geometry.ris.elements(), phase_gen);
  SchemeSetup s = configure_scheme(cfg, ch, scheme, random_phases, clutter,
                                   snr_db);
  PointSetup out;
  out.channels = ch;
  out.phases = std::move(s.phases);
  out.precoder = std::move(s.precoder);
  out.clutter = clutter;
  out.covariance = std::move(s.covariance);
  out.test_matrix = std::move(s.test_matrix);
  return out;
}

namespace {

std::string format_g6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

}  // namespace

std::string to_csv(const CurveTable& table) {
  std::ostringstream out;
  out << "snr_db,pd_no_ris,pd_random_ris,pd_optimized,pd_clutter_unaware,"
         "realized_pfa,ci_halfwidth\n";
  for (const CurveRow& row : table.rows) {
    out << format_g6(row.snr_db) << ',' << format_g6(row.pd_no_ris) << ','
        << format_g6(row.pd_random_ris) << ',' << format_g6(row.pd_optimized)
        << ',' << format_g6(row.pd_clutter_unaware) << ','
        << format_g6(row.realized_pfa) << ',' << format_g6(row.ci_halfwidth)
        << '\n';
  }
  return out.str();
}

void emit_csv(const CurveTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw IoError("emit_csv: cannot open " + path);
  out << to_csv(table);
  if (!out.good()) throw IoError("emit_csv: write failure on " + path);
}

void emit_json(const CurveTable& table, const std::string& path) {
  nlohmann::json rows = nlohmann::json::array();
  for (const CurveRow& row : table.rows) {
    nlohmann::json r;
    r["snr_db"] = row.snr_db;
    r["pd_no_ris"] = row.pd_no_ris;
    r["pd_random_ris"] = row.pd_random_ris;
    r["pd_optimized"] = row.pd_optimized;
    r["pd_clutter_unaware"] = row.pd_clutter_unaware;
    r["realized_pfa"] = row.realized_pfa;
    r["ci_halfwidth"] = row.ci_halfwidth;
    rows.push_back(std::move(r));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw IoError("emit_json: cannot open " + path);
  out << rows.dump(2) << "\n";
  if (!out.good()) throw IoError("emit_json: write failure on " + path);
}

}  // namespace risdet::harness
