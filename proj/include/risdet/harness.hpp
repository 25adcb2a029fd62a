#pragma once

#include <array>
#include <string>
#include <vector>

#include "risdet/config.hpp"
#include "risdet/detector.hpp"
#include "risdet/optimizer.hpp"

namespace risdet::harness {

/// The four schemes of a detection-probability sweep, in column order.
enum Scheme : int {
  kNoRis = 0,
  kRandomRis = 1,
  kOptimized = 2,
  kClutterUnaware = 3,
};
inline constexpr int kSchemeCount = 4;

/// One sweep point. The CSV columns are the first seven fields; the
/// remaining members carry per-scheme diagnostics for tests and tooling.
struct CurveRow {
  double snr_db = 0.0;
  double pd_no_ris = 0.0;
  double pd_random_ris = 0.0;
  double pd_optimized = 0.0;
  double pd_clutter_unaware = 0.0;
  double realized_pfa = 0.0;   // fresh-sample measurement, optimized scheme
  double ci_halfwidth = 0.0;   // 95% band halfwidth around alpha

  std::array<detector::RateEstimate, kSchemeCount> pd{};
  std::array<detector::RateEstimate, kSchemeCount> pfa{};
  std::array<double, kSchemeCount> threshold{};
  std::array<double, kSchemeCount> comm_snr{};
  std::array<optimizer::PrecoderCase, kSchemeCount> case_fired{};
};

struct CurveTable {
  std::vector<CurveRow> rows;
};

/// Gain set realizing one sweep point: the swept quantity is the two-way
/// static target SNR P_t * beta1 * ||hbar_s2||^4 / sigma2 (with unit RCS
/// variance substituted when beta1 is zero); the UE gain is pinned by
/// ue_gain_db and the RIS hop by ris_element_gain_db.
channel::ChannelGains apply_snr_point(const ScenarioConfig& cfg, double snr_db);

/// Full sweep over the four schemes: per point and scheme the precoder (and
/// for the optimized schemes the surface phases) is configured, the detector
/// threshold calibrated to alpha under the null, the false-alarm rate
/// re-measured on fresh draws, and the detection probability estimated.
/// Deterministic for a fixed master seed, for any thread count.
CurveTable run_curve(const ScenarioConfig& cfg);

std::string to_csv(const CurveTable& table);
void emit_csv(const CurveTable& table, const std::string& path);
void emit_json(const CurveTable& table, const std::string& path);

/// Everything needed to study one (sweep point, scheme) pair by hand.
struct PointSetup {
  channel::ChannelSet channels;
  channel::RisPhases phases;
  optimizer::PrecoderSolution precoder;
  detector::ClutterSubspace clutter;
  Matrix covariance;   // target return covariance for the chosen precoder
  Matrix test_matrix;
};

PointSetup configure_point(const ScenarioConfig& cfg, double snr_db,
                           Scheme scheme);

}  // namespace risdet::harness
