#pragma once

#include <cstdint>
#include <random>

#include "risdet/channel.hpp"
#include "risdet/numerics.hpp"
#include "risdet/rng.hpp"
#include "risdet/sensing.hpp"

namespace risdet::detector {

/// Identifies one family of derived Monte Carlo streams: every trial index
/// maps to its own engine, so results never depend on scheduling.
struct StreamKey {
  std::uint64_t master = 0;
  std::uint64_t scheme = 0;
  std::uint64_t sweep = 0;
  rng::Purpose purpose = rng::Purpose::kCalibration;

  std::mt19937_64 trial_stream(std::uint64_t trial) const {
    return rng::derive_stream(master,
                              {scheme, sweep, rng::tag(purpose), trial});
  }
};

/// Semi-unitary basis of the clutter subspace plus the retained eigenvalue
/// profile (used to shape the simulated clutter power).
struct ClutterSubspace {
  Matrix u;                // K x r, u^H u = I
  RealVector eigenvalues;  // retained clutter eigenvalues, descending
  bool cap_hit = false;    // the rank rule ran into the r < K cap

  Eigen::Index rank() const { return u.cols(); }
  static ClutterSubspace empty(Eigen::Index k);
};

/// Rank selection: smallest r whose eigenvalues reach energy_fraction of the
/// trace, capped at K-1; a nonnegative fixed_rank overrides the rule.
struct RankRule {
  double energy_fraction = 0.99;
  Eigen::Index fixed_rank = -1;
};

ClutterSubspace estimate_clutter_subspace(const Matrix& r_clutter,
                                          const RankRule& rule = {});

/// Detection test matrix. With an r-column clutter basis U:
///   T = S^-1 U (U^H S^-1 U)^-1 U^H S^-1 + (I - U U^H)/sigma2 - S^-1,
/// where S = R + sigma2 I. An empty U gives the clutter-unaware variant
/// T = I/sigma2 - S^-1. All inverses go through Hermitian factorizations.
Matrix build_test_matrix(const Matrix& r, const Matrix& u, double sigma2);

/// Sum over received symbols (columns of y) of y^H T y, real part. Throws
/// when the accumulated imaginary residue exceeds 1e-8 relative.
double test_statistic(const Matrix& y, const Matrix& t);

/// Calibrated detector: decide "target present" iff the statistic reaches
/// the threshold.
struct DetectorSpec {
  Matrix t;
  double threshold = 0.0;
  double alpha = 0.0;
  int symbols = 0;
};

bool detect(const Matrix& y, const DetectorSpec& spec);

enum class Hypothesis { kNull, kTarget };

/// Draws length-L blocks of received vectors under either hypothesis:
/// clutter is circular Gaussian in the subspace with per-direction power
/// proportional to the retained eigenvalues and total received power
/// cnr * sigma2 * K; data symbols are unit-modulus QPSK; the target return
/// is redrawn per symbol.
class ReceivedSimulator {
 public:
  ReceivedSimulator(const channel::ChannelSet& ch,
                    const channel::RisPhases& phases, const Vector& p,
                    const sensing::RcsVariances& betas,
                    const ClutterSubspace& clutter, double cnr_db,
                    double sigma2, int symbols);

  /// K x L block of received vectors.
  Matrix simulate(Hypothesis hyp, std::mt19937_64& gen) const;

  int symbols() const { return symbols_; }
  Eigen::Index dim() const { return dim_; }
  double sigma2() const { return noise_sigma_ * noise_sigma_; }

 private:
  sensing::EffectiveChannelSampler target_;
  Matrix clutter_factor_;  // U diag(sqrt(c * lambda_i))
  double noise_sigma_ = 1.0;
  int symbols_ = 1;
  Eigen::Index dim_ = 0;
};

struct ThresholdCalibration {
  double threshold = 0.0;
  double alpha = 0.0;
  double realized_on_sample = 0.0;  // on the calibration sample itself
  double ci_lo = 0.0;  // 95% band for a fresh same-size re-measurement
  double ci_hi = 0.0;
  int trials = 0;
};

/// Empirical (1 - alpha) quantile of the null statistic over `trials`
/// decisions. Requires trials >= 50 / alpha.
ThresholdCalibration calibrate_threshold(const ReceivedSimulator& sim,
                                         const Matrix& t, double alpha,
                                         int trials, const StreamKey& key,
                                         int threads = 1);

struct RateEstimate {
  double rate = 0.0;
  std::int64_t hits = 0;
  int trials = 0;

  /// Smoothed binomial standard error (half a success added per tail).
  double standard_error() const;
};

/// Fraction of simulated decisions that exceed the threshold under the given
/// hypothesis: realized false-alarm rate under kNull, detection probability
/// under kTarget.
RateEstimate decision_rate(const ReceivedSimulator& sim,
                           const DetectorSpec& spec, Hypothesis hyp,
                           int trials, const StreamKey& key, int threads = 1);

/// Ascending-order empirical quantile used by the calibration.
double empirical_quantile(std::vector<double> samples, double level);

}  // namespace risdet::detector
