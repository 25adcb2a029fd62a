#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "risdet/channel.hpp"
#include "risdet/detector.hpp"
#include "risdet/errors.hpp"
#include "support.hpp"

using namespace risdet;
using namespace risdet::detector;

namespace {

channel::ChannelSet synthetic_channels(Eigen::Index k, Eigen::Index n,
                                       std::mt19937_64& gen,
                                       double target_scale = 1.0) {
  channel::ChannelSet ch;
  ch.a_t = testsup::random_vector(k, gen);
  ch.b_t = testsup::random_vector(n, gen);
  ch.hbar_s2 = target_scale * testsup::random_vector(k, gen);
  ch.hbar_r2 = target_scale * testsup::random_vector(n, gen);
  ch.r_s2 = target_scale * target_scale * testsup::random_psd(k, gen);
  ch.r_r2 = target_scale * target_scale * testsup::random_psd(n, gen);
  ch.r_clutter = testsup::random_psd(k, gen);
  ch.h_s1 = testsup::random_vector(k, gen);
  ch.h_r1 = testsup::random_vector(n, gen);
  return ch;
}

/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

}  // namespace

TEST_CASE("estimate_clutter_subspace: rank-one and isotropic inputs") {
  std::mt19937_64 gen(3);
  Vector v = testsup::random_vector(5, gen);
  ClutterSubspace sub = estimate_clutter_subspace(v * v.adjoint());
  CHECK(sub.rank() == 1);
  CHECK(!sub.cap_hit);
  const Complex align = sub.u.col(0).dot(v / v.norm());
  CHECK(std::abs(align) == doctest::Approx(1.0).epsilon(1e-10));

  // isotropic clutter: the energy rule would need all K directions
  sub = estimate_clutter_subspace(Matrix::Identity(6, 6));
  CHECK(sub.rank() == 5);
  CHECK(sub.cap_hit);
}

TEST_CASE("estimate_clutter_subspace: semi-unitarity and determinism") {
  channel::ScenarioGeometry geom = testsup::paper_geometry(10000);
  Matrix r_clutter = channel::local_scattering_correlation(
      geom.transceiver, geom.ris_from_bs, geom.clusters, geom.clutter_az_spread,
      geom.clutter_el_spread, geom.clutter_asd, geom.scattering_samples, 21);
  ClutterSubspace a = estimate_clutter_subspace(r_clutter);
  ClutterSubspace b = estimate_clutter_subspace(r_clutter);
  CHECK(a.rank() == b.rank());
  CHECK(a.rank() < 36);
  CHECK((a.u - b.u).cwiseAbs().maxCoeff() == 0.0);
  Matrix gram = a.u.adjoint() * a.u;
  CHECK((gram - Matrix::Identity(a.rank(), a.rank())).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("estimate_clutter_subspace: error paths") {
  CHECK_THROWS_AS(estimate_clutter_subspace(Matrix::Zero(4, 4)),
                  ZeroClutterError);
  Matrix neg = Matrix::Identity(3, 3);
  neg(2, 2) = -1.0;
  CHECK_THROWS_AS(estimate_clutter_subspace(neg), NotPsdError);
}

TEST_CASE("build_test_matrix: algebraic zero cases") {
  const double sigma2 = 0.8;
  Matrix t = build_test_matrix(Matrix::Zero(4, 4), Matrix::Zero(4, 0), sigma2);
  CHECK(t.cwiseAbs().maxCoeff() < 1e-14);

  std::mt19937_64 gen(5);
  Matrix u = testsup::random_matrix(4, 2, gen);
  u = numerics::gram_schmidt_qr(u).q;
  t = build_test_matrix(Matrix::Zero(4, 4), u, sigma2);
  CHECK(t.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("build_test_matrix: matches the naive explicit-inverse evaluation") {
  std::mt19937_64 gen(7);
  const double sigma2 = 0.6;
  Matrix r = testsup::random_psd(4, gen);
  Matrix u = numerics::gram_schmidt_qr(testsup::random_matrix(4, 2, gen)).q;
  Matrix t = build_test_matrix(r, u, sigma2);

  Matrix s_inv = (r + sigma2 * Matrix::Identity(4, 4)).inverse();
  Matrix naive = s_inv * u * (u.adjoint() * s_inv * u).inverse() *
                     u.adjoint() * s_inv +
                 (Matrix::Identity(4, 4) - u * u.adjoint()) / sigma2 - s_inv;
  CHECK((t - naive).cwiseAbs().maxCoeff() < 1e-9);

  // clutter-unaware variant
  t = build_test_matrix(r, Matrix::Zero(4, 0), sigma2);
  naive = Matrix::Identity(4, 4) / sigma2 - s_inv;
  CHECK((t - naive).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("build_test_matrix: clutter directions contribute nothing") {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 10; ++trial) {
    const double sigma2 = 0.5 + 0.1 * trial;
    Matrix r = testsup::random_psd(6, gen);
    Matrix u = numerics::gram_schmidt_qr(testsup::random_matrix(6, 3, gen)).q;
    Matrix t = build_test_matrix(r, u, sigma2);
    Vector v = testsup::random_vector(3, gen);
    Vector clutter_dir = u * v;
    const double quad = std::abs(std::real(
        Complex(clutter_dir.adjoint() * t * clutter_dir)));
    CHECK(quad <= 1e-8 * clutter_dir.squaredNorm() / sigma2);
  }
}

TEST_CASE("test_statistic: zeros, identity, and the direct-loop oracle") {
  CHECK(test_statistic(Matrix::Zero(3, 4), Matrix::Identity(3, 3)) == 0.0);

  Matrix y(2, 1);
  y << Complex(1, 0), Complex(1, 0);
  CHECK(test_statistic(y, Matrix::Identity(2, 2)) == doctest::Approx(2.0));

  std::mt19937_64 gen(11);
  Matrix t = testsup::random_hermitian(5, gen);
  Matrix block = testsup::random_matrix(5, 7, gen);
  double want = 0.0;
  for (int l = 0; l < 7; ++l)
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        want += std::real(std::conj(block(i, l)) * t(i, j) * block(j, l));
  CHECK(test_statistic(block, t) == doctest::Approx(want).epsilon(1e-12));

  CHECK_THROWS_AS(test_statistic(Matrix::Zero(4, 2), Matrix::Identity(3, 3)),
                  DimensionError);
}

TEST_CASE("detect: boundary convention and zero signal") {
  DetectorSpec spec;
  spec.t = Matrix::Identity(2, 2);
  spec.threshold = 2.0;
  Matrix y(2, 1);
  y << Complex(1, 0), Complex(1, 0);
  CHECK(detect(y, spec));  // statistic == threshold decides "present"
  spec.threshold = 2.0 + 1e-9;
  CHECK(!detect(y, spec));
  CHECK(!detect(Matrix::Zero(2, 3), spec));
}

TEST_CASE("simulate_received: pure noise power under vanished clutter") {
  std::mt19937_64 gen(13);
  channel::ChannelSet ch = synthetic_channels(4, 3, gen);
  channel::RisPhases psi = channel::RisPhases::random(3, gen);
  Vector p = testsup::random_vector(4, gen);
  const double sigma2 = 1.7;
  ReceivedSimulator sim(ch, psi, p, {1.0, 1.0, 1.0},
                        ClutterSubspace::empty(4),
                        -std::numeric_limits<double>::infinity(), sigma2, 5);
  double power = 0.0;
  const int trials = 4000;
  std::mt19937_64 mc(99);
  for (int i = 0; i < trials; ++i)
    power += sim.simulate(Hypothesis::kNull, mc).squaredNorm();
  const int samples = trials * 5 * 4;
  power /= samples;
  // per-antenna power sigma2; |y_i|^2 ~ sigma2 * Exp(1), so sd = sigma2/sqrt(n)
  CHECK(std::abs(power - sigma2) < 3.0 * sigma2 / std::sqrt(samples));
}

TEST_CASE("simulate_received: zero-RCS target hypothesis matches the null") {
  std::mt19937_64 gen(17);
  channel::ChannelSet ch = synthetic_channels(4, 3, gen);
  channel::RisPhases psi = channel::RisPhases::random(3, gen);
  Vector p = testsup::random_vector(4, gen);
  ClutterSubspace sub = estimate_clutter_subspace(ch.r_clutter, {0.9, -1});
  ReceivedSimulator sim(ch, psi, p, {0.0, 0.0, 0.0}, sub, 10.0, 1.0, 5);
  Matrix t = build_test_matrix(testsup::random_psd(4, gen), sub.u, 1.0);

  const int n = 5000;
  std::vector<double> h0(n), h1(n);
  StreamKey k0{1234, 0, 0, rng::Purpose::kCalibration};
  StreamKey k1{1234, 0, 0, rng::Purpose::kDetection};
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 g0 = k0.trial_stream(i);
    std::mt19937_64 g1 = k1.trial_stream(i);
    h0[i] = test_statistic(sim.simulate(Hypothesis::kNull, g0), t);
    h1[i] = test_statistic(sim.simulate(Hypothesis::kTarget, g1), t);
  }
  const double d = ks_distance(h0, h1);
  const double crit = 1.628 * std::sqrt(2.0 / n);  // two-sample KS at 1%
  CHECK(d < crit);
}

TEST_CASE("simulate_received: clutter power accounting at 20 dB CNR") {
  channel::ScenarioGeometry geom = testsup::paper_geometry(10000);
  channel::ChannelGains gains;
  gains.target_element = 1e-4;
  channel::ChannelSet ch = channel::build_scenario_channels(geom, gains, 5);
  ClutterSubspace sub = estimate_clutter_subspace(ch.r_clutter);
  channel::RisPhases psi = channel::RisPhases::zero(64);
  Vector p = Vector::Zero(36);
  const double sigma2 = 1.0;
  ReceivedSimulator sim(ch, psi, p, {0.0, 0.0, 0.0}, sub, 20.0, sigma2, 5);

  std::mt19937_64 gen(7);
  double power = 0.0;
  const int trials = 20000;  // 1e5 symbols
  for (int i = 0; i < trials; ++i)
    power += sim.simulate(Hypothesis::kNull, gen).squaredNorm();
  power /= trials * 5;
  const double clutter_over_noise = power / (sigma2 * 36.0) - 1.0;
  CHECK(clutter_over_noise == doctest::Approx(100.0).epsilon(0.05));
}

TEST_CASE("calibrate_threshold: median at alpha one-half") {
  // quantile helper degenerates to the sample median at level 0.5
  std::vector<double> odd{5.0, 1.0, 4.0, 2.0, 3.0};
  CHECK(empirical_quantile(odd, 0.5) == 3.0);

  std::mt19937_64 gen(19);
  channel::ChannelSet ch = synthetic_channels(3, 2, gen);
  channel::RisPhases psi = channel::RisPhases::random(2, gen);
  Vector p = testsup::random_vector(3, gen);
  ReceivedSimulator sim(ch, psi, p, {0.0, 0.0, 0.0},
                        ClutterSubspace::empty(3),
                        -std::numeric_limits<double>::infinity(), 1.0, 3);
  Matrix t = Matrix::Identity(3, 3);
  StreamKey key{77, 0, 0, rng::Purpose::kCalibration};
  ThresholdCalibration cal = calibrate_threshold(sim, t, 0.5, 101, key);

  std::vector<double> stats(101);
  for (int i = 0; i < 101; ++i) {
    std::mt19937_64 g = key.trial_stream(i);
    stats[i] = test_statistic(sim.simulate(Hypothesis::kNull, g), t);
  }
  std::sort(stats.begin(), stats.end());
  CHECK(cal.threshold == stats[50]);
}

TEST_CASE("calibrate_threshold: determinism and thread independence") {
  std::mt19937_64 gen(23);
  channel::ChannelSet ch = synthetic_channels(4, 2, gen);
  channel::RisPhases psi = channel::RisPhases::random(2, gen);
  Vector p = testsup::random_vector(4, gen);
  ClutterSubspace sub = estimate_clutter_subspace(ch.r_clutter, {0.9, -1});
  ReceivedSimulator sim(ch, psi, p, {1.0, 1.0, 1.0}, sub, 10.0, 1.0, 4);
  Matrix t = build_test_matrix(testsup::random_psd(4, gen), sub.u, 1.0);
  StreamKey key{42, 1, 2, rng::Purpose::kCalibration};

  ThresholdCalibration a = calibrate_threshold(sim, t, 0.01, 6000, key, 1);
  ThresholdCalibration b = calibrate_threshold(sim, t, 0.01, 6000, key, 3);
  CHECK(a.threshold == b.threshold);
  CHECK(a.realized_on_sample == b.realized_on_sample);

  CHECK_THROWS_AS(calibrate_threshold(sim, t, 1e-3, 1000, key),
                  InsufficientTrialsError);
}

TEST_CASE("decision_rate: detection beats false alarm at high SNR") {
  std::mt19937_64 gen(29);
  channel::ChannelSet ch = synthetic_channels(4, 3, gen, /*target_scale=*/2.0);
  channel::RisPhases psi = channel::RisPhases::random(3, gen);
  Vector p = 2.0 * testsup::random_vector(4, gen);
  ClutterSubspace sub = estimate_clutter_subspace(ch.r_clutter, {0.9, -1});
  sensing::RcsVariances betas{0.5, 2.0, 1.0};
  ReceivedSimulator sim(ch, psi, p, betas, sub, 10.0, 1.0, 5);
  Matrix r = sensing::target_covariance(ch, psi, p, betas);
  Matrix t = build_test_matrix(r, sub.u, 1.0);

  StreamKey cal_key{7, 0, 0, rng::Purpose::kCalibration};
  ThresholdCalibration cal = calibrate_threshold(sim, t, 0.05, 4000, cal_key);
  DetectorSpec spec{t, cal.threshold, cal.alpha, 5};

  StreamKey det_key{7, 0, 0, rng::Purpose::kDetection};
  StreamKey pfa_key{7, 0, 0, rng::Purpose::kPfaMeasure};
  RateEstimate pd = decision_rate(sim, spec, Hypothesis::kTarget, 2000, det_key);
  RateEstimate pfa = decision_rate(sim, spec, Hypothesis::kNull, 2000, pfa_key);
  CHECK(pd.rate > pfa.rate);
  CHECK(pfa.rate < 0.12);

  // calibration consistency: the fresh false-alarm rate stays inside the
  // reported band
  CHECK(pfa.rate >= cal.ci_lo - 1e-12);
  CHECK(pfa.rate <= cal.ci_hi + 1e-12);
}
