#include "risdet/detector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

#include "risdet/errors.hpp"
#include "risdet/parallel.hpp"

namespace risdet::detector {

ClutterSubspace ClutterSubspace::empty(Eigen::Index k) {
  ClutterSubspace c;
  c.u = Matrix::Zero(k, 0);
  c.eigenvalues = RealVector::Zero(0);
  return c;
}

ClutterSubspace estimate_clutter_subspace(const Matrix& r_clutter,
                                          const RankRule& rule) {
  numerics::EigenDecomposition eig = numerics::hermitian_eig(r_clutter);
  const Eigen::Index k = r_clutter.rows();
  const double lambda_max = eig.eigenvalues.maxCoeff();
  if (eig.eigenvalues.minCoeff() < -1e-10 * std::max(lambda_max, 0.0))
    throw NotPsdError("estimate_clutter_subspace: input not PSD");
  const double total = eig.eigenvalues.cwiseMax(0.0).sum();
  if (!(total > 0.0))
    throw ZeroClutterError("estimate_clutter_subspace: trace is zero");

  ClutterSubspace out;
  Eigen::Index r;
  if (rule.fixed_rank >= 0) {
    if (rule.fixed_rank < 1 || rule.fixed_rank >= k)
      throw Error("estimate_clutter_subspace: fixed rank must be in [1, K)");
    r = rule.fixed_rank;
  } else {
    if (!(rule.energy_fraction > 0.0 && rule.energy_fraction <= 1.0))
      throw Error("estimate_clutter_subspace: energy fraction outside (0, 1]");
    double cum = 0.0;
    r = k;  // found below; K means the rule wants everything
    for (Eigen::Index i = 0; i < k; ++i) {
      cum += std::max(eig.eigenvalues(i), 0.0);
      if (cum >= rule.energy_fraction * total) {
        r = i + 1;
        break;
      }
    }
    if (r > k - 1) {
      r = k - 1;
      out.cap_hit = true;
    }
  }
  out.u = eig.eigenvectors.leftCols(r);
  out.eigenvalues = eig.eigenvalues.head(r).cwiseMax(0.0);
  return out;
}

Matrix build_test_matrix(const Matrix& r, const Matrix& u, double sigma2) {
  if (!(sigma2 > 0.0))
    throw Error("build_test_matrix: sigma2 must be positive");
  const Eigen::Index k = r.rows();
  if (r.cols() != k || (u.cols() > 0 && u.rows() != k))
    throw DimensionError("build_test_matrix: dimension mismatch");

  const Matrix s = r + sigma2 * Matrix::Identity(k, k);
  Eigen::LLT<Matrix> s_llt(s);
  if (s_llt.info() != Eigen::Success)
    throw Error("build_test_matrix: R + sigma2 I is not positive definite");
  const Matrix s_inv = s_llt.solve(Matrix::Identity(k, k));

  Matrix t;
  if (u.cols() == 0) {
    t = Matrix::Identity(k, k) / sigma2 - s_inv;
  } else {
    const Matrix m = s_llt.solve(u);            // S^-1 U
    Matrix gram = u.adjoint() * m;              // U^H S^-1 U
    gram = 0.5 * (gram + gram.adjoint()).eval();
    Eigen::LLT<Matrix> g_llt(gram);
    if (g_llt.info() != Eigen::Success)
      throw SingularBlockError(
          "build_test_matrix: U^H (R + sigma2 I)^-1 U is singular");
    t = m * g_llt.solve(m.adjoint()) +
        (Matrix::Identity(k, k) - u * u.adjoint()) / sigma2 - s_inv;
  }
  return 0.5 * (t + t.adjoint()).eval();
}

double test_statistic(const Matrix& y, const Matrix& t) {
  if (y.rows() != t.rows() || t.rows() != t.cols())
    throw DimensionError("test_statistic: dimension mismatch");
  double sum = 0.0;
  double imag_residue = 0.0;
  for (Eigen::Index l = 0; l < y.cols(); ++l) {
    const Complex q = y.col(l).dot(t * y.col(l));  // y^H (T y)
    sum += q.real();
    imag_residue += std::abs(q.imag());
  }
  if (imag_residue > 1e-8 * std::max(1.0, std::abs(sum)))
    throw Error("test_statistic: imaginary residue exceeds tolerance");
  return sum;
}

bool detect(const Matrix& y, const DetectorSpec& spec) {
  return test_statistic(y, spec.t) >= spec.threshold;
}

ReceivedSimulator::ReceivedSimulator(const channel::ChannelSet& ch,
                                     const channel::RisPhases& phases,
                                     const Vector& p,
                                     const sensing::RcsVariances& betas,
                                     const ClutterSubspace& clutter,
                                     double cnr_db, double sigma2, int symbols)
    : target_(ch, phases, p, betas),
      noise_sigma_(std::sqrt(sigma2)),
      symbols_(symbols),
      dim_(ch.hbar_s2.size()) {
  if (symbols < 1) throw Error("ReceivedSimulator: need at least one symbol");
  if (!(sigma2 > 0.0)) throw Error("ReceivedSimulator: sigma2 must be positive");
  if (clutter.rank() > 0 && clutter.u.rows() != dim_)
    throw DimensionError("ReceivedSimulator: clutter basis dimension mismatch");

  const double cnr = std::pow(10.0, cnr_db / 10.0);
  const double lambda_sum = clutter.eigenvalues.sum();
  if (clutter.rank() > 0 && cnr > 0.0 && lambda_sum > 0.0) {
    // total received clutter power cnr * sigma2 * K, split along the
    // retained eigenvalue profile
    const double scale = cnr * sigma2 * static_cast<double>(dim_) / lambda_sum;
    clutter_factor_ = clutter.u * (scale * clutter.eigenvalues)
                                      .cwiseSqrt()
                                      .asDiagonal()
                                      .toDenseMatrix()
                                      .cast<Complex>();
  } else {
    clutter_factor_ = Matrix::Zero(dim_, 0);
  }
}

Matrix ReceivedSimulator::simulate(Hypothesis hyp, std::mt19937_64& gen) const {
  Matrix y(dim_, symbols_);
  Vector zc(clutter_factor_.cols());
  for (int l = 0; l < symbols_; ++l) {
    for (Eigen::Index i = 0; i < zc.size(); ++i)
      zc(i) = rng::standard_complex_gaussian(gen);
    Vector col(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i)
      col(i) = noise_sigma_ * rng::standard_complex_gaussian(gen);
    if (zc.size() > 0) col += clutter_factor_ * zc;
    if (hyp == Hypothesis::kTarget) {
      const Complex s = rng::qpsk_symbol(gen);
      col += target_.draw(gen) * s;
    }
    y.col(l) = col;
  }
  return y;
}

double empirical_quantile(std::vector<double> samples, double level) {
  if (samples.empty()) throw Error("empirical_quantile: empty sample");
  if (!(level >= 0.0 && level <= 1.0))
    throw Error("empirical_quantile: level outside [0, 1]");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  auto idx = static_cast<std::ptrdiff_t>(std::floor(level * n));
  idx = std::min<std::ptrdiff_t>(idx, samples.size() - 1);
  return samples[static_cast<std::size_t>(idx)];
}

ThresholdCalibration calibrate_threshold(const ReceivedSimulator& sim,
                                         const Matrix& t, double alpha,
                                         int trials, const StreamKey& key,
                                         int threads) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error("calibrate_threshold: alpha outside (0, 1)");
  if (static_cast<double>(trials) < 50.0 / alpha)
    throw InsufficientTrialsError(
        "calibrate_threshold: need at least 50/alpha trials");

  std::vector<double> stats(static_cast<std::size_t>(trials));
  parallel_for_chunks(stats.size(), threads,
                      [&](std::size_t begin, std::size_t end) {
                        for (std::size_t i = begin; i < end; ++i) {
                          std::mt19937_64 gen = key.trial_stream(i);
                          const Matrix y = sim.simulate(Hypothesis::kNull, gen);
                          stats[i] = test_statistic(y, t);
                        }
                      });

  ThresholdCalibration out;
  out.alpha = alpha;
  out.trials = trials;
  out.threshold = empirical_quantile(stats, 1.0 - alpha);
  std::int64_t hits = 0;
  for (double s : stats) hits += (s >= out.threshold) ? 1 : 0;
  out.realized_on_sample = static_cast<double>(hits) / trials;
  // A fresh same-size measurement carries both the quantile-estimation and
  // the re-measurement binomial variance.
  const double halfwidth =
      1.96 * std::sqrt(2.0 * alpha * (1.0 - alpha) / trials);
  out.ci_lo = std::max(0.0, alpha - halfwidth);
  out.ci_hi = alpha + halfwidth;
  return out;
}

double RateEstimate::standard_error() const {
  if (trials <= 0) return 0.0;
  const double p =
      (static_cast<double>(hits) + 1.0) / (static_cast<double>(trials) + 2.0);
  return std::sqrt(p * (1.0 - p) / trials);
}

RateEstimate decision_rate(const ReceivedSimulator& sim,
                           const DetectorSpec& spec, Hypothesis hyp,
                           int trials, const StreamKey& key, int threads) {
  if (trials < 1) throw Error("decision_rate: need at least one trial");
  std::atomic<std::int64_t> hits{0};
  parallel_for_chunks(
      static_cast<std::size_t>(trials), threads,
      [&](std::size_t begin, std::size_t end) {
        std::int64_t local = 0;
        for (std::size_t i = begin; i < end; ++i) {
          std::mt19937_64 gen = key.trial_stream(i);
          const Matrix y = sim.simulate(hyp, gen);
          if (test_statistic(y, spec.t) >= spec.threshold) ++local;
        }
        hits.fetch_add(local, std::memory_order_relaxed);
      });
  RateEstimate out;
  out.hits = hits.load();
  out.trials = trials;
  out.rate = static_cast<double>(out.hits) / trials;
  return out;
}

}  // namespace risdet::detector
