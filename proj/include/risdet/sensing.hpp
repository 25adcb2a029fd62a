#pragma once

#include <random>

#include "risdet/channel.hpp"
#include "risdet/numerics.hpp"

namespace risdet::sensing {

/// Radar cross-section variances of the three echo paths: direct,
/// via-surface, and the mixed path (which appears twice by reciprocity).
struct RcsVariances {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
};

/// Closed-form covariance of the effective target return for a given
/// precoder and surface configuration. Output is symmetrized and has tiny
/// negative eigenvalues clipped; a significantly negative eigenvalue
/// (below -1e-10 relative) throws NotPsdError.
Matrix target_covariance(const channel::ChannelSet& ch,
                         const channel::RisPhases& phases, const Vector& p,
                         const RcsVariances& betas);

/// Gain matrix C with p^H C p = tr(target_covariance(..., p, ...)) for
/// every precoder p: the sensing objective as a quadratic form.
Matrix gain_matrix(const channel::ChannelSet& ch,
                   const channel::RisPhases& phases, const RcsVariances& betas);

/// Draws realizations of the effective received target channel (already
/// right-multiplied by the precoder). RCS coefficients and NLOS channels are
/// redrawn independently on every call; the double-NLOS products are
/// excluded. Factors the NLOS correlations once, so per-draw cost is linear
/// in the array sizes.
class EffectiveChannelSampler {
 public:
  EffectiveChannelSampler(const channel::ChannelSet& ch,
                          const channel::RisPhases& phases, const Vector& p,
                          const RcsVariances& betas);

  Vector draw(std::mt19937_64& gen) const;
  Eigen::Index dim() const { return hbar_s2_.size(); }

 private:
  RcsVariances betas_;
  Vector hbar_s2_, hbar_c2_, a_t_;
  Matrix nlos_s2_factor_;     // B with B B^H = R_s2
  Eigen::RowVectorXcd w_r2_;  // (D_psi b_t)^T B_r2
  Eigen::RowVectorXcd p_bs_;  // p^T B_s2
  Complex hs_p_, hc_p_, at_p_;
};

/// One draw of the four-path effective return; convenience wrapper that
/// factorizes per call. Use EffectiveChannelSampler in Monte Carlo loops.
Vector sample_effective_channel(const channel::ChannelSet& ch,
                                const channel::RisPhases& phases,
                                const Vector& p, const RcsVariances& betas,
                                std::mt19937_64& gen);

}  // namespace risdet::sensing
