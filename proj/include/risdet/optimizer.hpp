#pragma once

#include "risdet/channel.hpp"
#include "risdet/numerics.hpp"

namespace risdet::optimizer {

/// Per-element phase alignment of the cascade toward the target: each
/// summand of b_t^T D_psi h of the cascade scalar is rotated onto the
/// positive real axis, so the scalar becomes sum_n |b_n| |h_n|. Entries
/// where the product vanishes get phase zero.
channel::RisPhases optimize_phases(const Vector& b_t, const Vector& hbar_r2);

/// |h1^T p|^2 / sigma2.
double communication_snr(const Vector& h1, const Vector& p, double sigma2);

/// maximize x^H A x + 2 Re(x^H b) subject to ||x||^2 = c, with A Hermitian
/// PSD. The multiplier of the global maximizer sits at or above the largest
/// eigenvalue.
struct NormQpProblem {
  Matrix a;
  Vector b;
  double c = 0.0;
};

struct NormQpSolution {
  Vector x;
  double multiplier = 0.0;     // gamma*
  bool hard_case = false;      // b orthogonal to the top eigenspace, large c
  double kkt_residual = 0.0;   // ||(gamma* I - A) x - b|| / scale
  double norm_error = 0.0;     // | ||x||^2 - c | / c
};

NormQpSolution solve_norm_constrained_qp(const NormQpProblem& prob);

/// Objective value x^H A x + 2 Re(x^H b); shared by the solver and the
/// search oracles in the test suites.
double norm_qp_objective(const NormQpProblem& prob, const Vector& x);

enum class PrecoderCase {
  kEigenvectorInterior,  // power-only constraint active
  kBoundaryQp,           // communication constraint active, QP on the rest
};

struct PrecoderSolution {
  Vector p;
  double comm_snr = 0.0;    // achieved |h1^T p|^2 / sigma2
  double objective = 0.0;   // p^H C p
  PrecoderCase case_fired = PrecoderCase::kEigenvectorInterior;
  double kkt_residual = 0.0;
  bool hard_case = false;
};

/// Sensing-gain-maximizing precoder under ||p||^2 = total_power and a
/// communication SNR floor. Throws InfeasibleError when even the matched
/// filter cannot reach the SNR target.
PrecoderSolution optimize_precoder(const Matrix& c, const Vector& h1,
                                   double total_power, double gamma_th,
                                   double sigma2);

}  // namespace risdet::optimizer
