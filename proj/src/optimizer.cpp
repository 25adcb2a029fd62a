#include "risdet/optimizer.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "risdet/errors.hpp"

namespace risdet::optimizer {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Gram-Schmidt that drops (numerically) dependent columns instead of
/// throwing: q has one column per kept pivot, r maps every input column onto
/// those pivots. With a full-rank input this coincides with the strict QR.
struct StairQr {
  Matrix q;  // rows x kept
  Matrix r;  // kept x cols
};

StairQr deflating_gram_schmidt(const Matrix& a, double tol) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  double max_col_norm = 0.0;
  for (Eigen::Index j = 0; j < cols; ++j)
    max_col_norm = std::max(max_col_norm, a.col(j).norm());

  Matrix q(rows, cols);
  Matrix r = Matrix::Zero(cols, cols);
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    Vector v = a.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < kept; ++i) {
        const Complex c = q.col(i).dot(v);
        r(i, j) += c;
        v -= c * q.col(i);
      }
    }
    const double norm = v.norm();
    if (norm > tol * max_col_norm) {
      r(kept, j) = norm;
      q.col(kept) = v / norm;
      ++kept;
    }
  }
  StairQr out;
  out.q = q.leftCols(kept);
  out.r = r.topRows(kept);
  return out;
}

}  // namespace

channel::RisPhases optimize_phases(const Vector& b_t, const Vector& hbar_r2) {
  if (b_t.size() != hbar_r2.size())
    throw DimensionError("optimize_phases: vector sizes disagree");
  Eigen::VectorXd psi(b_t.size());
  for (Eigen::Index n = 0; n < b_t.size(); ++n) {
    const Complex prod = b_t(n) * hbar_r2(n);
    double phase = prod == Complex(0.0) ? 0.0 : -std::arg(prod);
    phase = std::fmod(phase, kTwoPi);
    if (phase < 0.0) phase += kTwoPi;
    if (phase >= kTwoPi) phase = 0.0;
    psi(n) = phase;
  }
  return {std::move(psi)};
}

double communication_snr(const Vector& h1, const Vector& p, double sigma2) {
  if (h1.size() != p.size())
    throw DimensionError("communication_snr: vector sizes disagree");
  if (!(sigma2 > 0.0))
    throw Error("communication_snr: sigma2 must be positive");
  return std::norm(Complex(h1.transpose() * p)) / sigma2;
}

double norm_qp_objective(const NormQpProblem& prob, const Vector& x) {
  const Complex quad = x.adjoint() * prob.a * x;
  const Complex lin = x.adjoint() * prob.b;
  return quad.real() + 2.0 * lin.real();
}

NormQpSolution solve_norm_constrained_qp(const NormQpProblem& prob) {
  if (prob.b.size() != prob.a.rows())
    throw DimensionError("solve_norm_constrained_qp: dimension mismatch");
  if (!(prob.c >= 0.0))
    throw Error("solve_norm_constrained_qp: radius must be nonnegative");

  const Eigen::Index n = prob.a.rows();
  NormQpSolution sol;
  if (prob.c == 0.0) {
    sol.x = Vector::Zero(n);
    sol.multiplier = std::numeric_limits<double>::infinity();
    return sol;
  }

  const numerics::EigenDecomposition eig = numerics::hermitian_eig(prob.a);
  const RealVector& lambda = eig.eigenvalues;
  const Matrix& u = eig.eigenvectors;
  if (lambda(n - 1) < -1e-10 * std::max(lambda(0), 0.0))
    throw NotPsdError("solve_norm_constrained_qp: matrix not PSD");
  const double lam1 = lambda(0);
  const Vector d = u.adjoint() * prob.b;
  const double b_norm = prob.b.norm();
  const double sqrt_c = std::sqrt(prob.c);
  const double scale = std::max(b_norm, std::max(lam1, 1e-300) * sqrt_c);

  // vanishing linear term: pure eigenvector solution
  const double trace = std::max(prob.a.trace().real(), 0.0);
  if (b_norm < 1e-14 || b_norm < 1e-12 * std::sqrt(trace * prob.c)) {
    sol.x = sqrt_c * u.col(0);
    sol.multiplier = lam1;
    sol.kkt_residual =
        ((lam1 * sol.x - prob.a * sol.x) - prob.b).norm() / scale;
    sol.norm_error = std::abs(sol.x.squaredNorm() - prob.c) / prob.c;
    return sol;
  }

  const auto secular = [&](double gamma) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = std::norm(d(i));
      if (w == 0.0) continue;  // a vanished weight removes the pole entirely
      const double gap = gamma - lambda(i);
      s += w / (gap * gap);
    }
    return s;
  };

  // bracket the multiplier: the top-component bound puts the root at or
  // above lam1 + |d_1| / sqrt(c)
  double offset = std::abs(d(0)) / sqrt_c;
  if (!(offset > 0.0)) offset = 1e-9 * std::max(lam1, 1.0);
  int shrink = 0;
  while (secular(lam1 + offset) <= prob.c && shrink < 120) {
    offset *= 0.5;
    if (lam1 + offset == lam1) break;
    ++shrink;
  }

  if (secular(lam1 + offset) <= prob.c) {
    // hard case: no root above lam1; complete with the top eigenvector
    sol.hard_case = true;
    sol.multiplier = lam1;
    Vector x = Vector::Zero(n);
    const double gap_tol = 1e-14 * std::max(lam1 - lambda(n - 1), 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double gap = lam1 - lambda(i);
      if (gap > gap_tol) x += u.col(i) * (d(i) / gap);
    }
    const double tau =
        std::sqrt(std::max(prob.c - x.squaredNorm(), 0.0));
    x += tau * u.col(0);
    sol.x = x;
  } else {
    double lo = lam1 + offset;
    double hi = lam1 + std::max(2.0 * offset, b_norm / sqrt_c + 1.0);
    int grow = 0;
    while (secular(hi) > prob.c && grow < 200) {
      hi = lam1 + 2.0 * (hi - lam1);
      ++grow;
    }
    const double tol =
        4.0 * std::numeric_limits<double>::epsilon() *
        std::max({std::abs(lo), std::abs(hi), 1.0});
    const double gamma = numerics::bisection_root(
        [&](double g) { return secular(g) - prob.c; }, lo, hi, tol);
    sol.multiplier = gamma;
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = d(i) / (gamma - lambda(i));
    sol.x = u * x;

    // near-hard instances lose the norm through the multiplier's last ulp;
    // re-fit the top component magnitude exactly
    if (std::abs(sol.x.squaredNorm() - prob.c) > 1e-10 * prob.c) {
      Vector perp = Vector::Zero(n);
      for (Eigen::Index i = 1; i < n; ++i)
        perp += u.col(i) * (d(i) / (gamma - lambda(i)));
      const double perp_norm2 = perp.squaredNorm();
      if (perp_norm2 < prob.c) {
        const double mag = std::sqrt(prob.c - perp_norm2);
        const Complex dir =
            std::abs(d(0)) > 0.0 ? d(0) / std::abs(d(0)) : Complex(1.0);
        sol.x = perp + u.col(0) * (mag * dir);
      }
    }
  }

  sol.kkt_residual =
      ((sol.multiplier * sol.x - prob.a * sol.x) - prob.b).norm() / scale;
  sol.norm_error = std::abs(sol.x.squaredNorm() - prob.c) / prob.c;
  return sol;
}

PrecoderSolution optimize_precoder(const Matrix& c, const Vector& h1,
                                   double total_power, double gamma_th,
                                   double sigma2) {
  if (h1.size() != c.rows() || c.rows() != c.cols())
    throw DimensionError("optimize_precoder: dimension mismatch");
  if (!(total_power > 0.0) || !(sigma2 > 0.0) || gamma_th < 0.0)
    throw Error("optimize_precoder: invalid power, noise, or SNR target");
  const double h1_norm = h1.norm();
  if (total_power * h1_norm * h1_norm < gamma_th * sigma2)
    throw InfeasibleError(
        "optimize_precoder: SNR target exceeds the matched-filter bound");

  const Matrix b = numerics::psd_factor(c);
  if (b.cols() == 0)
    throw Error("optimize_precoder: gain matrix is numerically zero");

  Matrix a(h1.size(), b.cols() + 1);
  a.col(0) = h1.conjugate();
  a.rightCols(b.cols()) = b;
  const StairQr qr = deflating_gram_schmidt(a, 1e-10);
  const Eigen::Index m = qr.q.cols();
  const Matrix f = qr.r.rightCols(b.cols());  // m x r2

  const double bound = std::sqrt(gamma_th * sigma2) / h1_norm;

  PrecoderSolution sol;
  Vector x;

  // interior case: top eigenvector of F F^H, rotated and scaled
  const Matrix ff = (f * f.adjoint()).eval();
  const numerics::EigenDecomposition eig = numerics::hermitian_eig(ff);
  Vector top = eig.eigenvectors.col(0) * std::sqrt(total_power);
  if (std::abs(top(0)) > 0.0)
    top *= std::conj(top(0)) / std::abs(top(0));  // x1 real, nonnegative

  if (top(0).real() >= bound) {
    x = top;
    sol.case_fired = PrecoderCase::kEigenvectorInterior;
    sol.kkt_residual = (ff * top - eig.eigenvalues(0) * top).norm() /
                       std::max(eig.eigenvalues(0) * top.norm(), 1e-300);
  } else {
    // boundary case: communication constraint tight, QP over the rest
    sol.case_fired = PrecoderCase::kBoundaryQp;
    const double cbar = total_power - bound * bound;
    NormQpProblem qp;
    const Matrix fbar = f.bottomRows(m - 1);
    qp.a = fbar * fbar.adjoint();
    qp.b = bound * (fbar * f.row(0).adjoint());
    qp.c = cbar;
    NormQpSolution inner = solve_norm_constrained_qp(qp);
    x = Vector(m);
    x(0) = bound;
    x.tail(m - 1) = inner.x;
    sol.kkt_residual = inner.kkt_residual;
    sol.hard_case = inner.hard_case;
  }

  sol.p = qr.q * x;
  sol.objective = std::real(Complex(sol.p.adjoint() * c * sol.p));
  sol.comm_snr = communication_snr(h1, sol.p, sigma2);
  return sol;
}

}  // namespace risdet::optimizer
