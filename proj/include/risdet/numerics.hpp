#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <random>

namespace risdet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace numerics {

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order and orthonormal eigenvectors as columns.
struct EigenDecomposition {
  RealVector eigenvalues;
  Matrix eigenvectors;
};

/// Decomposes a Hermitian matrix. Throws NonFiniteError on NaN/Inf entries
/// and NonHermitianError when the relative asymmetry exceeds 1e-10.
EigenDecomposition hermitian_eig(const Matrix& m);

/// Thin QR factorization A = Q R with orthonormal Q and an upper-triangular
/// R whose diagonal is real and positive. Modified Gram-Schmidt with one
/// re-orthogonalization pass; throws RankDeficientError when a column is
/// (numerically) dependent on its predecessors.
struct QrResult {
  Matrix q;
  Matrix r;
};
QrResult gram_schmidt_qr(const Matrix& a);

/// Factor B with B B^H = M for Hermitian PSD M. B has one column per
/// eigenvalue above tol * lambda_max (the numerical rank). Throws NotPsdError
/// when an eigenvalue is below -tol * lambda_max.
Matrix psd_factor(const Matrix& m, double tol = 1e-10);

/// Root of a continuous, strictly monotone f bracketed by [lo, hi]; returns
/// the bracket midpoint once the bracket width is <= tol. Throws BracketError
/// when f(lo) and f(hi) share a sign, MaxIterationsError after 200 halvings.
double bisection_root(const std::function<double(double)>& f, double lo,
                      double hi, double tol);

/// Prefactored sampler for CN(0, R): draw() returns B z with z i.i.d.
/// standard circular complex Gaussian and B = psd_factor(R). Factor once,
/// draw many times in Monte Carlo loops.
class GaussianSampler {
 public:
  GaussianSampler() = default;
  explicit GaussianSampler(const Matrix& r, double tol = 1e-10);

  Vector draw(std::mt19937_64& gen) const;
  Eigen::Index dim() const { return factor_.rows(); }
  Eigen::Index rank() const { return factor_.cols(); }
  const Matrix& factor() const { return factor_; }

 private:
  Matrix factor_;
};

/// One draw from CN(0, R). Factorizes R on every call; use GaussianSampler
/// when sampling repeatedly from the same matrix.
Vector sample_complex_gaussian(const Matrix& r, std::mt19937_64& gen);

}  // namespace numerics
}  // namespace risdet
