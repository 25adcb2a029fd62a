#include "risdet/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "risdet/errors.hpp"
#include "risdet/rng.hpp"

namespace risdet::numerics {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw NonFiniteError(std::string(what) + ": input has NaN or Inf entries");
}

void require_hermitian(const Matrix& m, const char* what) {
  if (m.rows() != m.cols())
    throw DimensionError(std::string(what) + ": matrix is not square");
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw NonHermitianError(std::string(what) + ": relative asymmetry " +
                            std::to_string(asym / scale) + " exceeds 1e-10");
}

}  // namespace

EigenDecomposition hermitian_eig(const Matrix& m) {
  require_finite(m, "hermitian_eig");
  require_hermitian(m, "hermitian_eig");
  const Matrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error("hermitian_eig: eigensolver failed to converge");
  EigenDecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

QrResult gram_schmidt_qr(const Matrix& a) {
  require_finite(a, "gram_schmidt_qr");
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  if (cols == 0 || rows < cols)
    throw DimensionError("gram_schmidt_qr: need 1 <= cols <= rows");

  double max_col_norm = 0.0;
  for (Eigen::Index j = 0; j < cols; ++j)
    max_col_norm = std::max(max_col_norm, a.col(j).norm());

  QrResult out;
  out.q = Matrix::Zero(rows, cols);
  out.r = Matrix::Zero(cols, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    Vector v = a.col(j);
    // Re-orthogonalize once: plain MGS loses orthogonality on correlated
    // columns at the sizes used here.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const Complex c = out.q.col(i).dot(v);  // q_i^H v
        out.r(i, j) += c;
        v -= c * out.q.col(i);
      }
    }
    const double norm = v.norm();
    if (norm <= 1e-10 * max_col_norm)
      throw RankDeficientError(
          "gram_schmidt_qr: column " + std::to_string(j) +
          " is linearly dependent on the preceding columns");
    out.r(j, j) = norm;
    out.q.col(j) = v / norm;
  }
  return out;
}

Matrix psd_factor(const Matrix& m, double tol) {
  const EigenDecomposition eig = hermitian_eig(m);
  const Eigen::Index n = m.rows();
  const double lambda_max = n > 0 ? std::max(eig.eigenvalues(0), 0.0) : 0.0;
  const double lambda_min = n > 0 ? eig.eigenvalues(n - 1) : 0.0;
  const double scale = std::max(lambda_max, std::abs(lambda_min));
  if (lambda_min < -tol * scale)
    throw NotPsdError("psd_factor: eigenvalue " + std::to_string(lambda_min) +
                      " is significantly negative");
  Eigen::Index rank = 0;
  while (rank < n && eig.eigenvalues(rank) > tol * lambda_max) ++rank;
  Matrix b(n, rank);
  for (Eigen::Index i = 0; i < rank; ++i)
    b.col(i) = eig.eigenvectors.col(i) * std::sqrt(eig.eigenvalues(i));
  return b;
}

double bisection_root(const std::function<double(double)>& f, double lo,
                      double hi, double tol) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || lo >= hi)
    throw BracketError("bisection_root: invalid bracket");
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw BracketError("bisection_root: f(lo) and f(hi) have the same sign");
  constexpr int kMaxIterations = 200;
  for (int it = 0; it < kMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  if (hi - lo <= tol) return 0.5 * (lo + hi);
  throw MaxIterationsError("bisection_root: bracket width " +
                           std::to_string(hi - lo) +
                           " above tol after 200 iterations");
}

GaussianSampler::GaussianSampler(const Matrix& r, double tol)
    : factor_(psd_factor(r, tol)) {}

Vector GaussianSampler::draw(std::mt19937_64& gen) const {
  Vector z(factor_.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    z(i) = rng::standard_complex_gaussian(gen);
  if (factor_.cols() == 0) return Vector::Zero(factor_.rows());
  return factor_ * z;
}

Vector sample_complex_gaussian(const Matrix& r, std::mt19937_64& gen) {
  return GaussianSampler(r).draw(gen);
}

}  // namespace risdet::numerics
