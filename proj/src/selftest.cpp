#include "risdet/selftest.hpp"

#include <cmath>
#include <random>

#include "risdet/channel.hpp"
#include "risdet/detector.hpp"
#include "risdet/numerics.hpp"
#include "risdet/optimizer.hpp"
#include "risdet/rng.hpp"
#include "risdet/sensing.hpp"

namespace risdet::selftest {

namespace {

Vector random_vector(Eigen::Index n, std::mt19937_64& gen) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = rng::standard_complex_gaussian(gen);
  return v;
}

Matrix random_psd(Eigen::Index n, std::mt19937_64& gen) {
  Matrix a(n, n);
  for (Eigen::Index j = 0; j < n; ++j) a.col(j) = random_vector(n, gen);
  Matrix m = a * a.adjoint() / static_cast<double>(n);
  return 0.5 * (m + m.adjoint()).eval();
}

channel::ChannelSet random_channels(Eigen::Index k, Eigen::Index n,
                                    std::mt19937_64& gen) {
  channel::ChannelSet ch;
  ch.a_t = random_vector(k, gen);
  ch.b_t = random_vector(n, gen);
  ch.hbar_s2 = random_vector(k, gen);
  ch.hbar_r2 = random_vector(n, gen);
  ch.r_s2 = random_psd(k, gen);
  ch.r_r2 = random_psd(n, gen);
  ch.r_clutter = random_psd(k, gen);
  ch.h_s1 = random_vector(k, gen);
  ch.h_r1 = random_vector(n, gen);
  return ch;
}

struct Reporter {
  std::ostream& out;
  bool all_ok = true;

  void check(const char* name, bool ok, double worst) {
    out << (ok ? "[ok]   " : "[FAIL] ") << name << " (worst " << worst
        << ")\n";
    all_ok = all_ok && ok;
  }
};

}  // namespace

bool run(std::ostream& out, std::uint64_t seed) {
  std::mt19937_64 gen =
      rng::derive_stream(seed, {rng::tag(rng::Purpose::kSelftest)});
  Reporter report{out};

  {  // eigendecomposition reconstruction
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      Matrix m = random_psd(6, gen);
      const numerics::EigenDecomposition eig = numerics::hermitian_eig(m);
      Matrix rebuilt =
          eig.eigenvectors *
          eig.eigenvalues.asDiagonal().toDenseMatrix().cast<Complex>() *
          eig.eigenvectors.adjoint();
      worst = std::max(worst, (rebuilt - m).norm() / std::max(1.0, m.norm()));
    }
    report.check("hermitian eigendecomposition reconstruction", worst < 1e-8,
                 worst);
  }

  {  // QR contract
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      Matrix a(8, 4);
      for (int j = 0; j < 4; ++j) a.col(j) = random_vector(8, gen);
      const numerics::QrResult qr = numerics::gram_schmidt_qr(a);
      worst = std::max(worst, (qr.q.adjoint() * qr.q - Matrix::Identity(4, 4))
                                  .cwiseAbs()
                                  .maxCoeff());
      worst = std::max(worst, (qr.q * qr.r - a).norm() / a.norm());
    }
    report.check("orthogonalization contract", worst < 1e-9, worst);
  }

  {  // trace identity between the covariance and gain assemblies
    double worst = 0.0;
    for (int t = 0; t < 30; ++t) {
      channel::ChannelSet ch = random_channels(4, 3, gen);
      channel::RisPhases psi = channel::RisPhases::random(3, gen);
      Vector p = random_vector(4, gen);
      sensing::RcsVariances betas{0.3, 1.5, 0.8};
      const Matrix r = sensing::target_covariance(ch, psi, p, betas);
      const Matrix c = sensing::gain_matrix(ch, psi, betas);
      const double tr = r.trace().real();
      const double quad = std::real(Complex(p.adjoint() * c * p));
      worst = std::max(worst, std::abs(quad - tr) / tr);
    }
    report.check("sensing gain trace identity", worst < 1e-10, worst);
  }

  {  // norm-constrained QP optimality conditions
    double worst = 0.0;
    for (int t = 0; t < 30; ++t) {
      optimizer::NormQpProblem prob;
      const Eigen::Index n = 2 + static_cast<Eigen::Index>(gen() % 5);
      prob.a = random_psd(n, gen);
      prob.b = random_vector(n, gen);
      prob.c = 0.5 + 0.1 * t;
      const optimizer::NormQpSolution sol =
          optimizer::solve_norm_constrained_qp(prob);
      worst = std::max({worst, sol.kkt_residual, sol.norm_error});
    }
    report.check("norm-constrained QP optimality", worst < 1e-8, worst);
  }

  {  // phase rule coherence and dominance
    double worst = 0.0;
    bool dominated = true;
    for (int t = 0; t < 3; ++t) {
      Vector b = random_vector(32, gen);
      Vector h = random_vector(32, gen);
      const channel::RisPhases best = optimizer::optimize_phases(b, h);
      const double want = (b.array().abs() * h.array().abs()).sum();
      const Complex got =
          (b.array() * best.unit_factors().array() * h.array()).sum();
      worst = std::max(worst, std::abs(got - Complex(want)) / want);
      for (int r = 0; r < 200; ++r) {
        const channel::RisPhases other = channel::RisPhases::random(32, gen);
        const Complex val =
            (b.array() * other.unit_factors().array() * h.array()).sum();
        dominated = dominated && std::abs(val) <= want * (1.0 + 1e-12);
      }
    }
    report.check("surface phase rule coherence and dominance",
                 worst < 1e-12 && dominated, worst);
  }

  {  // precoder dominance over random feasible points
    double margin = 0.0;
    bool ok = true;
    for (int t = 0; t < 3; ++t) {
      Matrix c = random_psd(4, gen);
      Vector h1 = random_vector(4, gen);
      const double pt = 1.0, sigma2 = 1.0;
      const double gth = 0.4 * pt * h1.squaredNorm() / sigma2;
      const optimizer::PrecoderSolution sol =
          optimizer::optimize_precoder(c, h1, pt, gth, sigma2);
      ok = ok && std::abs(sol.p.squaredNorm() - pt) < 1e-8 * pt &&
           sol.comm_snr >= gth * (1.0 - 1e-8);
      const Vector hdir = h1.conjugate() / h1.norm();
      for (int r = 0; r < 20000; ++r) {
        Vector p = random_vector(4, gen);
        p *= std::sqrt(pt) / p.norm();
        if (std::norm(Complex(h1.transpose() * p)) < gth * sigma2) {
          const Complex coeff = Complex(h1.transpose() * p) / h1.norm();
          Vector perp = p - coeff * hdir;
          const double c_min = std::sqrt(gth * sigma2) / h1.norm();
          const Complex unit =
              std::abs(coeff) > 0.0 ? coeff / std::abs(coeff) : Complex(1.0);
          if (perp.norm() > 1e-12)
            perp *= std::sqrt(std::max(pt - c_min * c_min, 0.0)) / perp.norm();
          p = c_min * unit * hdir + perp;
        }
        const double value = std::real(Complex(p.adjoint() * c * p));
        margin = std::max(margin, value - sol.objective);
        ok = ok && value <= sol.objective * (1.0 + 1e-9);
      }
    }
    report.check("precoder dominance over random feasible points", ok, margin);
  }

  {  // clutter directions are invisible to the detector statistic
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const double sigma2 = 0.7;
      Matrix r = random_psd(6, gen);
      Matrix raw(6, 3);
      for (int j = 0; j < 3; ++j) raw.col(j) = random_vector(6, gen);
      const Matrix u = numerics::gram_schmidt_qr(raw).q;
      const Matrix tmat = detector::build_test_matrix(r, u, sigma2);
      const Vector dir = u * random_vector(3, gen);
      const double quad =
          std::abs(std::real(Complex(dir.adjoint() * tmat * dir)));
      worst = std::max(worst, quad * sigma2 / dir.squaredNorm());
    }
    report.check("clutter subspace cancellation in the test matrix",
                 worst < 1e-8, worst);
  }

  out << (report.all_ok ? "selftest: all checks passed\n"
                        : "selftest: FAILURES present\n");
  return report.all_ok;
}

}  // namespace risdet::selftest
