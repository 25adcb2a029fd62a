#include "risdet/sensing.hpp"

#include <cmath>

#include "risdet/errors.hpp"
#include "risdet/rng.hpp"

namespace risdet::sensing {

namespace {

void require_valid(const channel::ChannelSet& ch, const Vector& p,
                   const RcsVariances& betas) {
  const Eigen::Index k = ch.hbar_s2.size();
  const Eigen::Index n = ch.hbar_r2.size();
  if (ch.a_t.size() != k || p.size() != k || ch.r_s2.rows() != k ||
      ch.r_s2.cols() != k)
    throw DimensionError("sensing: transceiver-side dimensions disagree");
  if (ch.b_t.size() != n || ch.r_r2.rows() != n || ch.r_r2.cols() != n)
    throw DimensionError("sensing: surface-side dimensions disagree");
  if (betas.beta1 < 0.0 || betas.beta2 < 0.0 || betas.beta3 < 0.0)
    throw Error("sensing: RCS variances must be nonnegative");
}

/// The recurring covariance group: |h^T p|^2 (h h^H + R)
/// + h h^H (p^H R^T p) + h h^H p* p^T R + R p* p^T h h^H.
Matrix covariance_group(const Vector& h, const Matrix& r, const Vector& p) {
  const Complex hp = h.transpose() * p;
  const Matrix hh = h * h.adjoint();
  const Complex quad = p.adjoint() * r.transpose() * p;
  const Matrix outer_p = p.conjugate() * p.transpose();
  return std::norm(hp) * (hh + r) + quad * hh + hh * outer_p * r +
         r * outer_p * hh;
}

/// The recurring gain-matrix group: (||h||^2 + tr R) h* h^T
/// + ||h||^2 R^T + h* h^T R^T + R^T h* h^T.
Matrix gain_group(const Vector& h, const Matrix& r) {
  const double n2 = h.squaredNorm();
  const double tr = r.trace().real();
  const Matrix hh = h.conjugate() * h.transpose();
  const Matrix rt = r.transpose();
  return (n2 + tr) * hh + n2 * rt + hh * rt + rt * hh;
}

}  // namespace

Matrix target_covariance(const channel::ChannelSet& ch,
                         const channel::RisPhases& phases, const Vector& p,
                         const RcsVariances& betas) {
  require_valid(ch, p, betas);
  const Vector& hs = ch.hbar_s2;
  const Vector hc = channel::cascaded_channel(ch.a_t, ch.b_t, phases, ch.hbar_r2);
  const Matrix& rs = ch.r_s2;
  const Matrix rc = channel::cascaded_correlation(ch.a_t, ch.b_t, phases, ch.r_r2);

  Matrix r = betas.beta1 * covariance_group(hs, rs, p) +
             betas.beta2 * covariance_group(hc, rc, p);

  // mixed-path LOS outer product
  const Vector u = (hc.transpose() * p) * hs + (hs.transpose() * p) * hc;
  r += betas.beta3 * (u * u.adjoint());

  // mixed-path NLOS groups; the pure-LOS outer products already sit in u u^H,
  // so only the correlation pieces of each group remain
  const auto cross_group = [&](const Vector& h, const Matrix& rm) {
    const Complex hp = h.transpose() * p;
    const Matrix hh = h * h.adjoint();
    const Complex quad = p.adjoint() * rm.transpose() * p;
    const Matrix outer_p = p.conjugate() * p.transpose();
    return (std::norm(hp) * rm + quad * hh + hh * outer_p * rm +
            rm * outer_p * hh)
        .eval();
  };
  r += betas.beta3 * cross_group(hs, rc);
  r += betas.beta3 * cross_group(hc, rs);

  r = 0.5 * (r + r.adjoint()).eval();

  // clip the floating-point negative tail; a structurally negative
  // eigenvalue means the assembly itself is wrong
  numerics::EigenDecomposition eig = numerics::hermitian_eig(r);
  const double lambda_max = std::max(eig.eigenvalues.maxCoeff(), 0.0);
  if (eig.eigenvalues.minCoeff() < -1e-10 * lambda_max)
    throw NotPsdError("target_covariance: significantly negative eigenvalue");
  if (eig.eigenvalues.minCoeff() < 0.0) {
    RealVector clipped = eig.eigenvalues.cwiseMax(0.0);
    r = eig.eigenvectors * clipped.asDiagonal().toDenseMatrix().cast<Complex>() *
        eig.eigenvectors.adjoint();
    r = 0.5 * (r + r.adjoint()).eval();
  }
  return r;
}

Matrix gain_matrix(const channel::ChannelSet& ch,
                   const channel::RisPhases& phases,
                   const RcsVariances& betas) {
  require_valid(ch, Vector::Zero(ch.hbar_s2.size()), betas);
  const Vector& hs = ch.hbar_s2;
  const Vector hc = channel::cascaded_channel(ch.a_t, ch.b_t, phases, ch.hbar_r2);
  const Matrix& rs = ch.r_s2;
  const Matrix rc = channel::cascaded_correlation(ch.a_t, ch.b_t, phases, ch.r_r2);

  Matrix c = betas.beta1 * gain_group(hs, rs) + betas.beta2 * gain_group(hc, rc);

  const Matrix hsh = hs.conjugate() * hs.transpose();
  const Matrix hch = hc.conjugate() * hc.transpose();
  const double ns = hs.squaredNorm();
  const double nc = hc.squaredNorm();
  const double trs = rs.trace().real();
  const double trc = rc.trace().real();
  const Matrix rst = rs.transpose();
  const Matrix rct = rc.transpose();

  c += betas.beta3 * ((ns + trs) * hch + ns * rct + hsh * rct + rct * hsh +
                      (hs.dot(hc)) * (hc.conjugate() * hs.transpose()));
  c += betas.beta3 * ((nc + trc) * hsh + nc * rst + hch * rst + rst * hch +
                      (hc.dot(hs)) * (hs.conjugate() * hc.transpose()));

  return 0.5 * (c + c.adjoint()).eval();
}

EffectiveChannelSampler::EffectiveChannelSampler(
    const channel::ChannelSet& ch, const channel::RisPhases& phases,
    const Vector& p, const RcsVariances& betas)
    : betas_(betas),
      hbar_s2_(ch.hbar_s2),
      hbar_c2_(channel::cascaded_channel(ch.a_t, ch.b_t, phases, ch.hbar_r2)),
      a_t_(ch.a_t) {
  require_valid(ch, p, betas);
  nlos_s2_factor_ = numerics::psd_factor(ch.r_s2);
  const Matrix r2_factor = numerics::psd_factor(ch.r_r2);
  const Vector w = ch.b_t.array() * phases.unit_factors().array();
  w_r2_ = w.transpose() * r2_factor;
  p_bs_ = p.transpose() * nlos_s2_factor_;
  hs_p_ = hbar_s2_.transpose() * p;
  hc_p_ = hbar_c2_.transpose() * p;
  at_p_ = a_t_.transpose() * p;
}

Vector EffectiveChannelSampler::draw(std::mt19937_64& gen) const {
  const Complex a1 =
      std::sqrt(betas_.beta1) * rng::standard_complex_gaussian(gen);
  const Complex a2 =
      std::sqrt(betas_.beta2) * rng::standard_complex_gaussian(gen);
  const Complex a3 =
      std::sqrt(betas_.beta3) * rng::standard_complex_gaussian(gen);

  Vector zs(nlos_s2_factor_.cols());
  for (Eigen::Index i = 0; i < zs.size(); ++i)
    zs(i) = rng::standard_complex_gaussian(gen);
  Vector zr(w_r2_.cols());
  for (Eigen::Index i = 0; i < zr.size(); ++i)
    zr(i) = rng::standard_complex_gaussian(gen);

  const bool have_s = nlos_s2_factor_.cols() > 0;
  const Vector hts =
      have_s ? Vector(nlos_s2_factor_ * zs) : Vector(Vector::Zero(dim()));
  const Complex hts_p = have_s ? Complex(p_bs_ * zs) : Complex(0.0);
  const Complex casc = w_r2_.cols() > 0 ? Complex(w_r2_ * zr) : Complex(0.0);
  const Complex htc_p = casc * at_p_;

  const Complex a1s = a1 * (hs_p_ + hts_p);
  const Complex a2c = a2 * (hc_p_ + htc_p);
  const Complex a3s = a3 * (hs_p_ + hts_p);
  const Complex a3c = a3 * (hc_p_ + htc_p);
  return (a1s + a3c) * hbar_s2_ + (a2c + a3s) * hbar_c2_ +
         (a1 * hs_p_ + a3 * hc_p_) * hts +
         ((a2 * hc_p_ + a3 * hs_p_) * casc) * a_t_;
}

Vector sample_effective_channel(const channel::ChannelSet& ch,
                                const channel::RisPhases& phases,
                                const Vector& p, const RcsVariances& betas,
                                std::mt19937_64& gen) {
  return EffectiveChannelSampler(ch, phases, p, betas).draw(gen);
}

}  // namespace risdet::sensing
