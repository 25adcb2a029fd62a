#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "risdet/channel.hpp"
#include "risdet/errors.hpp"
#include "risdet/numerics.hpp"
#include "support.hpp"

using namespace risdet;
using namespace risdet::channel;

namespace {
constexpr double kPi = std::numbers::pi;
using testsup::paper_geometry;
}  // namespace

TEST_CASE("upa_steering: broadside, endfire, and norm") {
  Vector a = upa_steering({3, 2}, Direction(0.0, 0.0));
  CHECK((a - Vector::Ones(6)).cwiseAbs().maxCoeff() < 1e-15);

  a = upa_steering({2, 1}, Direction(kPi / 2, 0.0));
  CHECK(std::abs(a(0) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(a(1) - Complex(-1.0, 0.0)) < 1e-12);

  a = upa_steering({6, 6}, Direction(kPi / 6, -kPi / 5));
  CHECK(a.squaredNorm() == doctest::Approx(36.0).epsilon(1e-12));
  for (Eigen::Index i = 0; i < a.size(); ++i)
    CHECK(std::abs(a(i)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("upa_steering: element order is row-major, horizontal fastest") {
  // 2x2 array at elevation pi/6: vertical phase factor only on q=1 entries.
  Vector a = upa_steering({2, 2}, Direction(0.0, kPi / 6));
  const Complex vert = std::polar(1.0, kPi * std::sin(kPi / 6));
  CHECK(std::abs(a(0) - Complex(1.0, 0.0)) < 1e-14);
  CHECK(std::abs(a(1) - Complex(1.0, 0.0)) < 1e-14);  // p=1, q=0: sin(az)=0
  CHECK(std::abs(a(2) - vert) < 1e-14);
  CHECK(std::abs(a(3) - vert) < 1e-14);
}

TEST_CASE("local_scattering_correlation: zero-spread limit is rank one") {
  const ArrayGeometry geom{4, 3};
  const Direction dir(0.4, -0.2);
  Matrix r = local_scattering_correlation(geom, dir, 1, 1e-12, 1e-12, 1e-9,
                                          10000, 17);
  numerics::EigenDecomposition eig = numerics::hermitian_eig(r);
  CHECK(eig.eigenvalues(0) / eig.eigenvalues.sum() > 0.99);
}

TEST_CASE("local_scattering_correlation: trace normalization and PSD") {
  const ArrayGeometry geom{4, 4};
  Matrix r = local_scattering_correlation(geom, Direction(0.7, 0.1), 6, 0.7,
                                          0.35, 0.17, 12000, 5);
  CHECK(std::abs(r.trace().real() - 16.0) < 1e-9);
  CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  numerics::EigenDecomposition eig = numerics::hermitian_eig(r);
  CHECK(eig.eigenvalues.minCoeff() > -1e-10 * eig.eigenvalues.maxCoeff());
}

TEST_CASE("local_scattering_correlation: deterministic for a fixed seed") {
  const ArrayGeometry geom{2, 2};
  const Direction dir(-kPi / 4, 0.0);
  Matrix a = local_scattering_correlation(geom, dir, 6, 0.35, 0.17, 0.087,
                                          10000, 33);
  Matrix b = local_scattering_correlation(geom, dir, 6, 0.35, 0.17, 0.087,
                                          10000, 33);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

  // golden regression: a few entries frozen in hexfloat
  std::ostringstream got;
  got << std::hexfloat;
  got << a(0, 1).real() << "\n" << a(0, 1).imag() << "\n";
  got << a(2, 3).real() << "\n" << a(2, 3).imag() << "\n";
  got << a.norm() << "\n";
  const std::string path = std::string(RISDET_GOLDEN_DIR) + "/scattering_2x2.txt";
  if (std::getenv("RISDET_REGEN_GOLDEN") != nullptr) {
    std::ofstream out(path);
    out << got.str();
  }
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "golden file missing: ", path);
  std::stringstream want;
  want << in.rdbuf();
  CHECK(got.str() == want.str());
}

TEST_CASE("cascaded_channel: degenerate and single-element cases") {
  std::mt19937_64 gen(7);
  Vector a_t = testsup::random_vector(5, gen);
  Vector b_t = testsup::random_vector(3, gen);
  RisPhases psi = RisPhases::zero(3);

  Vector out = cascaded_channel(a_t, b_t, psi, Vector::Zero(3));
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);

  RisPhases flip{Eigen::VectorXd::Constant(1, kPi)};
  out = cascaded_channel(a_t, Vector::Ones(1), flip, Vector::Ones(1));
  CHECK((out + a_t).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(cascaded_channel(a_t, b_t, psi, Vector::Zero(4)),
                  DimensionError);
}

TEST_CASE("cascaded_channel: matches the dense matrix product") {
  std::mt19937_64 gen(9);
  Vector a_t = testsup::random_vector(5, gen);
  Vector b_t = testsup::random_vector(4, gen);
  Vector h_r = testsup::random_vector(4, gen);
  RisPhases psi = RisPhases::random(4, gen);

  Matrix d = psi.unit_factors().asDiagonal();
  Vector want = a_t * (b_t.transpose() * d * h_r);
  Vector got = cascaded_channel(a_t, b_t, psi, h_r);
  CHECK((want - got).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cascaded_correlation: identity and dense oracle") {
  std::mt19937_64 gen(13);
  Vector a_t = testsup::random_vector(3, gen);
  const Eigen::Index n = 6;
  Vector b_t(n);
  for (Eigen::Index i = 0; i < n; ++i)
    b_t(i) = std::polar(1.0, 0.3 * static_cast<double>(i));
  RisPhases psi = RisPhases::random(n, gen);

  Matrix zero = cascaded_correlation(a_t, b_t, psi, Matrix::Zero(n, n));
  CHECK(zero.cwiseAbs().maxCoeff() < 1e-15);

  // unit-modulus b against identity correlation: scalar factor is N
  Matrix r = cascaded_correlation(a_t, b_t, psi, Matrix::Identity(n, n));
  Matrix want = static_cast<double>(n) * (a_t * a_t.adjoint());
  CHECK((r - want).cwiseAbs().maxCoeff() < 1e-12);

  // dense four-factor product
  Matrix r_r = testsup::random_psd(n, gen);
  Matrix d = psi.unit_factors().asDiagonal();
  Matrix full = a_t * b_t.transpose() * d * r_r * d.conjugate() *
                b_t.conjugate() * a_t.adjoint();
  Matrix got = cascaded_correlation(a_t, b_t, psi, r_r);
  CHECK((full - got).cwiseAbs().maxCoeff() /
            std::max(1.0, full.cwiseAbs().maxCoeff()) <
        1e-10);

  numerics::EigenDecomposition eig = numerics::hermitian_eig(got);
  CHECK(eig.eigenvalues(1) < 1e-10 * eig.eigenvalues(0));  // rank <= 1
}

TEST_CASE("cascaded_correlation: matches the empirical cascade covariance") {
  std::mt19937_64 gen(15);
  Vector a_t = testsup::random_vector(3, gen);
  Vector b_t = testsup::random_vector(4, gen);
  RisPhases psi = RisPhases::random(4, gen);
  Matrix r_r = testsup::random_psd(4, gen);

  Matrix want = cascaded_correlation(a_t, b_t, psi, r_r);
  numerics::GaussianSampler sampler(r_r);
  Matrix acc = Matrix::Zero(3, 3);
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    Vector h = cascaded_channel(a_t, b_t, psi, sampler.draw(gen));
    acc += h * h.adjoint();
  }
  acc /= static_cast<double>(n);
  CHECK((acc - want).norm() / want.norm() < 0.05);
}

TEST_CASE("build_scenario_channels: gain bookkeeping") {
  ScenarioGeometry geom = paper_geometry();
  geom.scattering_samples = 10000;
  ChannelGains gains;
  gains.ue_element = 1.0;
  gains.target_element = 3e-4;
  gains.ris_element_factor = 0.1;
  gains.nlos_fraction = 0.1;
  ScenarioBuilder builder(geom, 42);
  ChannelSet ch = builder.channels(gains);

  // per-element relative gain through one RIS hop pair is -10 dB: the
  // cascaded two-way SNR sits 20 dB below the static one
  const double static_gain = std::norm(ch.hbar_s2(0));
  const double hop_pair = std::norm(ch.b_t(0)) * std::norm(ch.hbar_r2(0));
  CHECK(hop_pair / static_gain == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(static_gain == doctest::Approx(gains.target_element).epsilon(1e-12));

  // NLOS trace budgets follow the Rician split
  CHECK(ch.r_s2.trace().real() ==
        doctest::Approx(36.0 * gains.target_element * 0.1).epsilon(1e-9));
  CHECK(ch.r_r2.trace().real() ==
        doctest::Approx(64.0 * gains.target_element * 0.01).epsilon(1e-9));

  // zero NLOS budget collapses both correlation matrices exactly
  ChannelGains los_only = gains;
  los_only.nlos_fraction = 0.0;
  ChannelSet los = builder.channels(los_only);
  CHECK(los.r_s2.cwiseAbs().maxCoeff() == 0.0);
  CHECK(los.r_r2.cwiseAbs().maxCoeff() == 0.0);

  // disabling the RIS zeroes b_t and nothing else
  ChannelSet no_ris = builder.channels(gains, /*ris_enabled=*/false);
  CHECK(no_ris.b_t.cwiseAbs().maxCoeff() == 0.0);
  CHECK((no_ris.h_s1 - ch.h_s1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_scenario_channels: deterministic per master seed") {
  ScenarioGeometry geom = paper_geometry();
  geom.scattering_samples = 10000;
  ChannelGains gains;
  gains.target_element = 1e-3;
  ChannelSet a = build_scenario_channels(geom, gains, 7);
  ChannelSet b = build_scenario_channels(geom, gains, 7);
  CHECK((a.h_s1 - b.h_s1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.h_r1 - b.h_r1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.r_s2 - b.r_s2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.r_clutter - b.r_clutter).cwiseAbs().maxCoeff() == 0.0);

  ChannelSet c = build_scenario_channels(geom, gains, 8);
  CHECK((a.h_s1 - c.h_s1).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("scenario correlation matrices are Hermitian PSD") {
  ScenarioGeometry geom = paper_geometry();
  geom.scattering_samples = 10000;
  ChannelGains gains;
  gains.target_element = 2.0;
  ChannelSet ch = build_scenario_channels(geom, gains, 3);
  for (const Matrix* m : {&ch.r_s2, &ch.r_r2, &ch.r_clutter}) {
    CHECK((*m - m->adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    numerics::EigenDecomposition eig = numerics::hermitian_eig(*m);
    CHECK(eig.eigenvalues.minCoeff() >= -1e-10 * eig.eigenvalues.maxCoeff());
  }
}
