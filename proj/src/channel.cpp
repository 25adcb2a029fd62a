#include "risdet/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "risdet/errors.hpp"
#include "risdet/rng.hpp"

namespace risdet::channel {

namespace {

constexpr double kPi = std::numbers::pi;

void require_geometry(const ArrayGeometry& geom) {
  if (geom.horizontal < 1 || geom.vertical < 1 || geom.spacing <= 0.0)
    throw Error("ArrayGeometry: counts must be positive and spacing > 0");
}

/// Steering evaluation without Direction range validation; scattering draws
/// may legitimately fall outside the principal angle ranges.
Vector steering_at(const ArrayGeometry& geom, double az, double el) {
  const double f = 2.0 * kPi * geom.spacing;
  const double u = std::sin(az) * std::cos(el);
  const double v = std::sin(el);
  Vector a(geom.elements());
  Eigen::Index m = 0;
  for (int q = 0; q < geom.vertical; ++q)
    for (int p = 0; p < geom.horizontal; ++p, ++m)
      a(m) = std::polar(1.0, f * (p * u + q * v));
  return a;
}

}  // namespace

Direction::Direction(double az, double el) : azimuth(az), elevation(el) {
  if (!(az > -kPi && az <= kPi))
    throw Error("Direction: azimuth " + std::to_string(az) +
                " outside (-pi, pi]");
  if (!(el >= -kPi / 2 && el <= kPi / 2))
    throw Error("Direction: elevation " + std::to_string(el) +
                " outside [-pi/2, pi/2]");
}

RisPhases RisPhases::zero(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n)};
}

RisPhases RisPhases::random(Eigen::Index n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
  Eigen::VectorXd psi(n);
  for (Eigen::Index i = 0; i < n; ++i) psi(i) = uni(gen);
  return {std::move(psi)};
}

Vector RisPhases::unit_factors() const {
  Vector d(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) d(i) = std::polar(1.0, psi(i));
  return d;
}

Vector upa_steering(const ArrayGeometry& geom, const Direction& dir) {
  require_geometry(geom);
  return steering_at(geom, dir.azimuth, dir.elevation);
}

Matrix local_scattering_correlation(const ArrayGeometry& geom,
                                    const Direction& nominal, int clusters,
                                    double az_spread, double el_spread,
                                    double asd, int mc_samples,
                                    std::uint64_t seed) {
  require_geometry(geom);
  if (clusters < 1 || asd <= 0.0 || mc_samples < 10'000)
    throw Error("local_scattering_correlation: need clusters >= 1, asd > 0, "
                "mc_samples >= 1e4");

  std::mt19937_64 gen(rng::splitmix64(seed));
  std::uniform_real_distribution<double> uni(-0.5, 0.5);

  // Cluster centers are fixed once per seed.
  std::vector<std::pair<double, double>> centers(clusters);
  for (auto& c : centers)
    c = {nominal.azimuth + az_spread * uni(gen),
         nominal.elevation + el_spread * uni(gen)};

  const Eigen::Index n = geom.elements();
  Matrix acc = Matrix::Zero(n, n);
  const int base = mc_samples / clusters;
  const int rem = mc_samples % clusters;
  for (int c = 0; c < clusters; ++c) {
    const int count = base + (c < rem ? 1 : 0);
    for (int s = 0; s < count; ++s) {
      const double az = centers[c].first + asd * rng::standard_gaussian(gen);
      const double el = centers[c].second + asd * rng::standard_gaussian(gen);
      const Vector a = steering_at(geom, az, el);
      acc.selfadjointView<Eigen::Lower>().rankUpdate(a, 1.0);
    }
  }
  Matrix r = acc.selfadjointView<Eigen::Lower>();
  r /= static_cast<double>(mc_samples);
  r = 0.5 * (r + r.adjoint()).eval();
  r *= static_cast<double>(n) / r.trace().real();
  return r;
}

Vector cascaded_channel(const Vector& a_t, const Vector& b_t,
                        const RisPhases& phases, const Vector& h_r) {
  if (b_t.size() != phases.size() || b_t.size() != h_r.size())
    throw DimensionError("cascaded_channel: b_t, phases, h_r sizes disagree");
  const Complex scale =
      (b_t.array() * phases.unit_factors().array() * h_r.array()).sum();
  return a_t * scale;
}

Matrix cascaded_correlation(const Vector& a_t, const Vector& b_t,
                            const RisPhases& phases, const Matrix& r_r) {
  if (b_t.size() != phases.size() || r_r.rows() != b_t.size() ||
      r_r.cols() != b_t.size())
    throw DimensionError("cascaded_correlation: b_t, phases, R_r sizes disagree");
  // b^T D R D^* b^* = w^H R w with w = (D b)^*, real and nonnegative for PSD R
  const Vector w = (b_t.array() * phases.unit_factors().array()).conjugate();
  const double scale = std::real(w.dot(r_r * w));
  return scale * (a_t * a_t.adjoint());
}

ScenarioBuilder::ScenarioBuilder(const ScenarioGeometry& geom,
                                 std::uint64_t master_seed)
    : geom_(geom) {
  steer_ue_bs_ = upa_steering(geom.transceiver, geom.ue_from_bs);
  steer_target_bs_ = upa_steering(geom.transceiver, geom.target_from_bs);
  steer_ris_bs_ = upa_steering(geom.transceiver, geom.ris_from_bs);
  steer_ue_ris_ = upa_steering(geom.ris, geom.ue_from_ris);
  steer_target_ris_ = upa_steering(geom.ris, geom.target_from_ris);
  steer_bs_ris_ = upa_steering(geom.ris, geom.bs_from_ris);

  const auto scatter_seed = [&](std::uint64_t idx) {
    std::uint64_t h = rng::splitmix64(master_seed ^ rng::tag(rng::Purpose::kScattering));
    return rng::splitmix64(h ^ idx);
  };
  corr_ue_bs_ = local_scattering_correlation(
      geom.transceiver, geom.ue_from_bs, geom.clusters, geom.channel_az_spread,
      geom.channel_el_spread, geom.channel_asd, geom.scattering_samples,
      scatter_seed(0));
  corr_target_bs_ = local_scattering_correlation(
      geom.transceiver, geom.target_from_bs, geom.clusters,
      geom.channel_az_spread, geom.channel_el_spread, geom.channel_asd,
      geom.scattering_samples, scatter_seed(1));
  corr_ue_ris_ = local_scattering_correlation(
      geom.ris, geom.ue_from_ris, geom.clusters, geom.channel_az_spread,
      geom.channel_el_spread, geom.channel_asd, geom.scattering_samples,
      scatter_seed(2));
  corr_target_ris_ = local_scattering_correlation(
      geom.ris, geom.target_from_ris, geom.clusters, geom.channel_az_spread,
      geom.channel_el_spread, geom.channel_asd, geom.scattering_samples,
      scatter_seed(3));
  corr_clutter_ = local_scattering_correlation(
      geom.transceiver, geom.ris_from_bs, geom.clusters,
      geom.clutter_az_spread, geom.clutter_el_spread, geom.clutter_asd,
      geom.scattering_samples, scatter_seed(4));

  // The UE channels are treated as known: one NLOS realization, fixed for
  // the lifetime of the scenario.
  std::mt19937_64 gen =
      rng::derive_stream(master_seed, {rng::tag(rng::Purpose::kUserNlos)});
  ue_nlos_bs_ = numerics::GaussianSampler(corr_ue_bs_).draw(gen);
  ue_nlos_ris_ = numerics::GaussianSampler(corr_ue_ris_).draw(gen);
}

ChannelSet ScenarioBuilder::channels(const ChannelGains& gains,
                                     bool ris_enabled) const {
  if (gains.ue_element < 0.0 || gains.target_element < 0.0 ||
      gains.ris_element_factor < 0.0 || gains.nlos_fraction < 0.0)
    throw Error("ChannelGains: gains must be nonnegative");

  const double g_ue = gains.ue_element;
  const double g_t = gains.target_element;
  const double rf = gains.ris_element_factor;
  const double f = gains.nlos_fraction;

  ChannelSet ch;
  ch.a_t = steer_ris_bs_;
  ch.b_t = ris_enabled ? steer_bs_ris_ : Vector::Zero(steer_bs_ris_.size());
  ch.h_s1 = std::sqrt(g_ue) * steer_ue_bs_ + std::sqrt(g_ue * f) * ue_nlos_bs_;
  ch.h_r1 = std::sqrt(g_ue * rf) * steer_ue_ris_ +
            std::sqrt(g_ue * rf * f) * ue_nlos_ris_;
  ch.hbar_s2 = std::sqrt(g_t) * steer_target_bs_;
  ch.hbar_r2 = std::sqrt(g_t * rf) * steer_target_ris_;
  ch.r_s2 = (g_t * f) * corr_target_bs_;
  ch.r_r2 = (g_t * rf * f) * corr_target_ris_;
  ch.r_clutter = corr_clutter_;
  return ch;
}

ChannelSet build_scenario_channels(const ScenarioGeometry& geom,
                                   const ChannelGains& gains,
                                   std::uint64_t master_seed,
                                   bool ris_enabled) {
  return ScenarioBuilder(geom, master_seed).channels(gains, ris_enabled);
}

}  // namespace risdet::channel
