#pragma once

#include <cstdint>
#include <random>

#include "risdet/numerics.hpp"

namespace risdet::channel {

/// Uniform planar array, elements indexed row-major with the horizontal
/// index running fastest: element m = q * horizontal + p sits at grid
/// position (p, q).
struct ArrayGeometry {
  int horizontal = 1;
  int vertical = 1;
  double spacing = 0.5;  // wavelengths

  int elements() const { return horizontal * vertical; }
};

/// Azimuth in (-pi, pi], elevation in [-pi/2, pi/2].
struct Direction {
  double azimuth = 0.0;
  double elevation = 0.0;

  Direction() = default;
  Direction(double az, double el);
};

/// RIS reflection phases, each in [0, 2pi); the induced reflection matrix
/// is diag(exp(j psi_1), ..., exp(j psi_N)).
struct RisPhases {
  Eigen::VectorXd psi;

  static RisPhases zero(Eigen::Index n);
  static RisPhases random(Eigen::Index n, std::mt19937_64& gen);
  Eigen::Index size() const { return psi.size(); }
  /// Elementwise exp(j psi).
  Vector unit_factors() const;
};

/// All deterministic channel quantities of one scenario.
struct ChannelSet {
  Vector h_s1;      // static transceiver -> UE (LOS + fixed NLOS draw)
  Vector h_r1;      // RIS -> UE (LOS + fixed NLOS draw)
  Vector a_t;       // transceiver-side LOS response toward the RIS
  Vector b_t;       // RIS-side LOS response toward the transceiver
  Vector hbar_s2;   // LOS transceiver -> target
  Vector hbar_r2;   // LOS RIS -> target
  Matrix r_s2;      // NLOS transceiver <-> target correlation
  Matrix r_r2;      // NLOS RIS <-> target correlation
  Matrix r_clutter; // clutter correlation (unit average element power)
};

/// Steering vector with entries exp(j pi s (p sin(az) cos(el) + q sin(el)))
/// for spacing s in wavelengths doubled into the phase (half-wavelength
/// spacing gives the familiar pi factor).
Vector upa_steering(const ArrayGeometry& geom, const Direction& dir);

/// Spatial correlation from a local scattering model: cluster centers drawn
/// uniformly within +-az_spread/2 x +-el_spread/2 of the nominal direction
/// (once per seed), per-cluster ray angles Gaussian with standard deviation
/// asd, equal cluster powers. Monte Carlo average of a a^H, symmetrized and
/// trace-normalized to the element count.
Matrix local_scattering_correlation(const ArrayGeometry& geom,
                                    const Direction& nominal, int clusters,
                                    double az_spread, double el_spread,
                                    double asd, int mc_samples,
                                    std::uint64_t seed);

/// a_t (b_t^T D_psi h_r): the rank-one cascade through the surface.
Vector cascaded_channel(const Vector& a_t, const Vector& b_t,
                        const RisPhases& phases, const Vector& h_r);

/// (b_t^T D_psi R_r D_psi^* b_t^*) a_t a_t^H: correlation of the cascaded
/// NLOS channel; rank <= 1, Hermitian PSD.
Matrix cascaded_correlation(const Vector& a_t, const Vector& b_t,
                            const RisPhases& phases, const Matrix& r_r);

/// Nominal directions, array shapes, and scattering parameters of a scenario.
struct ScenarioGeometry {
  ArrayGeometry transceiver{6, 6};
  ArrayGeometry ris{8, 8};

  Direction ue_from_bs;
  Direction target_from_bs;
  Direction ris_from_bs;
  Direction ue_from_ris;
  Direction target_from_ris;
  Direction bs_from_ris;

  int clusters = 6;
  double channel_az_spread = 0.0;  // radians, full width
  double channel_el_spread = 0.0;
  double channel_asd = 0.0;
  double clutter_az_spread = 0.0;
  double clutter_el_spread = 0.0;
  double clutter_asd = 0.0;
  int scattering_samples = 100000;
};

/// Scale factors applied to the unit-gain scenario template. All are linear
/// power gains per element.
struct ChannelGains {
  double ue_element = 1.0;          // static transceiver->UE LOS, per element
  double target_element = 0.0;      // static transceiver->target LOS, per element
  double ris_element_factor = 0.1;  // relative gain of one RIS hop (-10 dB)
  double nlos_fraction = 0.1;       // NLOS trace budget / LOS gain (1/kappa)
};

/// Builds the expensive per-scenario quantities (steering vectors,
/// scattering correlations, the fixed UE NLOS realizations) once; channels()
/// then applies a gain set, which is cheap enough to call per sweep point.
/// The result is immutable and safe to share across Monte Carlo workers.
class ScenarioBuilder {
 public:
  ScenarioBuilder(const ScenarioGeometry& geom, std::uint64_t master_seed);

  ChannelSet channels(const ChannelGains& gains, bool ris_enabled = true) const;
  const ScenarioGeometry& geometry() const { return geom_; }

 private:
  ScenarioGeometry geom_;
  Vector steer_ue_bs_, steer_target_bs_, steer_ris_bs_;
  Vector steer_ue_ris_, steer_target_ris_, steer_bs_ris_;
  Matrix corr_ue_bs_, corr_target_bs_, corr_ue_ris_, corr_target_ris_;
  Matrix corr_clutter_;
  Vector ue_nlos_bs_, ue_nlos_ris_;  // unit-budget draws, scaled in channels()
};

/// One-shot convenience over ScenarioBuilder.
ChannelSet build_scenario_channels(const ScenarioGeometry& geom,
                                   const ChannelGains& gains,
                                   std::uint64_t master_seed,
                                   bool ris_enabled = true);

}  // namespace risdet::channel
