#pragma once

// Shared generators for the unit and acceptance suites.

#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "risdet/channel.hpp"
#include "risdet/numerics.hpp"
#include "risdet/rng.hpp"

namespace testsup {

/// The reference scenario geometry used across the suites (angles and
/// scattering spreads of the simulated deployment).
inline risdet::channel::ScenarioGeometry paper_geometry(
    int scattering_samples = 20000) {
  using risdet::channel::Direction;
  constexpr double kPi = std::numbers::pi;
  constexpr double kDeg = kPi / 180.0;
  risdet::channel::ScenarioGeometry g;
  g.transceiver = {6, 6};
  g.ris = {8, 8};
  g.ue_from_bs = Direction(kPi / 3, -kPi / 5);
  g.target_from_bs = Direction(kPi / 6, -kPi / 5);
  g.ris_from_bs = Direction(-kPi / 4, 0.0);
  g.ue_from_ris = Direction(0.0, -kPi / 5);
  g.target_from_ris = Direction(-kPi / 4, -kPi / 5);
  g.bs_from_ris = Direction(kPi / 4, 0.0);
  g.channel_az_spread = 40.0 * kDeg;
  g.channel_el_spread = 20.0 * kDeg;
  g.channel_asd = 10.0 * kDeg;
  g.clutter_az_spread = 20.0 * kDeg;
  g.clutter_el_spread = 10.0 * kDeg;
  g.clutter_asd = 5.0 * kDeg;
  g.scattering_samples = scattering_samples;
  return g;
}

inline risdet::Vector random_vector(Eigen::Index n, std::mt19937_64& gen) {
  risdet::Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = risdet::rng::standard_complex_gaussian(gen);
  return v;
}

inline risdet::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols,
                                    std::mt19937_64& gen) {
  risdet::Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) m.col(j) = random_vector(rows, gen);
  return m;
}

inline risdet::Matrix random_hermitian(Eigen::Index n, std::mt19937_64& gen) {
  risdet::Matrix m = random_matrix(n, n, gen);
  return 0.5 * (m + m.adjoint());
}

inline risdet::Matrix random_psd(Eigen::Index n, std::mt19937_64& gen,
                                 Eigen::Index rank = -1) {
  if (rank < 0) rank = n;
  risdet::Matrix a = random_matrix(n, rank, gen);
  risdet::Matrix m = a * a.adjoint() / static_cast<double>(n);
  return 0.5 * (m + m.adjoint());
}

}  // namespace testsup
