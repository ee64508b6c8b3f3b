#pragma once

#include <cstddef>
#include <vector>

#include "bcd/types.hpp"

namespace bcd {

/// Geometric multipath description: h = sum_l g_l a(phi_l).
struct SteeringConfig {
  std::size_t m = 0;
  std::vector<double> spatial_freqs;  // phi_l in [-1/2, 1/2)
  std::vector<cplx> gains;            // g_l

  void validate() const;
  std::size_t paths() const { return spatial_freqs.size(); }
};

/// Bernoulli-complex-Gaussian beamspace prior: entry is zero with probability
/// 1-q, else CN(0, avg_power/q).
struct BernoulliGaussianConfig {
  std::size_t m = 0;
  double activity = 0.0;    // q in (0, 1]
  double avg_power = 1.0;   // P_hbar, linear

  void validate() const;
};

/// a(phi)_m = e^{-j 2 pi m phi}, m = 0..M-1. Unit-modulus entries, norm sqrt(M).
ChannelVector steering_vector(double phi, std::size_t m);

ChannelVector generate_geometric_channel(const SteeringConfig& cfg);

BeamspaceVector generate_bg_beamspace_channel(const BernoulliGaussianConfig& cfg,
                                              Rng& rng);

/// Adds i.i.d. CN(0, n0) to every entry.
ChannelVector add_awgn(const ChannelVector& h, double n0, Rng& rng);

/// Random multipath draw: `paths` components, spatial frequencies uniform over
/// [-1/2, 1/2), complex Gaussian gains with per-path power decaying by 0.5 and
/// normalized so E[||h||^2 / M] = 1. The first (quasi-LoS) path dominates in
/// expectation.
SteeringConfig random_geometric_config(std::size_t m, std::size_t paths, Rng& rng);

}  // namespace bcd
