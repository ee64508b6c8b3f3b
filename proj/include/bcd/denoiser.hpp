#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "bcd/estimators.hpp"
#include "bcd/types.hpp"

namespace bcd {

struct DenoiseResult {
  BeamspaceVector denoised;
  std::vector<std::uint8_t> decisions;  // 1 = H1
  double eta = 0.0;
};

/// Bayesian hypothesis-testing threshold
///   eta = d0 (1 + q/sdnr) ln((1 + sdnr/q) ((1-q)/q) C).
/// Sentinels: sdnr == 0 -> +inf (everything noise), q == 1 -> -inf
/// (everything signal), sdnr == +inf (noise-free estimate) -> -inf.
double compute_threshold(double d0, double sdnr, double q, double cost_ratio);

/// Split-log form used by the hardware datapath, algebraically identical with
/// q = q_m/M:
///   eta = d0 (1 + q_m/(M sdnr)) [ln(1 + M sdnr/q_m) + ln(M-q_m) - ln q_m + ln C].
double compute_threshold_hw_form(double d0, double sdnr, std::size_t q_m,
                                 std::size_t m, double cost_ratio);

/// Hard thresholding: entries with |h'_m|^2 >= eta are kept and scaled by
/// 1/alpha, the rest are zeroed. Ties pass.
DenoiseResult denoise(const BeamspaceVector& hbar, double eta, double alpha);

/// Full blind pipeline: transform, estimate (or accept) D0, derive the
/// auxiliary statistics and threshold, hard-threshold, transform back.
/// Supplying known_d0 skips the iterative noise estimator.
std::pair<ChannelVector, EstimationReport> denoise_pipeline(
    const ChannelVector& h_obs, const DenoiserParams& params, double alpha,
    std::optional<double> known_d0 = std::nullopt);

/// The post-transform part of denoise_pipeline, operating on a beamspace
/// observation in place of antenna-domain input. Split out so the scaling
/// benchmark can time the O(TM) stage separately from the transforms.
DenoiseResult denoise_beamspace(const BeamspaceVector& hbar,
                                const DenoiserParams& params, double alpha,
                                std::optional<double> known_d0,
                                EstimationReport* report = nullptr);

}  // namespace bcd
