#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bcd {

/// Tuning knobs of the blind denoiser.
struct DenoiserParams {
  double cost_ratio = 4.0;  // C
  double conf = 2.0;        // c
  double conf_wide = 4.0;   // c'
  std::size_t rho_min = 0;  // 0 -> max(8, M/8), clamped to M
  std::size_t iters = 3;    // T
  /// The published estimator divides by kappa(c) even when the retained set
  /// was rebuilt with c'. Default corrects with kappa(c') in that case; set
  /// this flag to reproduce the published behavior exactly.
  bool strict_paper_kappa = false;

  void validate() const;
  std::size_t effective_rho_min(std::size_t m) const;
};

/// Output of the iterative composite-noise estimator.
struct NoiseEstimate {
  std::vector<double> trajectory;     // T+1 values, [0] = MAD init
  std::vector<std::size_t> retained;  // |S| per iteration
  std::vector<std::uint8_t> widened;  // 1 where the c' rebuild was taken

  double final_estimate() const { return trajectory.back(); }
};

struct ActivityEstimate {
  double q_hat = 1.0;
  std::size_t q_m = 0;
  bool degenerate = false;  // nonpositive denominator; clamped to q_m = M
};

/// Truncated-mean bias of Exp samples kept below k*lambda:
/// kappa(k) = (1 - e^{-k}(1+k)) / (1 - e^{-k}).
double kappa(double k);

/// Robust initial noise estimate median(p)/ln 2. Even-length inputs use the
/// mean of the two middle order statistics.
double mad_init(std::span<const double> p);

/// Iterative truncated-mean noise power estimator (MAD init, T refinement
/// passes with confidence threshold c, widened to c' when fewer than rho_min
/// samples survive, 1/kappa bias correction).
NoiseEstimate estimate_noise_power(std::span<const double> p,
                                   const DenoiserParams& params);

/// max{mean(p) - d0, 0}
double estimate_channel_power(std::span<const double> p, double d0);

/// max{mean(p)/d0 - 1, 0}; d0 == 0 returns +inf for nonzero p (noise-free
/// sentinel) and 0 for all-zero p.
double estimate_sdnr(std::span<const double> p, double d0);

/// Method-of-moments activity rate on the 1/M grid,
/// q_m = round(2 M^2 P^2 / (sum p^2 - 2 M d0^2 - 4 M d0 P)) clamped to [1, M].
ActivityEstimate estimate_activity(std::span<const double> p, double d0,
                                   double sdnr);

/// Everything a denoising pass learned about one observation.
struct EstimationReport {
  NoiseEstimate noise;
  double d0 = 0.0;  // final estimate (or the supplied known value)
  double channel_power = 0.0;
  double sdnr = 0.0;
  ActivityEstimate activity;
  double eta = 0.0;
  std::vector<std::uint8_t> decisions;  // 1 = H1 per beamspace entry
  bool blind = true;
};

std::string report_csv_header(std::size_t trajectory_len);
std::string report_csv_row(std::size_t trial, double snr_db, int bits,
                           const EstimationReport& report);

}  // namespace bcd
