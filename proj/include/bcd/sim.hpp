#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bcd/equalizer.hpp"
#include "bcd/estimators.hpp"
#include "bcd/quantizer.hpp"
#include "bcd/types.hpp"

namespace bcd {

enum class Estimator {
  proposed_blind,
  proposed_known_d0,
  ls,
  diag_lmmse,
  perfect_csi,
};

const char* estimator_name(Estimator est);
std::optional<Estimator> parse_estimator(std::string_view name);

enum class ChannelModel { geometric, bernoulli_gaussian };

struct SimConfig {
  std::size_t m = 64;
  std::size_t k = 8;
  std::vector<int> bits = {2, 3, 4};  // 0 = infinite resolution
  double snr_start = 0.0;
  double snr_stop = 20.0;
  double snr_step = 5.0;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  std::vector<Estimator> estimators = {Estimator::proposed_blind,
                                       Estimator::proposed_known_d0, Estimator::ls,
                                       Estimator::diag_lmmse};
  ChannelModel channel = ChannelModel::geometric;
  std::size_t paths = 3;       // geometric model multipath count
  double bg_activity = 0.125;  // bernoulli-gaussian q
  double bg_power = 1.0;       // bernoulli-gaussian P
  bool known_noise = false;    // force the known-D0 (reduced) denoiser path
  bool fixed_point = false;    // route the proposed estimator through the
                               // fixed-point golden datapath
  DenoiserParams params;
  std::size_t data_blocks = 8;  // 16-QAM symbol vectors per BER trial

  std::vector<double> snr_grid() const;
  void validate() const;
};

struct ResultRow {
  std::string estimator;
  int bits = 0;  // 0 = infinite
  double snr_db = 0.0;
  double mse_linear;
  double mse_db;
  double ber;
  std::size_t trials = 0;
  double seconds_per_vector;

  ResultRow();
};

/// The LS baseline uses the noisy observation directly.
ChannelVector ls_estimate(const ChannelVector& h_obs);

/// Per-entry Wiener scaling alpha*P/(alpha^2*P + D0); no support selection.
BeamspaceVector diag_lmmse_estimate(const BeamspaceVector& hbar_obs, double alpha,
                                    double p_hat, double d0);

/// AGC + ADC front end: quantizes against the codebook scaled to the signal's
/// per-dimension RMS. Infinite-resolution models (and all-zero inputs) pass
/// through.
ChannelVector observe(const ChannelVector& analog, const QuantizerModel& qm);

std::vector<ResultRow> run_mse_experiment(const SimConfig& cfg);
std::vector<ResultRow> run_ber_experiment(const SimConfig& cfg);

/// Wall-time per denoise at each M, post-transform stage and full pipeline,
/// blind and known-D0 modes. Median of timed batches.
std::vector<ResultRow> run_scaling_benchmark(const std::vector<std::size_t>& ms,
                                             std::size_t reps,
                                             const DenoiserParams& params,
                                             std::uint64_t seed);

std::string csv_header();
void write_csv(std::ostream& os, std::span<const ResultRow> rows);

}  // namespace bcd
