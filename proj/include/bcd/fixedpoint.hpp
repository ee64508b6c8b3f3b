#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bcd/estimators.hpp"
#include "bcd/types.hpp"

namespace bcd::fx {

/// Two's-complement Q-format descriptor.
struct QFormat {
  int word_bits = 16;
  int frac_bits = 8;

  void validate() const;
  std::int64_t raw_max() const { return (std::int64_t{1} << (word_bits - 1)) - 1; }
  std::int64_t raw_min() const { return -(std::int64_t{1} << (word_bits - 1)); }
  double lsb() const;
  bool operator==(const QFormat&) const = default;
};

// Word lengths of the datapath signals. Antenna-domain samples are 16-bit
// with 8 fractional bits; beamspace samples are 10-bit mantissas (the FFT
// scaling sits in a shared block exponent); squared magnitudes, D0-hat and
// P-hat are 16/8; the SDNR estimate is 24/8. Log-domain intermediates and the
// threshold are carried at 24/16, sized so the threshold unit stays inside a
// 2% error budget.
inline constexpr QFormat kAntennaFmt{16, 8};
inline constexpr QFormat kBeamFmt{10, 8};
inline constexpr QFormat kPowerFmt{16, 8};
inline constexpr QFormat kSdnrFmt{24, 8};
inline constexpr QFormat kLogFmt{24, 16};
// The threshold word spans four times the squared-magnitude range; anything
// larger is a reject-everything decision and saturates benignly.
inline constexpr QFormat kEtaFmt{26, 16};
inline constexpr QFormat kFactorFmt{26, 16};  // 1 + q_m/(M*SDNR)
inline constexpr QFormat kConstFmt{18, 16};   // LUT constants (1/ln2, 1/kappa, ...)
inline constexpr QFormat kInvAlphaFmt{16, 13};
inline constexpr QFormat kOutFmt{16, 8};      // denoiser output samples

struct FxValue {
  std::int64_t raw = 0;
  QFormat fmt{};

  double to_double() const { return static_cast<double>(raw) * fmt.lsb(); }
};

/// Round-to-nearest-even of x / lsb, saturating at the format bounds.
FxValue fx_quantize(double x, QFormat fmt);

/// Saturation instrumentation (thread-local). Every arithmetic site saturates
/// instead of wrapping and bumps this counter when it does.
std::uint64_t saturation_count();
void reset_saturation_count();

FxValue fx_add(FxValue a, FxValue b);              // same format
FxValue fx_sub(FxValue a, FxValue b);              // same format
FxValue fx_mul(FxValue a, FxValue b, QFormat out); // RNE to out
/// Truncating (round-toward-zero) divide, sequential-divider semantics.
/// Division by zero saturates toward the sign of the numerator.
FxValue fx_div(FxValue a, FxValue b, QFormat out);
/// Exact rescale to a new format when representable; RNE when frac shrinks.
FxValue fx_convert(FxValue a, QFormat out);

struct SortedPrefix {
  std::vector<FxValue> sorted;   // ascending
  std::vector<FxValue> prefix;   // exact running sums in the widened format
  QFormat accum_fmt{};           // word_bits + ceil(log2 M)
};

/// Sort + exact prefix sums (the insertion-sorter / prefix-sum memory of the
/// hardware noise estimator).
SortedPrefix fx_sorted_prefix(const std::vector<FxValue>& p);

struct FxNoiseEstimate {
  FxValue final;
  std::vector<FxValue> trajectory;
  std::vector<std::size_t> retained;
};

/// Fixed-point realization of the blind noise estimator: median from the two
/// middle sorted samples, 1/ln2 LUT constant, power-of-two thresholds by
/// shift, index walk over the sorted array, prefix-sum mean with a truncating
/// divider, 1/kappa LUT correction. Requires c and c' to be powers of two.
FxNoiseEstimate fx_noise_estimator(const std::vector<FxValue>& p,
                                   const DenoiserParams& params);

/// Piecewise-linear ln over the mantissa range [1, 2), exponent handled by
/// leading-bit detection. Segment anchors are exact quantized ln values and
/// slopes are derived from anchor differences, which makes the approximation
/// monotone by construction.
struct PwlLogTable {
  int segments = 8;
  QFormat coeff_fmt = kConstFmt;  // breakpoints, slopes
  QFormat out_fmt = kLogFmt;      // anchors, ln2, outputs
  std::vector<FxValue> breakpoints;  // 1 + j/segments
  std::vector<FxValue> slopes;
  std::vector<FxValue> intercepts;   // anchor values ln(breakpoint)
  FxValue ln2;
};

PwlLogTable make_pwl_log_table(int segments = 8);

/// ln(x) for x > 0; throws std::domain_error otherwise.
FxValue pwl_ln(FxValue x, const PwlLogTable& table);

/// Offline LUT contents of the threshold unit for a given M and cost ratio.
struct ThresholdTables {
  std::size_t m = 0;
  PwlLogTable pwl;
  std::vector<FxValue> ln_int;  // ln(1..M) at kLogFmt
  FxValue ln_cost;              // ln C
};

ThresholdTables make_threshold_tables(std::size_t m, double cost_ratio);

struct FxThresholdResult {
  std::size_t q_m = 0;
  FxValue eta;
  bool zero_all = false;   // sdnr == 0: classify everything as noise
  bool keep_all = false;   // q_m == M: classify everything as signal
  bool degenerate = false; // activity denominator was nonpositive
};

/// Integer active-beam count by fixed-point divide + round, then the
/// split-log threshold. M must be a power of two (multiplies by 2 and M are
/// shifts).
FxThresholdResult fx_activity_and_threshold(const std::vector<FxValue>& p,
                                            FxValue d0, FxValue p_hat,
                                            FxValue sdnr,
                                            const ThresholdTables& tables);

/// Threshold unit in isolation (used by the float cross-checks): the eta
/// computation for a given integer q_m.
FxValue fx_threshold_from(std::size_t q_m, FxValue d0, FxValue sdnr,
                          const ThresholdTables& tables);

struct FxDenoiseResult {
  std::vector<FxValue> re;  // kOutFmt
  std::vector<FxValue> im;
  std::vector<std::uint8_t> keep;
  std::size_t kept = 0;
};

/// Hard thresholding against eta (ties pass) and 1/alpha LUT scaling.
FxDenoiseResult fx_denoise(std::span<const FxValue> re, std::span<const FxValue> im,
                           std::span<const FxValue> p, const FxThresholdResult& thr,
                           FxValue inv_alpha);

/// End-to-end golden pipeline. The transform is evaluated in double precision
/// (the datapath model covers the arithmetic units, not the FFT butterflies);
/// formats are enforced at the declared boundaries. Both the beamspace buffer
/// and the squared-magnitude buffer carry power-of-two block exponents, the
/// standard fixed-point-FFT mechanism that lets 10-bit mantissas hold the
/// transform peaks while the 16/8 squared magnitudes still resolve the noise
/// floor. Decisions are scale-invariant, so block scaling does not change the
/// denoiser mask.
struct FxPipelineResult {
  ChannelVector denoised;
  EstimationReport report;      // values rescaled back to the input domain
  std::size_t q_m = 0;
  int beam_exp = 0;             // beamspace block exponent g
  int power_exp = 0;            // squared-magnitude block exponent
  FxValue d0_fx, p_hat_fx, sdnr_fx, eta_fx;
  std::vector<FxValue> beam_re, beam_im;  // 10/8 mantissas (stimulus)
  std::vector<FxValue> p;                 // 16/8 squared magnitudes
  std::vector<FxValue> out_re, out_im;    // 16/8 denoised mantissas (response)
  std::uint64_t saturations = 0;          // events during this pass
};

/// known_d0 (input-domain units) engages the reduced datapath that bypasses
/// the noise/power/SDNR estimator units.
FxPipelineResult fx_denoise_pipeline(const ChannelVector& h_obs, double alpha,
                                     const DenoiserParams& params,
                                     std::optional<double> known_d0 = std::nullopt);

/// Stimulus/response dump: one lowercase-hex raw word per line (two's
/// complement masked to the format width), for replay against an external
/// testbench.
void dump_hex(std::ostream& os, std::span<const FxValue> values);

}  // namespace bcd::fx
