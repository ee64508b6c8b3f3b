#pragma once

#include <cstddef>
#include <vector>

#include "bcd/types.hpp"

namespace bcd {

/// Scalar per-component ADC model. Real and imaginary parts are quantized
/// independently against a codebook designed for a unit-variance Gaussian;
/// input_scale carries the AGC normalization. bits == 0 encodes an infinite-
/// resolution (pass-through) converter.
struct QuantizerModel {
  int bits = 0;
  std::vector<double> levels;      // 2^bits, strictly increasing, odd-symmetric
  std::vector<double> thresholds;  // 2^bits - 1 midpoints
  double input_scale = 1.0;

  bool infinite() const { return bits == 0; }

  QuantizerModel with_input_scale(double s) const;
};

/// MSE-optimal codebook for a zero-mean unit-variance Gaussian source,
/// 1 <= bits <= 8. Solves the centroid/nearest-neighbor stationarity
/// conditions to 1e-10; throws on non-convergence.
QuantizerModel build_lloyd_max(int bits);

QuantizerModel infinite_quantizer();

/// Nearest-level map per real dimension after normalization by input_scale.
ChannelVector quantize(const ChannelVector& v, const QuantizerModel& qm);

/// Scalar nearest-level map in the normalized (unit-variance) domain.
double quantize_normalized(double x, const QuantizerModel& qm);

/// Bussgang gain alpha = 1 - rho, where rho is the codebook's MMSE distortion
/// for a unit-variance Gaussian input.
double alpha_for(const QuantizerModel& qm);

/// D0 = alpha*E0 + alpha*(1-alpha)*P_h.
double composite_noise_variance(double alpha, double e0, double p_h);

/// Pooled per-real-dimension standard deviation of v (ideal AGC estimate).
double ideal_agc_sigma(const ChannelVector& v);

}  // namespace bcd
