#pragma once

#include <cstddef>
#include <cstdint>

#include "bcd/types.hpp"

namespace bcd::kernels {

enum class Isa { scalar, avx2 };

/// ISA selected at startup: AVX2 when the CPU supports it, else scalar.
/// The BCD_SIMD environment variable ("scalar" or "avx2") overrides.
Isa active_isa();
bool isa_supported(Isa isa);
/// Test hook. Throws std::runtime_error if the ISA is not supported here.
void force_isa(Isa isa);
const char* isa_name(Isa isa);

/// out[i] = |x[i]|^2. Vector variants are bit-identical to scalar: each lane
/// computes re*re + im*im with the same rounding (no FMA contraction).
void magnitudes_squared(const cplx* x, double* out, std::size_t n);

/// Hard-thresholding core: out[i] = p[i] >= eta ? x[i] * inv_alpha : 0,
/// keep[i] = 1/0 accordingly. Returns the number of retained entries.
std::size_t hard_threshold_scale(const cplx* x, const double* p, double eta,
                                 double inv_alpha, cplx* out, std::uint8_t* keep,
                                 std::size_t n);

namespace detail {
void magnitudes_squared_scalar(const cplx* x, double* out, std::size_t n);
std::size_t hard_threshold_scale_scalar(const cplx* x, const double* p, double eta,
                                        double inv_alpha, cplx* out,
                                        std::uint8_t* keep, std::size_t n);
#if defined(__x86_64__) || defined(_M_X64)
void magnitudes_squared_avx2(const cplx* x, double* out, std::size_t n);
std::size_t hard_threshold_scale_avx2(const cplx* x, const double* p, double eta,
                                      double inv_alpha, cplx* out,
                                      std::uint8_t* keep, std::size_t n);
#endif
}  // namespace detail

}  // namespace bcd::kernels
