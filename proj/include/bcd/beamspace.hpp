#pragma once

#include <cstddef>
#include <vector>

#include "bcd/types.hpp"

namespace bcd {

/// Unitary DFT, forward kernel e^{-j2.pi.mk/M}, 1/sqrt(M) inside the forward
/// transform so that the norm is preserved. Radix-2 FFT for power-of-two M,
/// direct DFT otherwise.
BeamspaceVector to_beamspace(const ChannelVector& h);

/// Exact inverse of to_beamspace.
ChannelVector from_beamspace(const BeamspaceVector& hbar);

/// |hbar_m|^2 per entry.
std::vector<double> magnitudes_squared(const BeamspaceVector& hbar);

namespace detail {
/// Unnormalized direct DFT, sign = -1 forward / +1 inverse. Oracle for the
/// FFT path and fallback for general M.
std::vector<cplx> dft_direct(const std::vector<cplx>& in, int sign);
/// In-place unnormalized radix-2 FFT; n must be a power of two.
void fft_radix2(cplx* data, std::size_t n, int sign);
}  // namespace detail

}  // namespace bcd
