#include "bcd/beamspace.hpp"

#include <bit>
#include <cmath>
#include <unordered_map>

#include "bcd/kernels.hpp"

namespace bcd {

namespace detail {

std::vector<cplx> dft_direct(const std::vector<cplx>& in, int sign) {
  const std::size_t n = in.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc(0.0, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
      const double ang = sign * 2.0 * M_PI * static_cast<double>(m * k % n) /
                         static_cast<double>(n);
      acc += in[m] * cplx(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

namespace {

// Per-thread twiddle cache keyed on (n, sign). Keeps the transform allocation
// free on the hot path of the scaling benchmark.
const std::vector<cplx>& twiddles(std::size_t n, int sign) {
  thread_local std::unordered_map<std::size_t, std::vector<cplx>> cache;
  const std::size_t key = (n << 1) | (sign > 0 ? 1u : 0u);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cplx> w(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double ang = sign * 2.0 * M_PI * static_cast<double>(k) /
                       static_cast<double>(n);
    w[k] = cplx(std::cos(ang), std::sin(ang));
  }
  return cache.emplace(key, std::move(w)).first->second;
}

}  // namespace

void fft_radix2(cplx* data, std::size_t n, int sign) {
  if (n < 2) return;
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  const std::vector<cplx>& w = twiddles(n, sign);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx t = data[base + k + len / 2] * w[k * stride];
        data[base + k + len / 2] = data[base + k] - t;
        data[base + k] += t;
      }
    }
  }
}

}  // namespace detail

namespace {

std::vector<cplx> unitary_transform(const std::vector<cplx>& in, int sign) {
  const std::size_t n = in.size();
  std::vector<cplx> out;
  if (n >= 2 && std::has_single_bit(n)) {
    out = in;
    detail::fft_radix2(out.data(), n, sign);
  } else {
    out = detail::dft_direct(in, sign);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (cplx& x : out) x *= scale;
  return out;
}

}  // namespace

BeamspaceVector to_beamspace(const ChannelVector& h) {
  return BeamspaceVector(unitary_transform(h.v, -1));
}

ChannelVector from_beamspace(const BeamspaceVector& hbar) {
  return ChannelVector(unitary_transform(hbar.v, +1));
}

std::vector<double> magnitudes_squared(const BeamspaceVector& hbar) {
  std::vector<double> p(hbar.size());
  kernels::magnitudes_squared(hbar.v.data(), p.data(), hbar.size());
  return p;
}

}  // namespace bcd
