#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bcd/types.hpp"

namespace bcd {

/// Column-major M x K complex matrix (K user channels side by side).
struct ChannelMatrix {
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<cplx> a;  // column-major, a[col * m + row]

  ChannelMatrix() = default;
  ChannelMatrix(std::size_t rows, std::size_t cols)
      : m(rows), k(cols), a(rows * cols) {}

  cplx& at(std::size_t row, std::size_t col) { return a[col * m + row]; }
  const cplx& at(std::size_t row, std::size_t col) const { return a[col * m + row]; }
  void set_column(std::size_t col, const ChannelVector& h);
};

/// Gray-mapped 16-QAM, unit average symbol energy.
cplx qam16_modulate(unsigned sym);
unsigned qam16_demodulate(cplx y);
unsigned qam16_bit_errors(unsigned tx, unsigned rx);

struct EqualizeResult {
  std::vector<cplx> symbols;  // K estimates
  bool singular = false;      // regularized Gram condition above 1e12
};

/// Precomputed W^H (K x M, row-major) so one channel estimate can equalize
/// many received vectors.
struct LmmseFilter {
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<cplx> wh;  // row-major K x M
  bool singular = false;
};

LmmseFilter lmmse_prepare(const ChannelMatrix& h_hat, double snr_linear);
std::vector<cplx> lmmse_apply(const LmmseFilter& f, const std::vector<cplx>& y);

/// x_hat = W^H y with W = H_hat (H_hat^H H_hat + (1/snr) I_K)^{-1}, computed
/// through the K x K regularized Gram system.
EqualizeResult lmmse_equalize(const ChannelMatrix& h_hat,
                              const std::vector<cplx>& y, double snr_linear);

}  // namespace bcd
