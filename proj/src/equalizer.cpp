#include "bcd/equalizer.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <stdexcept>

namespace bcd {

void ChannelMatrix::set_column(std::size_t col, const ChannelVector& h) {
  if (h.size() != m) throw std::invalid_argument("ChannelMatrix: row mismatch");
  std::copy(h.v.begin(), h.v.end(), a.begin() + static_cast<long>(col * m));
}

namespace {

// Gray levels: bit pair 00,01,11,10 -> -3,-1,+1,+3 (scaled by 1/sqrt(10))
constexpr double kQamScale = 0.31622776601683794;  // 1/sqrt(10)

double gray_level(unsigned two_bits) {
  static constexpr double lut[4] = {-3.0, -1.0, 1.0, 3.0};
  static constexpr unsigned order[4] = {0, 1, 3, 2};  // gray -> position
  for (unsigned i = 0; i < 4; ++i)
    if (order[i] == two_bits) return lut[i];
  return 0.0;
}

unsigned gray_slice(double x) {
  static constexpr unsigned gray[4] = {0, 1, 3, 2};
  const double v = x / kQamScale;
  int pos = v < -2.0 ? 0 : v < 0.0 ? 1 : v < 2.0 ? 2 : 3;
  return gray[pos];
}

}  // namespace

cplx qam16_modulate(unsigned sym) {
  const unsigned ib = sym & 0x3u;
  const unsigned qb = (sym >> 2) & 0x3u;
  return cplx(gray_level(ib) * kQamScale, gray_level(qb) * kQamScale);
}

unsigned qam16_demodulate(cplx y) {
  return gray_slice(y.real()) | (gray_slice(y.imag()) << 2);
}

unsigned qam16_bit_errors(unsigned tx, unsigned rx) {
  return static_cast<unsigned>(std::popcount((tx ^ rx) & 0xfu));
}

LmmseFilter lmmse_prepare(const ChannelMatrix& h_hat, double snr_linear) {
  const std::size_t m = h_hat.m;
  const std::size_t k = h_hat.k;
  if (k > m) throw std::invalid_argument("lmmse_prepare: K must not exceed M");
  if (!(snr_linear > 0.0))
    throw std::domain_error("lmmse_prepare: snr must be positive");

  using Mat = Eigen::MatrixXcd;
  Eigen::Map<const Mat> H(h_hat.a.data(), static_cast<long>(m), static_cast<long>(k));

  Mat gram = H.adjoint() * H;
  gram.diagonal().array() += cplx(1.0 / snr_linear, 0.0);

  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  const auto& ev = es.eigenvalues();
  LmmseFilter f;
  f.m = m;
  f.k = k;
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    f.singular = true;
    return f;
  }
  // W^H = G^{-1} H^H via the eigendecomposition of the Hermitian Gram matrix
  const Mat ginv = es.eigenvectors() *
                   ev.cwiseInverse().cast<cplx>().asDiagonal() *
                   es.eigenvectors().adjoint();
  const Mat wh = ginv * H.adjoint();  // K x M
  f.wh.resize(k * m);
  for (std::size_t u = 0; u < k; ++u)
    for (std::size_t i = 0; i < m; ++i)
      f.wh[u * m + i] = wh(static_cast<long>(u), static_cast<long>(i));
  return f;
}

std::vector<cplx> lmmse_apply(const LmmseFilter& f, const std::vector<cplx>& y) {
  if (f.singular) throw std::logic_error("lmmse_apply: singular filter");
  if (y.size() != f.m) throw std::invalid_argument("lmmse_apply: y size mismatch");
  std::vector<cplx> x(f.k);
  for (std::size_t u = 0; u < f.k; ++u) {
    cplx acc(0.0, 0.0);
    const cplx* row = f.wh.data() + u * f.m;
    for (std::size_t i = 0; i < f.m; ++i) acc += row[i] * y[i];
    x[u] = acc;
  }
  return x;
}

EqualizeResult lmmse_equalize(const ChannelMatrix& h_hat,
                              const std::vector<cplx>& y, double snr_linear) {
  if (y.size() != h_hat.m)
    throw std::invalid_argument("lmmse_equalize: y size mismatch");
  const LmmseFilter f = lmmse_prepare(h_hat, snr_linear);
  EqualizeResult res;
  if (f.singular) {
    res.singular = true;
    res.symbols.assign(h_hat.k, cplx(0.0, 0.0));
    return res;
  }
  res.symbols = lmmse_apply(f, y);
  return res;
}

}  // namespace bcd
