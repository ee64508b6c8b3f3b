#include "bcd/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace bcd::kernels {

namespace detail {

void magnitudes_squared_scalar(const cplx* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = x[i].real();
    const double im = x[i].imag();
    out[i] = re * re + im * im;
  }
}

std::size_t hard_threshold_scale_scalar(const cplx* x, const double* p, double eta,
                                        double inv_alpha, cplx* out,
                                        std::uint8_t* keep, std::size_t n) {
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] >= eta) {
      out[i] = cplx(x[i].real() * inv_alpha, x[i].imag() * inv_alpha);
      keep[i] = 1;
      ++kept;
    } else {
      out[i] = cplx(0.0, 0.0);
      keep[i] = 0;
    }
  }
  return kept;
}

}  // namespace detail

namespace {

struct Dispatch {
  void (*mag_sq)(const cplx*, double*, std::size_t);
  std::size_t (*threshold)(const cplx*, const double*, double, double, cplx*,
                           std::uint8_t*, std::size_t);
  Isa isa;
};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Dispatch make_dispatch(Isa isa) {
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::avx2)
    return {detail::magnitudes_squared_avx2, detail::hard_threshold_scale_avx2,
            Isa::avx2};
#endif
  return {detail::magnitudes_squared_scalar, detail::hard_threshold_scale_scalar,
          Isa::scalar};
}

Dispatch initial_dispatch() {
  Isa isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("BCD_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) isa = Isa::scalar;
    else if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) isa = Isa::avx2;
  }
  return make_dispatch(isa);
}

Dispatch g_dispatch = initial_dispatch();

}  // namespace

Isa active_isa() { return g_dispatch.isa; }

bool isa_supported(Isa isa) {
  return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2());
}

void force_isa(Isa isa) {
  if (!isa_supported(isa))
    throw std::runtime_error(std::string("unsupported ISA: ") + isa_name(isa));
  g_dispatch = make_dispatch(isa);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void magnitudes_squared(const cplx* x, double* out, std::size_t n) {
  g_dispatch.mag_sq(x, out, n);
}

std::size_t hard_threshold_scale(const cplx* x, const double* p, double eta,
                                 double inv_alpha, cplx* out, std::uint8_t* keep,
                                 std::size_t n) {
  return g_dispatch.threshold(x, p, eta, inv_alpha, out, keep, n);
}

}  // namespace bcd::kernels
