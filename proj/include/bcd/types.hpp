#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace bcd {

using cplx = std::complex<double>;

/// Antenna-domain complex vector. Distinct from BeamspaceVector so the two
/// domains cannot be mixed up at a call site.
struct ChannelVector {
  std::vector<cplx> v;

  ChannelVector() = default;
  explicit ChannelVector(std::size_t m) : v(m) {}
  explicit ChannelVector(std::vector<cplx> entries) : v(std::move(entries)) {}

  std::size_t size() const { return v.size(); }
  cplx& operator[](std::size_t i) { return v[i]; }
  const cplx& operator[](std::size_t i) const { return v[i]; }
};

/// DFT-domain counterpart of ChannelVector. Produced by to_beamspace or the
/// Bernoulli-Gaussian generator.
struct BeamspaceVector {
  std::vector<cplx> v;

  BeamspaceVector() = default;
  explicit BeamspaceVector(std::size_t m) : v(m) {}
  explicit BeamspaceVector(std::vector<cplx> entries) : v(std::move(entries)) {}

  std::size_t size() const { return v.size(); }
  cplx& operator[](std::size_t i) { return v[i]; }
  const cplx& operator[](std::size_t i) const { return v[i]; }
};

double norm_squared(const std::vector<cplx>& v);
inline double norm_squared(const ChannelVector& h) { return norm_squared(h.v); }
inline double norm_squared(const BeamspaceVector& h) { return norm_squared(h.v); }

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic random source. mt19937_64 plus an explicit Box-Muller
/// transform so streams are bit-reproducible across platforms (the std
/// distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Counter-derived substream: trial i of a run gets an independent stream,
  /// so serial and fanned-out executions draw identical per-trial noise.
  static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(splitmix64(master_seed ^ splitmix64(index + 0x9e3779b97f4a7c15ull)));
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double standard_normal();

  /// Circularly symmetric complex Gaussian, total variance `variance`.
  cplx cnormal(double variance);

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace bcd
