#include "bcd/fixedpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "bcd/beamspace.hpp"
#include "bcd/quantizer.hpp"

namespace bcd::fx {

namespace {

thread_local std::uint64_t g_saturations = 0;

std::int64_t saturate(std::int64_t raw, QFormat fmt) {
  if (raw > fmt.raw_max()) {
    ++g_saturations;
    return fmt.raw_max();
  }
  if (raw < fmt.raw_min()) {
    ++g_saturations;
    return fmt.raw_min();
  }
  return raw;
}

// Round-to-nearest-even right shift (left shift when k <= 0).
std::int64_t rne_shift(std::int64_t v, int k) {
  if (k <= 0) return v << -k;
  const std::int64_t floor = v >> k;
  const std::int64_t rem = v - (floor << k);
  const std::int64_t half = std::int64_t{1} << (k - 1);
  if (rem > half || (rem == half && (floor & 1))) return floor + 1;
  return floor;
}

int log2_exact(double x) {
  const double l = std::log2(x);
  const double r = std::round(l);
  if (std::abs(l - r) > 1e-12)
    throw std::domain_error("fixedpoint: value must be a power of two");
  return static_cast<int>(r);
}

int log2_size(std::size_t n) {
  if (n == 0 || !std::has_single_bit(n))
    throw std::domain_error("fixedpoint: M must be a power of two");
  return std::countr_zero(n);
}

}  // namespace

void QFormat::validate() const {
  if (frac_bits < 0 || frac_bits >= word_bits || word_bits > 32)
    throw std::domain_error("QFormat: need 0 <= frac_bits < word_bits <= 32");
}

double QFormat::lsb() const { return std::ldexp(1.0, -frac_bits); }

FxValue fx_quantize(double x, QFormat fmt) {
  fmt.validate();
  const double scaled = std::ldexp(x, fmt.frac_bits);
  double r = std::nearbyint(scaled);  // default mode: round half to even
  if (r > static_cast<double>(fmt.raw_max())) {
    ++g_saturations;
    return {fmt.raw_max(), fmt};
  }
  if (r < static_cast<double>(fmt.raw_min())) {
    ++g_saturations;
    return {fmt.raw_min(), fmt};
  }
  return {static_cast<std::int64_t>(r), fmt};
}

std::uint64_t saturation_count() { return g_saturations; }
void reset_saturation_count() { g_saturations = 0; }

FxValue fx_add(FxValue a, FxValue b) {
  if (a.fmt != b.fmt) throw std::invalid_argument("fx_add: format mismatch");
  return {saturate(a.raw + b.raw, a.fmt), a.fmt};
}

FxValue fx_sub(FxValue a, FxValue b) {
  if (a.fmt != b.fmt) throw std::invalid_argument("fx_sub: format mismatch");
  return {saturate(a.raw - b.raw, a.fmt), a.fmt};
}

FxValue fx_mul(FxValue a, FxValue b, QFormat out) {
  out.validate();
  const std::int64_t prod = a.raw * b.raw;
  const int shift = a.fmt.frac_bits + b.fmt.frac_bits - out.frac_bits;
  return {saturate(rne_shift(prod, shift), out), out};
}

FxValue fx_div(FxValue a, FxValue b, QFormat out) {
  out.validate();
  if (b.raw == 0) {
    ++g_saturations;
    return {a.raw >= 0 ? out.raw_max() : out.raw_min(), out};
  }
  const int s = out.frac_bits - a.fmt.frac_bits + b.fmt.frac_bits;
  std::int64_t num = a.raw;
  std::int64_t den = b.raw;
  if (s >= 0) num <<= s;
  else den <<= -s;
  return {saturate(num / den, out), out};  // trunc toward zero
}

FxValue fx_convert(FxValue a, QFormat out) {
  out.validate();
  const int shift = a.fmt.frac_bits - out.frac_bits;
  return {saturate(rne_shift(a.raw, shift), out), out};
}

SortedPrefix fx_sorted_prefix(const std::vector<FxValue>& p) {
  if (p.empty()) throw std::invalid_argument("fx_sorted_prefix: empty input");
  const QFormat fmt = p.front().fmt;
  for (const FxValue& v : p)
    if (v.fmt != fmt) throw std::invalid_argument("fx_sorted_prefix: format mismatch");

  SortedPrefix sp;
  sp.sorted = p;
  std::sort(sp.sorted.begin(), sp.sorted.end(),
            [](const FxValue& a, const FxValue& b) { return a.raw < b.raw; });

  int extra = 0;
  while ((std::size_t{1} << extra) < p.size()) ++extra;
  sp.accum_fmt = QFormat{std::min(fmt.word_bits + extra, 32), fmt.frac_bits};

  sp.prefix.resize(p.size());
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < sp.sorted.size(); ++i) {
    acc += sp.sorted[i].raw;  // exact: widened accumulator
    sp.prefix[i] = {acc, sp.accum_fmt};
  }
  return sp;
}

FxNoiseEstimate fx_noise_estimator(const std::vector<FxValue>& p,
                                   const DenoiserParams& params) {
  params.validate();
  const int c_shift = log2_exact(params.conf);
  const int cw_shift = log2_exact(params.conf_wide);
  const std::size_t m = p.size();
  const QFormat fmt = p.front().fmt;
  const std::size_t rho_min = params.effective_rho_min(m);

  const SortedPrefix sp = fx_sorted_prefix(p);

  std::int64_t median_raw;
  if (m % 2 == 0 && m >= 2)
    median_raw = (sp.sorted[m / 2 - 1].raw + sp.sorted[m / 2].raw) >> 1;
  else
    median_raw = sp.sorted[m / 2].raw;

  const FxValue inv_ln2 = fx_quantize(1.0 / M_LN2, kConstFmt);
  FxValue d0 = fx_mul({median_raw, fmt}, inv_ln2, fmt);

  FxNoiseEstimate est;
  est.trajectory.push_back(d0);

  auto walk = [&](std::size_t idx, std::int64_t tau) {
    while (idx < m && sp.sorted[idx].raw <= tau) ++idx;
    while (idx > 0 && sp.sorted[idx - 1].raw > tau) --idx;
    return idx;
  };

  std::size_t idx = m / 2;  // walk starts near the median
  for (std::size_t t = 0; t < params.iters; ++t) {
    idx = walk(idx, d0.raw << c_shift);
    std::size_t used = idx;
    bool widened = false;
    if (used < rho_min) {
      used = walk(used, d0.raw << cw_shift);
      widened = true;
    }
    if (used == 0) {
      d0 = {0, fmt};
    } else {
      const std::int64_t mean_raw =
          sp.prefix[used - 1].raw / static_cast<std::int64_t>(used);
      const double conf_used =
          (widened && !params.strict_paper_kappa) ? params.conf_wide : params.conf;
      const FxValue inv_kappa = fx_quantize(1.0 / kappa(conf_used), kConstFmt);
      d0 = fx_mul({mean_raw, fmt}, inv_kappa, fmt);
    }
    est.trajectory.push_back(d0);
    est.retained.push_back(used);
    if (widened) idx = used;
  }
  est.final = d0;
  return est;
}

PwlLogTable make_pwl_log_table(int segments) {
  if (segments < 2 || !std::has_single_bit(static_cast<unsigned>(segments)))
    throw std::domain_error("make_pwl_log_table: segments must be a power of two >= 2");
  PwlLogTable t;
  t.segments = segments;
  t.ln2 = fx_quantize(M_LN2, t.out_fmt);
  const double h = 1.0 / segments;
  std::vector<std::int64_t> anchors(segments + 1);
  for (int j = 0; j <= segments; ++j) {
    const double b = 1.0 + j * h;
    anchors[j] = (j == segments) ? t.ln2.raw : fx_quantize(std::log(b), t.out_fmt).raw;
    if (j < segments) {
      t.breakpoints.push_back(fx_quantize(b, t.coeff_fmt));  // exact
      t.intercepts.push_back({anchors[j], t.out_fmt});
    }
  }
  for (int j = 0; j < segments; ++j) {
    // slope = (anchor_{j+1} - anchor_j)/h with h a power of two: exact raw
    const std::int64_t slope_raw = (anchors[j + 1] - anchors[j]) * segments;
    t.slopes.push_back({slope_raw, t.coeff_fmt});
  }
  return t;
}

FxValue pwl_ln(FxValue x, const PwlLogTable& table) {
  if (x.raw <= 0) throw std::domain_error("pwl_ln: input must be positive");
  const int bw = std::bit_width(static_cast<std::uint64_t>(x.raw));
  const int k = (bw - 1) - x.fmt.frac_bits;  // floor(log2 x)
  // mantissa in [1, 2) at the coefficient precision; extra bits truncate
  const int mshift = table.coeff_fmt.frac_bits - (bw - 1);
  const std::int64_t mant_raw =
      mshift >= 0 ? (x.raw << mshift) : (x.raw >> -mshift);
  const int seg_bits = std::countr_zero(static_cast<unsigned>(table.segments));
  const std::int64_t one = std::int64_t{1} << table.coeff_fmt.frac_bits;
  const int off_bits = table.coeff_fmt.frac_bits - seg_bits;
  const std::size_t j = static_cast<std::size_t>((mant_raw - one) >> off_bits);
  const std::int64_t offset = mant_raw - table.breakpoints[j].raw;
  // truncating product keeps each segment below the next anchor, so the
  // approximation is monotone by construction
  std::int64_t val = table.intercepts[j].raw +
                     ((table.slopes[j].raw * offset) >> table.coeff_fmt.frac_bits);
  val += static_cast<std::int64_t>(k) * table.ln2.raw;
  return {saturate(val, table.out_fmt), table.out_fmt};
}

ThresholdTables make_threshold_tables(std::size_t m, double cost_ratio) {
  if (!(cost_ratio > 0.0))
    throw std::domain_error("make_threshold_tables: C must be positive");
  log2_size(m);
  ThresholdTables t;
  t.m = m;
  t.pwl = make_pwl_log_table();
  t.ln_int.reserve(m);
  for (std::size_t i = 1; i <= m; ++i)
    t.ln_int.push_back(fx_quantize(std::log(static_cast<double>(i)), kLogFmt));
  t.ln_cost = fx_quantize(std::log(cost_ratio), kLogFmt);
  return t;
}

FxValue fx_threshold_from(std::size_t q_m, FxValue d0, FxValue sdnr,
                          const ThresholdTables& tables) {
  const std::size_t m = tables.m;
  const int log2m = log2_size(m);
  if (q_m < 1 || q_m >= m)
    throw std::domain_error("fx_threshold_from: q_m must be in [1, M-1]");
  if (sdnr.raw <= 0) throw std::domain_error("fx_threshold_from: sdnr must be positive");

  const std::int64_t ms_raw = sdnr.raw << log2m;  // M * SDNR
  const std::int64_t qm = static_cast<std::int64_t>(q_m);

  // ln(1 + M*SDNR/q_m); the ratio keeps the SDNR fractional precision in a
  // 32-bit comparator word
  const QFormat arg_fmt{32, sdnr.fmt.frac_bits};
  const std::int64_t ratio_raw = ms_raw / qm;
  const FxValue arg{
      saturate((std::int64_t{1} << sdnr.fmt.frac_bits) + ratio_raw, arg_fmt),
      arg_fmt};
  const FxValue t1 = pwl_ln(arg, tables.pwl);

  std::int64_t lnsum = t1.raw + tables.ln_int[m - q_m - 1].raw -
                       tables.ln_int[q_m - 1].raw + tables.ln_cost.raw;
  const FxValue lnsum_fx{saturate(lnsum, kLogFmt), kLogFmt};

  // 1 + q_m/(M*SDNR); the word is wide enough that any nonzero SDNR fits
  const std::int64_t inv_raw =
      (qm << (kFactorFmt.frac_bits + sdnr.fmt.frac_bits)) / ms_raw;
  const FxValue factor{
      saturate((std::int64_t{1} << kFactorFmt.frac_bits) + inv_raw, kFactorFmt),
      kFactorFmt};

  // d0 * lnsum stays below 2^12 in value, so the widened intermediate never
  // clips; the final product saturates only when the true threshold already
  // exceeds every representable squared magnitude (a reject-all decision)
  const FxValue eta0 = fx_mul(d0, lnsum_fx, QFormat{32, 16});
  return fx_mul(eta0, factor, kEtaFmt);
}

FxThresholdResult fx_activity_and_threshold(const std::vector<FxValue>& p,
                                            FxValue d0, FxValue p_hat,
                                            FxValue sdnr,
                                            const ThresholdTables& tables) {
  const std::size_t m = tables.m;
  if (p.size() != m)
    throw std::invalid_argument("fx_activity_and_threshold: size mismatch");
  const int log2m = log2_size(m);

  FxThresholdResult res;

  // activity: q_m = round(2 M^2 P^2 / (sum p^2 - 2M D0^2 - 4M D0 P))
  std::int64_t sum_p2 = 0;
  for (const FxValue& v : p) sum_p2 += v.raw * v.raw;  // exact, frac 2*fb
  const std::int64_t d0sq = d0.raw * d0.raw;
  const std::int64_t dp = d0.raw * p_hat.raw;
  const std::int64_t psq = p_hat.raw * p_hat.raw;
  const std::int64_t den = sum_p2 - (d0sq << (1 + log2m)) - (dp << (2 + log2m));
  if (den <= 0) {
    res.q_m = m;
    res.degenerate = true;
  } else {
    const std::int64_t num = psq << (1 + 2 * log2m);
    const std::int64_t qm = (num + den / 2) / den;  // divide + round
    res.q_m = static_cast<std::size_t>(
        std::clamp<std::int64_t>(qm, 1, static_cast<std::int64_t>(m)));
  }

  // sentinel precedence mirrors the float path: a zero SDNR estimate rejects
  // everything even when the activity denominator was degenerate
  res.zero_all = (sdnr.raw == 0);
  res.keep_all = !res.zero_all && (res.q_m == m);
  if (res.zero_all || res.keep_all) {
    res.eta = {0, kEtaFmt};
    return res;
  }
  res.eta = fx_threshold_from(res.q_m, d0, sdnr, tables);
  return res;
}

FxDenoiseResult fx_denoise(std::span<const FxValue> re, std::span<const FxValue> im,
                           std::span<const FxValue> p, const FxThresholdResult& thr,
                           FxValue inv_alpha) {
  const std::size_t m = re.size();
  if (im.size() != m || p.size() != m)
    throw std::invalid_argument("fx_denoise: size mismatch");
  FxDenoiseResult out;
  out.re.resize(m);
  out.im.resize(m);
  out.keep.resize(m);
  const int shift = thr.eta.fmt.frac_bits - (m ? p[0].fmt.frac_bits : 0);
  for (std::size_t i = 0; i < m; ++i) {
    bool pass;
    if (thr.zero_all) pass = false;
    else if (thr.keep_all) pass = true;
    else pass = (p[i].raw << shift) >= thr.eta.raw;  // ties pass
    if (pass) {
      out.re[i] = fx_mul(re[i], inv_alpha, kOutFmt);
      out.im[i] = fx_mul(im[i], inv_alpha, kOutFmt);
      out.keep[i] = 1;
      ++out.kept;
    } else {
      out.re[i] = {0, kOutFmt};
      out.im[i] = {0, kOutFmt};
      out.keep[i] = 0;
    }
  }
  return out;
}

namespace {

const ThresholdTables& cached_tables(std::size_t m, double cost_ratio) {
  thread_local std::unordered_map<std::size_t, ThresholdTables> cache;
  // key mixes M with the cost ratio bits; C rarely changes within a run
  std::uint64_t cbits;
  static_assert(sizeof cbits == sizeof cost_ratio);
  std::memcpy(&cbits, &cost_ratio, sizeof cbits);
  const std::size_t key = m ^ static_cast<std::size_t>(splitmix64(cbits));
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, make_threshold_tables(m, cost_ratio)).first;
  return it->second;
}

}  // namespace

FxPipelineResult fx_denoise_pipeline(const ChannelVector& h_obs, double alpha,
                                     const DenoiserParams& params,
                                     std::optional<double> known_d0) {
  params.validate();
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::domain_error("fx_denoise_pipeline: alpha must be in (0, 1]");
  const std::size_t m = h_obs.size();
  const int log2m = log2_size(m);
  const std::uint64_t sat_before = g_saturations;

  double sigma = ideal_agc_sigma(h_obs);
  if (sigma == 0.0) sigma = 1.0;  // all-zero observation: datapath sees zeros

  // antenna boundary, 16/8
  ChannelVector x(m);
  for (std::size_t i = 0; i < m; ++i) {
    const FxValue re = fx_quantize(h_obs[i].real() / sigma, kAntennaFmt);
    const FxValue im = fx_quantize(h_obs[i].imag() / sigma, kAntennaFmt);
    x[i] = cplx(re.to_double(), im.to_double());
  }

  const BeamspaceVector hb = to_beamspace(x);

  // beamspace boundary, 10/8 mantissas with shared block exponent g
  double maxabs = 0.0;
  for (const cplx& c : hb.v)
    maxabs = std::max({maxabs, std::abs(c.real()), std::abs(c.imag())});
  int g = 0;
  while (maxabs / std::ldexp(1.0, g) > 1.994) ++g;
  std::vector<FxValue> re_b(m), im_b(m);
  for (std::size_t i = 0; i < m; ++i) {
    re_b[i] = fx_quantize(std::ldexp(hb[i].real(), -g), kBeamFmt);
    im_b[i] = fx_quantize(std::ldexp(hb[i].imag(), -g), kBeamFmt);
  }

  // squaring unit: exact 2*frac products, then block-normalized to 16/8 so the
  // estimator sees a full-scale buffer regardless of channel concentration
  std::vector<std::int64_t> p20(m);
  std::int64_t maxp = 0;
  for (std::size_t i = 0; i < m; ++i) {
    p20[i] = re_b[i].raw * re_b[i].raw + im_b[i].raw * im_b[i].raw;
    maxp = std::max(maxp, p20[i]);
  }
  int pshift = 0;
  if (maxp > 0) {
    pshift = std::bit_width(static_cast<std::uint64_t>(maxp)) - 15;
    while (rne_shift(maxp, pshift) > kPowerFmt.raw_max()) ++pshift;
  }
  std::vector<FxValue> p(m);
  for (std::size_t i = 0; i < m; ++i)
    p[i] = {rne_shift(p20[i], pshift), kPowerFmt};
  // p mantissa value = true value (in normalized-input units) * 2^{-e_p}
  const int e_p = 2 * g - 2 * kBeamFmt.frac_bits + pshift + kPowerFmt.frac_bits;

  FxPipelineResult out;
  out.beam_exp = g;
  out.power_exp = e_p;

  // mantissa value = input-domain value / p_scale
  const double p_scale = std::ldexp(sigma * sigma, e_p);

  FxNoiseEstimate noise;
  if (known_d0) {
    // Remark-2 datapath: the estimator units are bypassed and the supplied
    // composite-noise variance is loaded directly
    if (*known_d0 < 0.0)
      throw std::domain_error("fx_denoise_pipeline: known_d0 must be >= 0");
    noise.final = fx_quantize(*known_d0 / p_scale, kPowerFmt);
    noise.trajectory = {noise.final};
  } else {
    noise = fx_noise_estimator(p, params);
  }
  out.d0_fx = noise.final;

  std::int64_t sum_p = 0;
  for (const FxValue& v : p) sum_p += v.raw;
  const std::int64_t mean_raw = rne_shift(sum_p, log2m);
  const std::int64_t phat_raw = std::max<std::int64_t>(mean_raw - noise.final.raw, 0);
  out.p_hat_fx = {phat_raw, kPowerFmt};

  FxThresholdResult thr;
  if (noise.final.raw == 0) {
    // noise-free datapath estimate: keep everything
    out.sdnr_fx = {kSdnrFmt.raw_max(), kSdnrFmt};
    thr.q_m = m;
    thr.keep_all = true;
    thr.eta = {0, kEtaFmt};
  } else {
    out.sdnr_fx = fx_div(out.p_hat_fx, noise.final, kSdnrFmt);
    thr = fx_activity_and_threshold(p, noise.final, out.p_hat_fx, out.sdnr_fx,
                                    cached_tables(m, params.cost_ratio));
  }
  out.q_m = thr.q_m;
  out.eta_fx = thr.eta;

  const FxValue inv_alpha = fx_quantize(1.0 / alpha, kInvAlphaFmt);
  FxDenoiseResult den = fx_denoise(re_b, im_b, p, thr, inv_alpha);

  BeamspaceVector hb_out(m);
  const double beam_scale = std::ldexp(sigma, g);
  for (std::size_t i = 0; i < m; ++i)
    hb_out[i] = cplx(den.re[i].to_double() * beam_scale,
                     den.im[i].to_double() * beam_scale);
  out.denoised = from_beamspace(hb_out);

  // report in input-domain units
  EstimationReport rep;
  rep.blind = !known_d0.has_value();
  for (const FxValue& v : noise.trajectory)
    rep.noise.trajectory.push_back(v.to_double() * p_scale);
  rep.noise.retained = noise.retained;
  rep.d0 = noise.final.to_double() * p_scale;
  rep.channel_power = out.p_hat_fx.to_double() * p_scale;
  rep.sdnr = out.sdnr_fx.to_double();
  rep.activity = ActivityEstimate{
      static_cast<double>(thr.q_m) / static_cast<double>(m), thr.q_m,
      thr.degenerate};
  rep.eta = thr.keep_all ? -std::numeric_limits<double>::infinity()
            : thr.zero_all ? std::numeric_limits<double>::infinity()
                           : thr.eta.to_double() * p_scale;
  rep.decisions = den.keep;
  out.report = std::move(rep);

  out.beam_re = std::move(re_b);
  out.beam_im = std::move(im_b);
  out.p = std::move(p);
  out.out_re = std::move(den.re);
  out.out_im = std::move(den.im);
  out.saturations = g_saturations - sat_before;
  return out;
}

void dump_hex(std::ostream& os, std::span<const FxValue> values) {
  char buf[32];
  for (const FxValue& v : values) {
    const int width = std::clamp((v.fmt.word_bits + 3) / 4, 1, 16);
    const std::uint64_t mask = (v.fmt.word_bits >= 64)
                                   ? ~std::uint64_t{0}
                                   : ((std::uint64_t{1} << v.fmt.word_bits) - 1);
    std::snprintf(buf, sizeof buf, "%0*llx\n", width,
                  static_cast<unsigned long long>(
                      static_cast<std::uint64_t>(v.raw) & mask));
    os << buf;
  }
}

}  // namespace bcd::fx
