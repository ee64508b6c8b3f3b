#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "bcd/beamspace.hpp"
#include "bcd/chanmodel.hpp"
#include "bcd/denoiser.hpp"
#include "bcd/quantizer.hpp"

using namespace bcd;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// density ratio of the two mixture components at squared magnitude x
double likelihood_ratio(double x, double d0, double sdnr, double q) {
  const double v1 = d0 * (1.0 + sdnr / q);  // signal-plus-noise variance
  return (d0 / v1) * std::exp(-x / v1 + x / d0);
}
}  // namespace

TEST_CASE("threshold closed form") {
  CHECK(compute_threshold(1.0, 1.0, 0.5, 1.0) ==
        doctest::Approx(1.5 * std::log(3.0)).epsilon(1e-12));

  // doubling C adds d0 (1 + q/sdnr) ln 2
  const double base = compute_threshold(0.7, 3.0, 0.2, 4.0);
  const double doubled = compute_threshold(0.7, 3.0, 0.2, 8.0);
  CHECK(doubled - base ==
        doctest::Approx(0.7 * (1.0 + 0.2 / 3.0) * M_LN2).epsilon(1e-12));

  CHECK(compute_threshold(1.0, 0.0, 0.5, 4.0) == kInf);
  CHECK(compute_threshold(1.0, 2.0, 1.0, 4.0) == -kInf);
  CHECK(compute_threshold(1.0, kInf, 0.5, 4.0) == -kInf);
  CHECK_THROWS_AS(compute_threshold(0.0, 1.0, 0.5, 4.0), std::domain_error);
  CHECK_THROWS_AS(compute_threshold(1.0, 1.0, 0.0, 4.0), std::domain_error);
  CHECK_THROWS_AS(compute_threshold(1.0, 1.0, 0.5, 0.0), std::domain_error);
}

TEST_CASE("threshold satisfies the likelihood-ratio identity") {
  Rng rng(1);
  const std::size_t m = 64;
  for (int i = 0; i < 1000; ++i) {
    const double d0 = 0.01 * std::pow(1000.0, rng.uniform());
    const double sdnr = 0.01 * std::pow(10000.0, rng.uniform());
    const std::size_t qm = 1 + static_cast<std::size_t>(rng.uniform() * (m - 1));
    const double q = double(qm) / double(m);
    const double c = 0.25 * std::pow(64.0, rng.uniform());
    const double eta = compute_threshold(d0, sdnr, q, c);
    const double lr = likelihood_ratio(eta, d0, sdnr, q);
    const double target = (1.0 - q) / q * c;
    CHECK(std::abs(lr - target) <= 1e-9 * target);
  }
}

TEST_CASE("hardware split-log form matches the monolithic form") {
  Rng rng(3);
  const std::size_t m = 64;
  for (int i = 0; i < 1000; ++i) {
    const double d0 = 0.01 * std::pow(1000.0, rng.uniform());
    const double sdnr = 0.01 * std::pow(10000.0, rng.uniform());
    const std::size_t qm = 1 + static_cast<std::size_t>(rng.uniform() * (m - 1));
    const double c = 0.25 * std::pow(64.0, rng.uniform());
    const double a = compute_threshold(d0, sdnr, double(qm) / double(m), c);
    const double b = compute_threshold_hw_form(d0, sdnr, qm, m, c);
    CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1.0));
  }

  CHECK(compute_threshold_hw_form(1.0, 10.0, 16, 64, 4.0) ==
        doctest::Approx(compute_threshold(1.0, 10.0, 0.25, 4.0)).epsilon(1e-12));
  // q_m = M-1 with large SDNR: log argument > 1, threshold stays positive
  CHECK(compute_threshold_hw_form(1.0, 1000.0, 63, 64, 4.0) > 0.0);
  CHECK(compute_threshold_hw_form(1.0, 10.0, 64, 64, 4.0) == -kInf);
  CHECK_THROWS_AS(compute_threshold_hw_form(1.0, 10.0, 0, 64, 4.0),
                  std::domain_error);
}

TEST_CASE("hard thresholding semantics") {
  BeamspaceVector hb(std::vector<cplx>{{1.0, -1.0}, {0.5, 0.5}});
  // |x0|^2 = 2, |x1|^2 = 0.5
  const DenoiseResult r = denoise(hb, 1.0, 0.5);
  CHECK(r.denoised[0] == cplx(2.0, -2.0));
  CHECK(r.denoised[1] == cplx(0.0, 0.0));
  CHECK(r.decisions[0] == 1);
  CHECK(r.decisions[1] == 0);

  const DenoiseResult all = denoise(hb, 0.0, 1.0);
  CHECK(all.denoised[0] == hb[0]);
  CHECK(all.denoised[1] == hb[1]);

  const DenoiseResult none = denoise(hb, kInf, 1.0);
  CHECK(none.denoised[0] == cplx(0.0, 0.0));
  CHECK(none.denoised[1] == cplx(0.0, 0.0));

  // exact tie is kept
  const DenoiseResult tie = denoise(hb, 0.5, 1.0);
  CHECK(tie.decisions[1] == 1);

  CHECK_THROWS_AS(denoise(hb, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(denoise(hb, 1.0, 1.5), std::domain_error);
}

TEST_CASE("decision mask is scale invariant") {
  Rng rng(5);
  BeamspaceVector hb(64);
  for (auto& x : hb.v) x = rng.cnormal(1.0);
  const double eta = 0.8;
  const DenoiseResult base = denoise(hb, eta, 0.9);
  for (int e : {-6, 2, 9}) {
    const double s = std::ldexp(1.0, e);
    BeamspaceVector scaled(64);
    for (std::size_t i = 0; i < 64; ++i) scaled[i] = s * hb[i];
    const DenoiseResult r = denoise(scaled, s * s * eta, 0.9);
    CHECK(r.decisions == base.decisions);
  }
}

TEST_CASE("support and energy invariants") {
  Rng rng(7);
  BeamspaceVector hb(128);
  for (auto& x : hb.v) x = rng.cnormal(2.0);
  const double alpha = 0.8825181522;
  const DenoiseResult r = denoise(hb, 1.0, alpha);
  std::size_t support = 0;
  for (std::size_t i = 0; i < 128; ++i) {
    if (r.denoised[i] != cplx(0.0, 0.0)) ++support;
    if (!r.decisions[i]) CHECK(r.denoised[i] == cplx(0.0, 0.0));
  }
  std::size_t h1 = 0;
  for (auto d : r.decisions) h1 += d;
  CHECK(support <= h1);  // zero entries can pass the threshold too
  CHECK(norm_squared(r.denoised) <= norm_squared(hb) / (alpha * alpha) + 1e-12);
}

TEST_CASE("threshold is monotone in the cost ratio") {
  Rng rng(9);
  BeamspaceVector hb(64);
  for (auto& x : hb.v) x = rng.cnormal(1.0);
  double prev_eta = -kInf;
  std::size_t prev_kept = 64;
  for (double c : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double eta = compute_threshold(0.5, 5.0, 0.25, c);
    CHECK(eta > prev_eta);
    const DenoiseResult r = denoise(hb, eta, 1.0);
    std::size_t kept = 0;
    for (auto d : r.decisions) kept += d;
    CHECK(kept <= prev_kept);
    prev_eta = eta;
    prev_kept = kept;
  }
}

TEST_CASE("pipeline: noiseless unquantized input passes through") {
  // on-grid paths make the beamspace exactly sparse, driving the noise
  // estimate to zero (the noise-free path)
  SteeringConfig cfg{64,
                     {3.0 / 64, 11.0 / 64, -9.0 / 64},
                     {cplx(1.0, 0.2), cplx(0.4, -0.5), cplx(0.25, 0.1)}};
  const ChannelVector h = generate_geometric_channel(cfg);
  DenoiserParams params;
  auto [out, report] = denoise_pipeline(h, params, 1.0);
  double err = 0.0;
  for (std::size_t i = 0; i < 64; ++i) err += std::norm(out[i] - h[i]);
  CHECK(err < 1e-6 * norm_squared(h));

  // the known-D0 = 0 route takes the noise-free sentinel
  auto [out2, report2] = denoise_pipeline(h, params, 1.0, 0.0);
  CHECK(report2.eta == -kInf);
  double err2 = 0.0;
  for (std::size_t i = 0; i < 64; ++i) err2 += std::norm(out2[i] - h[i]);
  CHECK(err2 < 1e-20 * norm_squared(h));

  // an exactly sparse beamspace observation drives the blind estimate to the
  // same sentinel (the transform of a generated channel leaves rounding dust,
  // so the sentinel is exercised on the beamspace form directly)
  BeamspaceVector sparse(64);
  sparse[5] = cplx(2.0, 1.0);
  sparse[11] = cplx(-1.0, 0.5);
  EstimationReport rep3;
  denoise_beamspace(sparse, params, 1.0, std::nullopt, &rep3);
  CHECK(rep3.d0 == 0.0);
  CHECK(rep3.eta == -kInf);
}

TEST_CASE("pipeline beats the raw observation at 3 bits, 5 dB") {
  const QuantizerModel base = build_lloyd_max(3);
  const double alpha = alpha_for(base);
  const double e0 = std::pow(10.0, -0.5);
  DenoiserParams params;
  Rng seeder(13);
  std::size_t wins = 0;
  const std::size_t trials = 2000;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(13, t);
    const ChannelVector h =
        generate_geometric_channel(random_geometric_config(64, 3, rng));
    const ChannelVector analog = add_awgn(h, e0, rng);
    const double sigma = ideal_agc_sigma(analog);
    const ChannelVector obs = quantize(analog, base.with_input_scale(sigma));
    auto [den, rep] = denoise_pipeline(obs, params, alpha);
    double err_d = 0.0, err_ls = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
      err_d += std::norm(den[i] - h[i]);
      err_ls += std::norm(obs[i] - h[i]);
    }
    if (err_d < err_ls) ++wins;
  }
  CHECK(double(wins) / double(trials) >= 0.95);
}

TEST_CASE("blind and known-D0 paths agree within 1 dB at 10 dB SNR") {
  const QuantizerModel base = build_lloyd_max(3);
  const double alpha = alpha_for(base);
  const double e0 = 0.1;
  DenoiserParams params;
  double err_blind = 0.0, err_known = 0.0, ref = 0.0;
  const std::size_t trials = 2000;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(17, t);
    const ChannelVector h =
        generate_geometric_channel(random_geometric_config(64, 3, rng));
    const ChannelVector analog = add_awgn(h, e0, rng);
    const double sigma = ideal_agc_sigma(analog);
    const ChannelVector obs = quantize(analog, base.with_input_scale(sigma));
    const double d0 =
        composite_noise_variance(alpha, e0, norm_squared(h) / 64.0);
    auto [den_b, rep_b] = denoise_pipeline(obs, params, alpha);
    auto [den_k, rep_k] = denoise_pipeline(obs, params, alpha, d0);
    CHECK_FALSE(rep_k.blind);
    for (std::size_t i = 0; i < 64; ++i) {
      err_blind += std::norm(den_b[i] - h[i]);
      err_known += std::norm(den_k[i] - h[i]);
    }
    ref += norm_squared(h);
  }
  const double gap_db =
      std::abs(10.0 * std::log10(err_blind / ref) - 10.0 * std::log10(err_known / ref));
  CHECK(gap_db < 1.0);
}
