#include "bcd/denoiser.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bcd/beamspace.hpp"
#include "bcd/kernels.hpp"

namespace bcd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_threshold_args(double d0, double cost_ratio) {
  if (!(d0 > 0.0)) throw std::domain_error("compute_threshold: d0 must be positive");
  if (!(cost_ratio > 0.0))
    throw std::domain_error("compute_threshold: C must be positive");
}

}  // namespace

double compute_threshold(double d0, double sdnr, double q, double cost_ratio) {
  check_threshold_args(d0, cost_ratio);
  if (!(q > 0.0) || q > 1.0)
    throw std::domain_error("compute_threshold: q must be in (0, 1]");
  if (sdnr < 0.0) throw std::domain_error("compute_threshold: sdnr must be >= 0");
  if (sdnr == 0.0) return kInf;
  if (q == 1.0 || std::isinf(sdnr)) return -kInf;
  return d0 * (1.0 + q / sdnr) *
         std::log((1.0 + sdnr / q) * ((1.0 - q) / q) * cost_ratio);
}

double compute_threshold_hw_form(double d0, double sdnr, std::size_t q_m,
                                 std::size_t m, double cost_ratio) {
  check_threshold_args(d0, cost_ratio);
  if (q_m < 1 || q_m > m)
    throw std::domain_error("compute_threshold_hw_form: q_m must be in [1, M]");
  if (sdnr < 0.0)
    throw std::domain_error("compute_threshold_hw_form: sdnr must be >= 0");
  if (sdnr == 0.0) return kInf;
  if (q_m == m || std::isinf(sdnr)) return -kInf;
  const double md = static_cast<double>(m);
  const double qm = static_cast<double>(q_m);
  const double log_sum = std::log(1.0 + md * sdnr / qm) + std::log(md - qm) -
                         std::log(qm) + std::log(cost_ratio);
  return d0 * (1.0 + qm / (md * sdnr)) * log_sum;
}

DenoiseResult denoise(const BeamspaceVector& hbar, double eta, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::domain_error("denoise: alpha must be in (0, 1]");
  const std::size_t m = hbar.size();
  const std::vector<double> p = magnitudes_squared(hbar);
  DenoiseResult res;
  res.eta = eta;
  res.denoised = BeamspaceVector(m);
  res.decisions.resize(m);
  kernels::hard_threshold_scale(hbar.v.data(), p.data(), eta, 1.0 / alpha,
                                res.denoised.v.data(), res.decisions.data(), m);
  return res;
}

DenoiseResult denoise_beamspace(const BeamspaceVector& hbar,
                                const DenoiserParams& params, double alpha,
                                std::optional<double> known_d0,
                                EstimationReport* report) {
  params.validate();
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::domain_error("denoise_beamspace: alpha must be in (0, 1]");
  const std::size_t m = hbar.size();
  if (m == 0) throw std::invalid_argument("denoise_beamspace: empty input");

  const std::vector<double> p = magnitudes_squared(hbar);

  EstimationReport rep;
  if (known_d0) {
    if (*known_d0 < 0.0)
      throw std::domain_error("denoise_beamspace: known_d0 must be >= 0");
    rep.blind = false;
    rep.noise.trajectory = {*known_d0};
    rep.d0 = *known_d0;
  } else {
    rep.blind = true;
    rep.noise = estimate_noise_power(p, params);
    rep.d0 = rep.noise.final_estimate();
  }

  rep.channel_power = estimate_channel_power(p, rep.d0);
  rep.sdnr = estimate_sdnr(p, rep.d0);

  if (rep.d0 > 0.0 && std::isfinite(rep.sdnr)) {
    rep.activity = estimate_activity(p, rep.d0, rep.sdnr);
    rep.eta = compute_threshold(rep.d0, rep.sdnr, rep.activity.q_hat,
                                params.cost_ratio);
  } else {
    // noise-free estimate (d0 == 0): every nonzero entry is signal; keep all
    rep.activity = ActivityEstimate{1.0, m, false};
    rep.eta = -std::numeric_limits<double>::infinity();
  }

  DenoiseResult res;
  res.eta = rep.eta;
  res.denoised = BeamspaceVector(m);
  res.decisions.resize(m);
  kernels::hard_threshold_scale(hbar.v.data(), p.data(), rep.eta, 1.0 / alpha,
                                res.denoised.v.data(), res.decisions.data(), m);
  if (report) {
    rep.decisions = res.decisions;
    *report = std::move(rep);
  }
  return res;
}

std::pair<ChannelVector, EstimationReport> denoise_pipeline(
    const ChannelVector& h_obs, const DenoiserParams& params, double alpha,
    std::optional<double> known_d0) {
  const BeamspaceVector hbar = to_beamspace(h_obs);
  EstimationReport report;
  DenoiseResult res = denoise_beamspace(hbar, params, alpha, known_d0, &report);
  return {from_beamspace(res.denoised), std::move(report)};
}

}  // namespace bcd
