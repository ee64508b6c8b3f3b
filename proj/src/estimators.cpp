#include "bcd/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace bcd {

void DenoiserParams::validate() const {
  if (!(cost_ratio > 0.0)) throw std::domain_error("params: C must be positive");
  if (!(conf > 0.0)) throw std::domain_error("params: c must be positive");
  if (!(conf_wide > conf)) throw std::domain_error("params: c' must exceed c");
  if (iters < 1) throw std::domain_error("params: T >= 1 required");
}

std::size_t DenoiserParams::effective_rho_min(std::size_t m) const {
  std::size_t r = rho_min != 0 ? rho_min : std::max<std::size_t>(8, m / 8);
  return std::min(r, m);
}

double kappa(double k) {
  if (!(k > 0.0)) throw std::domain_error("kappa: k must be positive");
  const double ek = std::exp(-k);
  return (1.0 - ek * (1.0 + k)) / (1.0 - ek);
}

double mad_init(std::span<const double> p) {
  const std::size_t m = p.size();
  if (m == 0) throw std::invalid_argument("mad_init: empty input");
  std::vector<double> work(p.begin(), p.end());
  double median;
  if (m % 2 == 0) {
    // mean of the (M/2)-th and (M/2+1)-th order statistics
    std::nth_element(work.begin(), work.begin() + m / 2, work.end());
    const double upper = work[m / 2];
    const double lower = *std::max_element(work.begin(), work.begin() + m / 2);
    median = 0.5 * (lower + upper);
  } else {
    std::nth_element(work.begin(), work.begin() + m / 2, work.end());
    median = work[m / 2];
  }
  return median / M_LN2;
}

NoiseEstimate estimate_noise_power(std::span<const double> p,
                                   const DenoiserParams& params) {
  params.validate();
  const std::size_t m = p.size();
  const std::size_t rho_min = params.effective_rho_min(m);

  NoiseEstimate est;
  est.trajectory.reserve(params.iters + 1);
  est.trajectory.push_back(mad_init(p));

  for (std::size_t t = 0; t < params.iters; ++t) {
    const double prev = est.trajectory.back();

    auto truncated = [&](double conf) {
      const double tau = conf * prev;
      std::size_t count = 0;
      double sum = 0.0;
      for (double x : p) {
        if (x <= tau) {
          sum += x;
          ++count;
        }
      }
      return std::pair<std::size_t, double>(count, sum);
    };

    auto [count, sum] = truncated(params.conf);
    bool widened = false;
    if (count < rho_min) {
      std::tie(count, sum) = truncated(params.conf_wide);
      widened = true;
    }

    double next = 0.0;
    if (count > 0) {
      const double conf_used =
          (widened && !params.strict_paper_kappa) ? params.conf_wide : params.conf;
      next = (sum / static_cast<double>(count)) / kappa(conf_used);
    }
    est.trajectory.push_back(next);
    est.retained.push_back(count);
    est.widened.push_back(widened ? 1 : 0);
  }
  return est;
}

namespace {

double mean_of(std::span<const double> p) {
  if (p.empty()) throw std::invalid_argument("estimators: empty input");
  double s = 0.0;
  for (double x : p) s += x;
  return s / static_cast<double>(p.size());
}

}  // namespace

double estimate_channel_power(std::span<const double> p, double d0) {
  if (d0 < 0.0) throw std::domain_error("estimate_channel_power: d0 < 0");
  return std::max(mean_of(p) - d0, 0.0);
}

double estimate_sdnr(std::span<const double> p, double d0) {
  if (d0 < 0.0) throw std::domain_error("estimate_sdnr: d0 < 0");
  const double mean = mean_of(p);
  if (d0 == 0.0)
    return mean > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::max(mean / d0 - 1.0, 0.0);
}

ActivityEstimate estimate_activity(std::span<const double> p, double d0,
                                   double sdnr) {
  if (!(d0 > 0.0)) throw std::domain_error("estimate_activity: d0 must be positive");
  if (!(sdnr >= 0.0) || !std::isfinite(sdnr))
    throw std::domain_error("estimate_activity: sdnr must be finite nonnegative");
  const std::size_t m = p.size();
  if (m == 0) throw std::invalid_argument("estimate_activity: empty input");

  const double p_hat = sdnr * d0;
  // fourth moment accumulated in extended precision; the subtraction below is
  // cancellation-prone
  long double sum_sq = 0.0L;
  for (double x : p) sum_sq += static_cast<long double>(x) * x;
  const double md = static_cast<double>(m);
  const long double den = sum_sq - 2.0L * md * d0 * d0 - 4.0L * md * d0 * p_hat;

  ActivityEstimate out;
  if (!(den > 0.0L)) {
    out.q_m = m;
    out.q_hat = 1.0;
    out.degenerate = true;
    return out;
  }
  const long double num = 2.0L * md * md * p_hat * p_hat;
  const double ratio = static_cast<double>(num / den);
  long long qm = std::llround(ratio);
  qm = std::clamp(qm, 1ll, static_cast<long long>(m));
  out.q_m = static_cast<std::size_t>(qm);
  out.q_hat = static_cast<double>(out.q_m) / md;
  return out;
}

std::string report_csv_header(std::size_t trajectory_len) {
  std::string s = "trial,snr_db,bits";
  char buf[32];
  for (std::size_t i = 0; i < trajectory_len; ++i) {
    std::snprintf(buf, sizeof buf, ",d0_iter%zu", i);
    s += buf;
  }
  s += ",p_hat,sdnr_hat,q_hat,q_m,eta\n";
  return s;
}

std::string report_csv_row(std::size_t trial, double snr_db, int bits,
                           const EstimationReport& report) {
  char buf[192];
  std::string s;
  std::snprintf(buf, sizeof buf, "%zu,%.9g,", trial, snr_db);
  s += buf;
  if (bits == 0) s += "inf";
  else {
    std::snprintf(buf, sizeof buf, "%d", bits);
    s += buf;
  }
  for (double d : report.noise.trajectory) {
    std::snprintf(buf, sizeof buf, ",%.9g", d);
    s += buf;
  }
  std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g,%zu,%.9g\n", report.channel_power,
                report.sdnr, report.activity.q_hat, report.activity.q_m, report.eta);
  s += buf;
  return s;
}

}  // namespace bcd
