#include "bcd/chanmodel.hpp"

#include <cmath>
#include <stdexcept>

namespace bcd {

namespace {

bool phi_in_range(double phi) { return phi >= -0.5 && phi < 0.5; }

}  // namespace

void SteeringConfig::validate() const {
  if (m < 2) throw std::invalid_argument("SteeringConfig: M >= 2 required");
  if (spatial_freqs.empty() || spatial_freqs.size() != gains.size())
    throw std::invalid_argument("SteeringConfig: need L >= 1 paths with matching gains");
  for (double phi : spatial_freqs)
    if (!phi_in_range(phi))
      throw std::domain_error("SteeringConfig: spatial frequency outside [-1/2, 1/2)");
}

void BernoulliGaussianConfig::validate() const {
  if (m < 1) throw std::invalid_argument("BernoulliGaussianConfig: M >= 1 required");
  if (!(activity > 0.0) || activity > 1.0)
    throw std::domain_error("BernoulliGaussianConfig: q must be in (0, 1]");
  if (!(avg_power > 0.0) || !std::isfinite(avg_power))
    throw std::domain_error("BernoulliGaussianConfig: avg_power must be finite positive");
  if (std::llround(activity * static_cast<double>(m)) < 1)
    throw std::domain_error("BernoulliGaussianConfig: q*M rounds below 1");
}

ChannelVector steering_vector(double phi, std::size_t m) {
  if (m < 1) throw std::domain_error("steering_vector: M >= 1 required");
  if (!phi_in_range(phi))
    throw std::domain_error("steering_vector: phi outside [-1/2, 1/2)");
  ChannelVector a(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double ang = -2.0 * M_PI * static_cast<double>(i) * phi;
    a[i] = cplx(std::cos(ang), std::sin(ang));
  }
  return a;
}

ChannelVector generate_geometric_channel(const SteeringConfig& cfg) {
  cfg.validate();
  ChannelVector h(cfg.m);
  for (std::size_t l = 0; l < cfg.paths(); ++l) {
    const ChannelVector a = steering_vector(cfg.spatial_freqs[l], cfg.m);
    for (std::size_t i = 0; i < cfg.m; ++i) h[i] += cfg.gains[l] * a[i];
  }
  return h;
}

BeamspaceVector generate_bg_beamspace_channel(const BernoulliGaussianConfig& cfg,
                                              Rng& rng) {
  cfg.validate();
  const double active_var = cfg.avg_power / cfg.activity;
  BeamspaceVector hbar(cfg.m);
  for (std::size_t i = 0; i < cfg.m; ++i) {
    const double u = rng.uniform();
    hbar[i] = (u < cfg.activity) ? rng.cnormal(active_var) : cplx(0.0, 0.0);
  }
  return hbar;
}

ChannelVector add_awgn(const ChannelVector& h, double n0, Rng& rng) {
  if (n0 < 0.0) throw std::domain_error("add_awgn: N0 must be nonnegative");
  if (n0 == 0.0) return h;
  ChannelVector out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = h[i] + rng.cnormal(n0);
  return out;
}

SteeringConfig random_geometric_config(std::size_t m, std::size_t paths, Rng& rng) {
  if (paths < 1) throw std::invalid_argument("random_geometric_config: paths >= 1");
  SteeringConfig cfg;
  cfg.m = m;
  double total = 0.0;
  for (std::size_t l = 0; l < paths; ++l) total += std::pow(0.5, static_cast<double>(l));
  for (std::size_t l = 0; l < paths; ++l) {
    const double var = std::pow(0.5, static_cast<double>(l)) / total;
    cfg.spatial_freqs.push_back(rng.uniform() - 0.5);
    cfg.gains.push_back(rng.cnormal(var));
  }
  return cfg;
}

}  // namespace bcd
