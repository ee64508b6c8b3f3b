#include "bcd/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "bcd/beamspace.hpp"
#include "bcd/chanmodel.hpp"
#include "bcd/denoiser.hpp"
#include "bcd/fixedpoint.hpp"

namespace bcd {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

ResultRow::ResultRow()
    : mse_linear(kNan), mse_db(kNan), ber(kNan), seconds_per_vector(kNan) {}

const char* estimator_name(Estimator est) {
  switch (est) {
    case Estimator::proposed_blind: return "proposed-blind";
    case Estimator::proposed_known_d0: return "proposed-known-d0";
    case Estimator::ls: return "ls";
    case Estimator::diag_lmmse: return "diag-lmmse";
    case Estimator::perfect_csi: return "perfect-csi";
  }
  return "?";
}

std::optional<Estimator> parse_estimator(std::string_view name) {
  for (Estimator e : {Estimator::proposed_blind, Estimator::proposed_known_d0,
                      Estimator::ls, Estimator::diag_lmmse, Estimator::perfect_csi})
    if (name == estimator_name(e)) return e;
  return std::nullopt;
}

std::vector<double> SimConfig::snr_grid() const {
  std::vector<double> grid;
  if (!(snr_step > 0.0)) {
    grid.push_back(snr_start);
    return grid;
  }
  for (double s = snr_start; s <= snr_stop + 1e-9; s += snr_step) grid.push_back(s);
  return grid;
}

void SimConfig::validate() const {
  if (m < 2) throw std::invalid_argument("SimConfig: M >= 2 required");
  if (k < 1 || k > m) throw std::invalid_argument("SimConfig: need 1 <= K <= M");
  if (trials < 1) throw std::invalid_argument("SimConfig: trials >= 1 required");
  if (bits.empty()) throw std::invalid_argument("SimConfig: empty bits list");
  for (int b : bits)
    if (b != 0 && (b < 1 || b > 8))
      throw std::invalid_argument("SimConfig: bits must be 1..8 or 0 (infinite)");
  if (snr_grid().empty()) throw std::invalid_argument("SimConfig: empty SNR grid");
  if (estimators.empty()) throw std::invalid_argument("SimConfig: no estimators");
  if (data_blocks < 1) throw std::invalid_argument("SimConfig: data_blocks >= 1");
  params.validate();
}

ChannelVector ls_estimate(const ChannelVector& h_obs) { return h_obs; }

BeamspaceVector diag_lmmse_estimate(const BeamspaceVector& hbar_obs, double alpha,
                                    double p_hat, double d0) {
  if (p_hat < 0.0 || d0 < 0.0)
    throw std::domain_error("diag_lmmse_estimate: negative parameter");
  const double den = alpha * alpha * p_hat + d0;
  const double scale = (p_hat == 0.0) ? 0.0
                       : (den > 0.0)  ? alpha * p_hat / den
                                      : 1.0 / alpha;
  BeamspaceVector out(hbar_obs.size());
  for (std::size_t i = 0; i < hbar_obs.size(); ++i) out[i] = scale * hbar_obs[i];
  return out;
}

ChannelVector observe(const ChannelVector& analog, const QuantizerModel& qm) {
  if (qm.infinite()) return analog;
  const double sigma = ideal_agc_sigma(analog);
  if (sigma == 0.0) return analog;
  return quantize(analog, qm.with_input_scale(sigma));
}

namespace {

ChannelVector draw_channel(const SimConfig& cfg, Rng& rng) {
  if (cfg.channel == ChannelModel::geometric) {
    return generate_geometric_channel(random_geometric_config(cfg.m, cfg.paths, rng));
  }
  BernoulliGaussianConfig bg{cfg.m, cfg.bg_activity, cfg.bg_power};
  return from_beamspace(generate_bg_beamspace_channel(bg, rng));
}

struct TrialContext {
  const SimConfig& cfg;
  double alpha;
  double e0;
};

ChannelVector run_estimator(Estimator est, const TrialContext& ctx,
                            const ChannelVector& h_true,
                            const ChannelVector& h_obs) {
  const double p_h = norm_squared(h_true) / static_cast<double>(h_true.size());
  const double d0_true = composite_noise_variance(ctx.alpha, ctx.e0, p_h);
  switch (est) {
    case Estimator::ls:
      return ls_estimate(h_obs);
    case Estimator::perfect_csi:
      return h_true;
    case Estimator::diag_lmmse:
      return from_beamspace(
          diag_lmmse_estimate(to_beamspace(h_obs), ctx.alpha, p_h, d0_true));
    case Estimator::proposed_blind:
    case Estimator::proposed_known_d0: {
      const bool known =
          est == Estimator::proposed_known_d0 || ctx.cfg.known_noise;
      std::optional<double> kd0;
      if (known) kd0 = d0_true;
      if (ctx.cfg.fixed_point)
        return fx::fx_denoise_pipeline(h_obs, ctx.alpha, ctx.cfg.params, kd0)
            .denoised;
      return denoise_pipeline(h_obs, ctx.cfg.params, ctx.alpha, kd0).first;
    }
  }
  throw std::logic_error("run_estimator: unknown estimator");
}

double db10(double x) { return 10.0 * std::log10(x); }

}  // namespace

std::vector<ResultRow> run_mse_experiment(const SimConfig& cfg) {
  cfg.validate();
  const std::vector<double> grid = cfg.snr_grid();
  std::vector<ResultRow> rows;

  for (std::size_t bi = 0; bi < cfg.bits.size(); ++bi) {
    const int bits = cfg.bits[bi];
    const QuantizerModel qm =
        bits == 0 ? infinite_quantizer() : build_lloyd_max(bits);
    const double alpha = alpha_for(qm);

    for (std::size_t si = 0; si < grid.size(); ++si) {
      const double snr_db = grid[si];
      const double e0 = std::pow(10.0, -snr_db / 10.0);
      TrialContext ctx{cfg, alpha, e0};

      std::vector<double> err(cfg.estimators.size(), 0.0);
      std::vector<double> ref(cfg.estimators.size(), 0.0);

      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const std::uint64_t idx = (bi * grid.size() + si) * cfg.trials + t;
        Rng rng = Rng::substream(cfg.seed, idx);
        const ChannelVector h = draw_channel(cfg, rng);
        const ChannelVector analog = add_awgn(h, e0, rng);
        const ChannelVector h_obs = observe(analog, qm);
        const double h_energy = norm_squared(h);
        for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
          const ChannelVector h_hat =
              run_estimator(cfg.estimators[ei], ctx, h, h_obs);
          double e = 0.0;
          for (std::size_t i = 0; i < cfg.m; ++i) e += std::norm(h_hat[i] - h[i]);
          err[ei] += e;
          ref[ei] += h_energy;
        }
      }

      for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
        ResultRow row;
        row.estimator = estimator_name(cfg.estimators[ei]);
        row.bits = bits;
        row.snr_db = snr_db;
        row.mse_linear = ref[ei] > 0.0 ? err[ei] / ref[ei] : 0.0;
        row.mse_db = row.mse_linear > 0.0
                         ? db10(row.mse_linear)
                         : -std::numeric_limits<double>::infinity();
        row.trials = cfg.trials;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_ber_experiment(const SimConfig& cfg) {
  cfg.validate();
  const std::vector<double> grid = cfg.snr_grid();

  // perfect CSI is always benchmarked
  std::vector<Estimator> ests = cfg.estimators;
  if (std::find(ests.begin(), ests.end(), Estimator::perfect_csi) == ests.end())
    ests.push_back(Estimator::perfect_csi);

  std::vector<ResultRow> rows;
  for (std::size_t bi = 0; bi < cfg.bits.size(); ++bi) {
    const int bits = cfg.bits[bi];
    const QuantizerModel qm =
        bits == 0 ? infinite_quantizer() : build_lloyd_max(bits);
    const double alpha = alpha_for(qm);

    for (std::size_t si = 0; si < grid.size(); ++si) {
      const double snr_db = grid[si];
      const double n0 = std::pow(10.0, -snr_db / 10.0);
      TrialContext ctx{cfg, alpha, n0};

      std::vector<std::uint64_t> bit_errs(ests.size(), 0);
      std::vector<std::uint64_t> bit_total(ests.size(), 0);
      std::vector<std::uint64_t> flagged(ests.size(), 0);
      std::vector<double> err(ests.size(), 0.0), ref(ests.size(), 0.0);

      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const std::uint64_t idx = (bi * grid.size() + si) * cfg.trials + t;
        Rng rng = Rng::substream(cfg.seed, idx);

        std::vector<ChannelVector> h_cols;
        h_cols.reserve(cfg.k);
        ChannelMatrix h_mat(cfg.m, cfg.k);
        for (std::size_t u = 0; u < cfg.k; ++u) {
          h_cols.push_back(draw_channel(cfg, rng));
          h_mat.set_column(u, h_cols.back());
        }

        // per-user pilot phase: the observation is Q(h + e)
        std::vector<ChannelMatrix> h_hats(ests.size(), ChannelMatrix(cfg.m, cfg.k));
        for (std::size_t u = 0; u < cfg.k; ++u) {
          const ChannelVector analog = add_awgn(h_cols[u], n0, rng);
          const ChannelVector h_obs = observe(analog, qm);
          const double h_energy = norm_squared(h_cols[u]);
          for (std::size_t ei = 0; ei < ests.size(); ++ei) {
            const ChannelVector h_hat =
                run_estimator(ests[ei], ctx, h_cols[u], h_obs);
            double e = 0.0;
            for (std::size_t i = 0; i < cfg.m; ++i)
              e += std::norm(h_hat[i] - h_cols[u][i]);
            err[ei] += e;
            ref[ei] += h_energy;
            h_hats[ei].set_column(u, h_hat);
          }
        }

        std::vector<LmmseFilter> filters;
        filters.reserve(ests.size());
        for (std::size_t ei = 0; ei < ests.size(); ++ei)
          filters.push_back(lmmse_prepare(h_hats[ei], 1.0 / n0));

        // quantized uplink data phase, shared across estimators
        for (std::size_t blk = 0; blk < cfg.data_blocks; ++blk) {
          std::vector<unsigned> syms(cfg.k);
          std::vector<cplx> x(cfg.k);
          for (std::size_t u = 0; u < cfg.k; ++u) {
            syms[u] = static_cast<unsigned>(rng.next_u64() & 15u);
            x[u] = qam16_modulate(syms[u]);
          }
          ChannelVector analog_y(cfg.m);
          for (std::size_t i = 0; i < cfg.m; ++i) {
            cplx acc(0.0, 0.0);
            for (std::size_t u = 0; u < cfg.k; ++u) acc += h_mat.at(i, u) * x[u];
            analog_y[i] = acc + rng.cnormal(n0);
          }
          const ChannelVector y = observe(analog_y, qm);

          for (std::size_t ei = 0; ei < ests.size(); ++ei) {
            if (filters[ei].singular) {
              ++flagged[ei];
              continue;
            }
            const std::vector<cplx> x_hat = lmmse_apply(filters[ei], y.v);
            for (std::size_t u = 0; u < cfg.k; ++u) {
              bit_errs[ei] += qam16_bit_errors(syms[u], qam16_demodulate(x_hat[u]));
              bit_total[ei] += 4;
            }
          }
        }
      }

      for (std::size_t ei = 0; ei < ests.size(); ++ei) {
        ResultRow row;
        row.estimator = estimator_name(ests[ei]);
        row.bits = bits;
        row.snr_db = snr_db;
        row.mse_linear = ref[ei] > 0.0 ? err[ei] / ref[ei] : 0.0;
        row.mse_db = row.mse_linear > 0.0
                         ? db10(row.mse_linear)
                         : -std::numeric_limits<double>::infinity();
        row.ber = bit_total[ei] > 0
                      ? static_cast<double>(bit_errs[ei]) /
                            static_cast<double>(bit_total[ei])
                      : kNan;
        row.trials = cfg.trials;
        rows.push_back(std::move(row));
        if (flagged[ei] > 0)
          std::fprintf(stderr,
                       "ber: %zu singular equalizer blocks flagged and excluded "
                       "(%s, %d bits, %.3g dB)\n",
                       static_cast<std::size_t>(flagged[ei]), row.estimator.c_str(),
                       bits, snr_db);
      }
    }
  }
  return rows;
}

namespace {

// median per-vector seconds over `batches` timed batches
template <typename F>
double time_per_call(F&& fn, std::size_t reps) {
  const std::size_t batches = 9;
  const std::size_t per_batch = std::max<std::size_t>(1, reps / batches);
  std::vector<double> times;
  times.reserve(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < per_batch; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count() /
                    static_cast<double>(per_batch));
  }
  std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
  return times[times.size() / 2];
}

}  // namespace

std::vector<ResultRow> run_scaling_benchmark(const std::vector<std::size_t>& ms,
                                             std::size_t reps,
                                             const DenoiserParams& params,
                                             std::uint64_t seed) {
  params.validate();
  const QuantizerModel qm = build_lloyd_max(3);
  const double alpha = alpha_for(qm);
  const double snr_db = 10.0;
  const double e0 = std::pow(10.0, -snr_db / 10.0);

  std::vector<ResultRow> rows;
  double sink = 0.0;
  for (std::size_t mi = 0; mi < ms.size(); ++mi) {
    const std::size_t m = ms[mi];
    Rng rng = Rng::substream(seed, mi);
    const ChannelVector h =
        generate_geometric_channel(random_geometric_config(m, 3, rng));
    const ChannelVector h_obs = observe(add_awgn(h, e0, rng), qm);
    const BeamspaceVector hbar = to_beamspace(h_obs);
    const double d0 =
        composite_noise_variance(alpha, e0, norm_squared(h) / double(m));

    struct Mode {
      const char* name;
      bool post_only;
      std::optional<double> known;
    };
    const Mode modes[] = {
        {"blind-post", true, std::nullopt},
        {"known-post", true, d0},
        {"blind-full", false, std::nullopt},
        {"known-full", false, d0},
    };
    for (const Mode& mode : modes) {
      const double sec = time_per_call(
          [&] {
            if (mode.post_only) {
              DenoiseResult r = denoise_beamspace(hbar, params, alpha, mode.known);
              sink += r.eta + static_cast<double>(r.decisions[0]);
            } else {
              auto [out, rep] = denoise_pipeline(h_obs, params, alpha, mode.known);
              sink += out[0].real() + rep.eta;
            }
          },
          reps);
      ResultRow row;
      char name[64];
      std::snprintf(name, sizeof name, "%s-m%zu", mode.name, m);
      row.estimator = name;
      row.bits = 3;
      row.snr_db = snr_db;
      row.trials = reps;
      row.seconds_per_vector = sec;
      rows.push_back(std::move(row));
    }
  }
  if (sink == 42.424242) std::fprintf(stderr, "%f\n", sink);  // defeat DCE
  return rows;
}

std::string csv_header() {
  return "estimator,bits,snr_db,mse_linear,mse_db,ber,trials,seconds_per_vector\n";
}

namespace {

void append_double(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  s += buf;
}

}  // namespace

void write_csv(std::ostream& os, std::span<const ResultRow> rows) {
  os << csv_header();
  for (const ResultRow& r : rows) {
    std::string line = r.estimator;
    line += ',';
    if (r.bits == 0) line += "inf";
    else line += std::to_string(r.bits);
    line += ',';
    append_double(line, r.snr_db);
    line += ',';
    append_double(line, r.mse_linear);
    line += ',';
    append_double(line, r.mse_db);
    line += ',';
    append_double(line, r.ber);
    line += ',';
    line += std::to_string(r.trials);
    line += ',';
    append_double(line, r.seconds_per_vector);
    line += '\n';
    os << line;
  }
}

}  // namespace bcd
