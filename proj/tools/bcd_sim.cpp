// Monte-Carlo driver for the beamspace channel denoiser: MSE and BER sweeps,
// the runtime scaling benchmark, and a single-shot denoise with a full
// estimation report.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bcd/beamspace.hpp"
#include "bcd/chanmodel.hpp"
#include "bcd/denoiser.hpp"
#include "bcd/fixedpoint.hpp"
#include "bcd/quantizer.hpp"
#include "bcd/sim.hpp"

namespace {

struct CommonOpts {
  bcd::SimConfig cfg;
  std::string estimators;
  std::string channel = "geometric";
  std::string params;
  std::string out;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--m", o.cfg.m, "antenna count");
  sub->add_option("--k", o.cfg.k, "user count");
  sub->add_option("--bits", o.cfg.bits,
                  "ADC resolutions (1..8, 0 = infinite)")
      ->delimiter(',');
  sub->add_option("--snr-start", o.cfg.snr_start, "SNR grid start (dB)");
  sub->add_option("--snr-stop", o.cfg.snr_stop, "SNR grid stop (dB)");
  sub->add_option("--snr-step", o.cfg.snr_step, "SNR grid step (dB)");
  sub->add_option("--trials", o.cfg.trials, "Monte-Carlo trials");
  sub->add_option("--seed", o.cfg.seed, "RNG seed");
  sub->add_option("--estimators", o.estimators,
                  "comma list: proposed-blind,proposed-known-d0,ls,diag-lmmse,"
                  "perfect-csi");
  sub->add_option("--channel", o.channel, "geometric | bernoulli-gaussian");
  sub->add_option("--paths", o.cfg.paths, "geometric model path count");
  sub->add_option("--bg-q", o.cfg.bg_activity, "bernoulli-gaussian activity rate");
  sub->add_option("--bg-power", o.cfg.bg_power, "bernoulli-gaussian channel power");
  sub->add_flag("--known-noise", o.cfg.known_noise,
                "use the known-D0 (reduced) denoiser path");
  sub->add_flag("--fixed-point", o.cfg.fixed_point,
                "route the proposed estimator through the fixed-point datapath");
  sub->add_option("--data-blocks", o.cfg.data_blocks,
                  "16-QAM symbol vectors per BER trial");
  sub->add_option("--params", o.params,
                  "denoiser parameters, e.g. C=4,c=2,cprime=4,rho-min=8,T=3");
  sub->add_option("--out", o.out, "CSV output path (default: stdout)");
  sub->set_config("--config", "", "key = value config file (flags override)");
}

void parse_params(const std::string& spec, bcd::DenoiserParams& p) {
  if (spec.empty()) return;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--params", "expected key=value: " + item);
    const std::string key = item.substr(0, eq);
    const double val = std::stod(item.substr(eq + 1));
    if (key == "C") p.cost_ratio = val;
    else if (key == "c") p.conf = val;
    else if (key == "cprime") p.conf_wide = val;
    else if (key == "rho-min") p.rho_min = static_cast<std::size_t>(val);
    else if (key == "T") p.iters = static_cast<std::size_t>(val);
    else if (key == "strict-kappa") p.strict_paper_kappa = val != 0.0;
    else throw CLI::ValidationError("--params", "unknown key: " + key);
  }
}

void finalize(CommonOpts& o) {
  parse_params(o.params, o.cfg.params);
  if (o.channel == "geometric") o.cfg.channel = bcd::ChannelModel::geometric;
  else if (o.channel == "bernoulli-gaussian")
    o.cfg.channel = bcd::ChannelModel::bernoulli_gaussian;
  else throw CLI::ValidationError("--channel", "unknown model: " + o.channel);
  if (!o.estimators.empty()) {
    o.cfg.estimators.clear();
    std::stringstream ss(o.estimators);
    std::string name;
    while (std::getline(ss, name, ',')) {
      const auto est = bcd::parse_estimator(name);
      if (!est)
        throw CLI::ValidationError("--estimators", "unknown estimator: " + name);
      o.cfg.estimators.push_back(*est);
    }
  }
  if (o.cfg.known_noise) {
    for (auto& e : o.cfg.estimators)
      if (e == bcd::Estimator::proposed_blind)
        e = bcd::Estimator::proposed_known_d0;
  }
}

void emit(const std::string& path, const std::vector<bcd::ResultRow>& rows) {
  if (path.empty()) {
    bcd::write_csv(std::cout, rows);
    return;
  }
  std::ofstream f(path, std::ios::binary);  // keep LF endings everywhere
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  bcd::write_csv(f, rows);
}

int run_denoise_one(CommonOpts& o, double snr_db, const std::string& dump_dir) {
  const int bits = o.cfg.bits.empty() ? 3 : o.cfg.bits.front();
  const bcd::QuantizerModel qm =
      bits == 0 ? bcd::infinite_quantizer() : bcd::build_lloyd_max(bits);
  const double alpha = bcd::alpha_for(qm);
  const double e0 = std::pow(10.0, -snr_db / 10.0);

  bcd::Rng rng = bcd::Rng::substream(o.cfg.seed, 0);
  bcd::ChannelVector h;
  if (o.cfg.channel == bcd::ChannelModel::geometric) {
    h = bcd::generate_geometric_channel(
        bcd::random_geometric_config(o.cfg.m, o.cfg.paths, rng));
  } else {
    h = bcd::from_beamspace(bcd::generate_bg_beamspace_channel(
        {o.cfg.m, o.cfg.bg_activity, o.cfg.bg_power}, rng));
  }
  const bcd::ChannelVector h_obs = bcd::observe(bcd::add_awgn(h, e0, rng), qm);

  const double p_h = bcd::norm_squared(h) / static_cast<double>(o.cfg.m);
  std::optional<double> kd0;
  if (o.cfg.known_noise) kd0 = bcd::composite_noise_variance(alpha, e0, p_h);

  bcd::ChannelVector h_hat;
  bcd::EstimationReport report;
  if (o.cfg.fixed_point) {
    bcd::fx::FxPipelineResult r =
        bcd::fx::fx_denoise_pipeline(h_obs, alpha, o.cfg.params, kd0);
    h_hat = r.denoised;
    report = r.report;
    std::printf("fixed-point: beam_exp=%d power_exp=%d q_m=%zu saturations=%llu\n",
                r.beam_exp, r.power_exp, r.q_m,
                static_cast<unsigned long long>(r.saturations));
    if (!dump_dir.empty()) {
      namespace fs = std::filesystem;
      fs::create_directories(dump_dir);
      auto dump = [&](const char* name, std::span<const bcd::fx::FxValue> v) {
        std::ofstream f(fs::path(dump_dir) / name, std::ios::binary);
        bcd::fx::dump_hex(f, v);
      };
      // stimulus: beamspace mantissas and squared magnitudes;
      // response: threshold, noise estimate, denoised mantissas
      dump("beamspace_re.hex", r.beam_re);
      dump("beamspace_im.hex", r.beam_im);
      dump("magsq.hex", r.p);
      dump("out_re.hex", r.out_re);
      dump("out_im.hex", r.out_im);
      dump("eta.hex", std::span(&r.eta_fx, 1));
      dump("d0.hex", std::span(&r.d0_fx, 1));
      std::printf("hex dump written to %s\n", dump_dir.c_str());
    }
  } else {
    auto [out, rep] = bcd::denoise_pipeline(h_obs, o.cfg.params, alpha, kd0);
    h_hat = std::move(out);
    report = std::move(rep);
  }

  double err = 0.0, err_ls = 0.0;
  for (std::size_t i = 0; i < o.cfg.m; ++i) {
    err += std::norm(h_hat[i] - h[i]);
    err_ls += std::norm(h_obs[i] - h[i]);
  }
  const double ref = bcd::norm_squared(h);

  std::printf("bits=%d snr=%.2f dB alpha=%.6f M=%zu\n", bits, snr_db, alpha,
              o.cfg.m);
  std::printf("D0-hat trajectory:");
  for (double d : report.noise.trajectory) std::printf(" %.6g", d);
  std::printf("\nP-hat=%.6g SDNR-hat=%.6g q-hat=%.4f (q_m=%zu) eta=%.6g\n",
              report.channel_power, report.sdnr, report.activity.q_hat,
              report.activity.q_m, report.eta);
  std::size_t kept = 0;
  for (auto d : report.decisions) kept += d;
  std::printf("decisions: %zu of %zu kept\n", kept, report.decisions.size());
  std::printf("MSE denoised: %.4f dB   MSE observation (LS): %.4f dB\n",
              10.0 * std::log10(err / ref), 10.0 * std::log10(err_ls / ref));

  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + o.out);
    f << bcd::report_csv_header(report.noise.trajectory.size());
    f << bcd::report_csv_row(0, snr_db, bits, report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beamspace channel denoiser simulator"};
  app.require_subcommand(1);

  CommonOpts mse_opts, ber_opts, scaling_opts, one_opts;

  CLI::App* mse = app.add_subcommand("mse", "channel estimation MSE vs SNR");
  add_common(mse, mse_opts);

  CLI::App* ber = app.add_subcommand("ber", "post-equalization uncoded BER vs SNR");
  add_common(ber, ber_opts);

  CLI::App* scaling =
      app.add_subcommand("scaling", "denoiser runtime scaling benchmark");
  std::vector<std::size_t> scaling_ms = {256, 512, 1024, 2048, 4096};
  std::size_t scaling_reps = 512;
  scaling->add_option("--m-list", scaling_ms, "antenna counts (powers of two)")
      ->delimiter(',');
  scaling->add_option("--reps", scaling_reps, "repetitions per timing");
  add_common(scaling, scaling_opts);

  CLI::App* one = app.add_subcommand("denoise-one", "denoise a single draw");
  double one_snr = 10.0;
  std::string dump_dir;
  one->add_option("--snr", one_snr, "SNR (dB)");
  one->add_option("--dump-hex", dump_dir,
                  "directory for fixed-point stimulus/response hex dump");
  add_common(one, one_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (mse->parsed()) {
      finalize(mse_opts);
      emit(mse_opts.out, bcd::run_mse_experiment(mse_opts.cfg));
    } else if (ber->parsed()) {
      finalize(ber_opts);
      emit(ber_opts.out, bcd::run_ber_experiment(ber_opts.cfg));
    } else if (scaling->parsed()) {
      finalize(scaling_opts);
      emit(scaling_opts.out,
           bcd::run_scaling_benchmark(scaling_ms, scaling_reps,
                                      scaling_opts.cfg.params,
                                      scaling_opts.cfg.seed));
    } else if (one->parsed()) {
      finalize(one_opts);
      return run_denoise_one(one_opts, one_snr, dump_dir);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
