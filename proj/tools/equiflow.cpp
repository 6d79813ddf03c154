// equiflow command-line front end: demo generation, training, evaluation,
// sampling, and the numerical verification battery.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error,
// 3 numerical abort during training.

#include <cstdio>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "equiflow/config.hpp"
#include "equiflow/sampler.hpp"
#include "equiflow/toybench.hpp"
#include "equiflow/train.hpp"
#include "equiflow/verify.hpp"

using namespace equiflow;

namespace {

DemoDataset obtain_demos(const FlowConfig& cfg, const std::string& demo_path) {
  if (!demo_path.empty()) {
    DemoDataset d = DemoDataset::load(demo_path);
    if (d.env != cfg.env || d.order != cfg.order || d.steps != cfg.steps)
      throw std::invalid_argument(
          "dataset " + demo_path + " does not match the config (env/order/steps)");
    return d;
  }
  auto env = make_env(cfg.env, cfg.order);
  return make_demo_dataset(*env, cfg.n_demos, cfg.seed + 101, cfg.steps);
}

// Deterministic training loop shared by `train` and `sweep-lambda`.
std::unique_ptr<TrainableField> run_training(const FlowConfig& cfg,
                                             const DemoDataset& demos,
                                             const std::string& metrics_path,
                                             bool quiet) {
  auto net = build_field(cfg);
  AdamW opt;
  opt.lr = cfg.lr;
  opt.weight_decay = cfg.weight_decay;
  TrainOptions topt = cfg.train_options();
  Rng rng(cfg.seed + 202);

  std::unique_ptr<MetricsWriter> metrics;
  if (!metrics_path.empty())
    metrics = std::make_unique<MetricsWriter>(
        metrics_path,
        std::vector<std::string>{"step", "cfm", "fabo", "total"});

  for (int s = 0; s < cfg.train_steps; ++s) {
    FlowBatch batch = make_batch(demos, cfg.batch_size, cfg.dt, rng);
    LossReport rep;
    try {
      rep = train_step(*net, batch, opt, topt);
    } catch (const std::runtime_error& e) {
      std::fprintf(stderr, "numerical abort at step %d: %s\n", s, e.what());
      double tmin = 1e9, tmax = -1e9, xmax = 0.0;
      for (double tv : batch.t) {
        tmin = std::min(tmin, tv);
        tmax = std::max(tmax, tv);
      }
      for (double v : batch.x1) xmax = std::max(xmax, std::abs(v));
      std::fprintf(stderr,
                   "batch: size=%d t in [%g, %g] max|x1|=%g dt=%g\n",
                   batch.size, tmin, tmax, xmax, batch.dt);
      std::exit(3);
    }
    if (!quiet && (s % 200 == 0 || s + 1 == cfg.train_steps))
      std::printf("step %5d  cfm %.6f  fabo %.6f  total %.6f\n", s, rep.cfm,
                  rep.fabo, rep.total);
    if (metrics) metrics->row({(double)s, rep.cfm, rep.fabo, rep.total});
  }
  return net;
}

int cmd_verify(int n_samples) {
  // Gaussian-oracle battery: the one-step bound on a (t, dt) grid plus the
  // two-sided gap pinch.
  GaussianFlowOracle oracle({1.0, -0.5, 0.25}, {0.49, 1.0, 2.25});
  Rng rng(7);
  bool ok = true;
  std::printf("one-step velocity-change bound (marginal <= conditional):\n");
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double dtv : {0.1, 0.05, 0.025}) {
      FaboReport r = check_fabo_bound(oracle, t, dtv, n_samples, rng);
      std::printf(
          "  t=%.2f dt=%.3f  marginal %.5f  conditional %.5f  gap %.5f "
          "(pred %.5f)  %s\n",
          t, dtv, r.marginal, r.conditional, r.gap, r.predicted_gap,
          r.bound_holds ? "ok" : "VIOLATED");
      ok = ok && r.bound_holds;
    }
  SandwichReport s = check_error_sandwich(oracle, 0.3, 0.05, n_samples, rng);
  std::printf("gap/dt^2 pinch at t=0.30 dt=0.05: %.4f <= %.4f <= %.4f  %s\n",
              s.lower, s.value, s.upper, s.holds ? "ok" : "VIOLATED");
  ok = ok && s.holds;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equivariant flow-matching policies with acceleration regularization"};
  app.require_subcommand(1);

  std::string config_path, demo_path, ckpt_path, out_path, metrics_path;
  int episodes = 50;
  int nfe_override = 0;
  int n_samples = 200000;
  std::uint64_t sample_seed = 0;
  int n_chunks = 1;
  bool quiet = false;

  auto* gen = app.add_subcommand("gen-demos", "record expert demonstrations");
  gen->add_option("--config", config_path)->required();
  gen->add_option("--out", out_path, "dataset file")->required();

  auto* train = app.add_subcommand("train", "train a velocity field");
  train->add_option("--config", config_path)->required();
  train->add_option("--demos", demo_path, "dataset file (generated if absent)");
  train->add_option("--out", out_path, "checkpoint file")->required();
  train->add_option("--metrics", metrics_path, "CSV loss log");
  train->add_flag("--quiet", quiet);

  auto* eval = app.add_subcommand("eval", "closed-loop success rate");
  eval->add_option("--checkpoint", ckpt_path)->required();
  eval->add_option("--episodes", episodes);
  eval->add_option("--nfe", nfe_override, "override integration steps");

  auto* sample = app.add_subcommand("sample", "draw action chunks");
  sample->add_option("--checkpoint", ckpt_path)->required();
  sample->add_option("--seed", sample_seed);
  sample->add_option("--chunks", n_chunks);

  auto* verify = app.add_subcommand("verify", "numerical verification battery");
  verify->add_option("--samples", n_samples, "Monte-Carlo samples per check");

  auto* sweep = app.add_subcommand("sweep-lambda",
                                   "train across lambda schedules and report "
                                   "velocity smoothness");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--demos", demo_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      FlowConfig cfg = FlowConfig::from_file(config_path);
      auto env = make_env(cfg.env, cfg.order);
      DemoDataset d = make_demo_dataset(*env, cfg.n_demos, cfg.seed + 101,
                                        cfg.steps);
      d.save(out_path);
      std::printf("wrote %d pairs (%s, %d demos) to %s\n", d.count(),
                  cfg.env.c_str(), cfg.n_demos, out_path.c_str());
    } else if (train->parsed()) {
      FlowConfig cfg = FlowConfig::from_file(config_path);
      DemoDataset demos = obtain_demos(cfg, demo_path);
      auto net = run_training(cfg, demos, metrics_path, quiet);
      save_checkpoint(out_path, cfg, *net);
      std::printf("saved checkpoint %s (config hash %016llx, %d params)\n",
                  out_path.c_str(), (unsigned long long)cfg.hash(),
                  net->param_count());
    } else if (eval->parsed()) {
      Checkpoint ck = load_checkpoint(ckpt_path);
      const FlowConfig& cfg = ck.config;
      auto env = make_env(cfg.env, cfg.order);
      SamplerConfig scfg;
      scfg.nfe = nfe_override > 0 ? nfe_override : cfg.nfe;
      scfg.m_candidates = cfg.m_candidates;
      scfg.n = cfg.steps;
      scfg.n1 = cfg.exec_steps;
      scfg.reset_period = cfg.reset_period;
      const TrainableField* net = ck.net.get();
      int ad = env->action_dim();
      SuccessRate sr = success_rate(
          *env,
          [&](std::uint64_t seed) -> std::unique_ptr<Policy> {
            return std::make_unique<FlowPolicy>(*net, scfg, ad, seed);
          },
          cfg.exec_steps, episodes, cfg.seed + 303);
      std::printf("success rate %.3f +- %.3f over %d episodes (nfe %d)\n",
                  sr.rate, sr.stderr_, sr.episodes, scfg.nfe);
    } else if (sample->parsed()) {
      Checkpoint ck = load_checkpoint(ckpt_path);
      const FlowConfig& cfg = ck.config;
      auto env = make_env(cfg.env, cfg.order);
      Rng rng(sample_seed);
      std::vector<double> state(env->state_dim());
      env->reset(rng, state.data());
      std::vector<double> obs(env->obs_dim());
      std::vector<double> step_obs(env->obs_step_dim());
      env->observe(state.data(), 0, step_obs.data());
      for (int h = 0; h < env->obs_hist(); ++h)
        std::copy(step_obs.begin(), step_obs.end(),
                  obs.begin() + (size_t)h * env->obs_step_dim());
      SamplerConfig scfg;
      scfg.nfe = cfg.nfe;
      scfg.m_candidates = cfg.m_candidates;
      scfg.n = cfg.steps;
      scfg.n1 = cfg.exec_steps;
      scfg.reset_period = cfg.reset_period;
      RolloutState rs(sample_seed + 1);
      for (int c = 0; c < n_chunks; ++c) {
        PredictResult r = predict(*ck.net, obs.data(), rs, scfg,
                                  env->action_dim());
        std::printf("chunk %d (candidate %d, %s):", c, r.selected,
                    r.random_mode ? "random" : "overlap");
        for (double v : r.chunk) std::printf(" %.5f", v);
        std::printf("\n");
      }
    } else if (verify->parsed()) {
      return cmd_verify(n_samples);
    } else if (sweep->parsed()) {
      FlowConfig cfg = FlowConfig::from_file(config_path);
      DemoDataset demos = obtain_demos(cfg, demo_path);
      auto env = make_env(cfg.env, cfg.order);
      const char* schedules[] = {"quadratic:0.5", "quadratic:1", "quadratic:2",
                                 "constant:0.5", "constant:0"};
      for (const char* sched : schedules) {
        FlowConfig c = cfg;
        c.lambda = sched;
        auto net = run_training(c, demos, "", /*quiet=*/true);
        Rng rng(cfg.seed + 404);
        std::vector<double> obs(demos.obs.begin(),
                                demos.obs.begin() + demos.obs_dim);
        SmoothnessReport sm = smoothness_metric(*net, obs.data(), 32, rng);
        Rng brng(cfg.seed + 505);
        FlowBatch batch = make_batch(demos, 256, cfg.dt, brng);
        LossReport lr = eval_losses(*net, batch, c.train_options());
        std::printf(
            "lambda %-14s  cfm %.6f  fabo %.6f  velocity-change mean %.6f "
            "std %.6f\n",
            sched, lr.cfm, lr.fabo, sm.mean, sm.stddev);
      }
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
