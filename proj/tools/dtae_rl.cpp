#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "dtae/checkpoint.hpp"
#include "dtae/config.hpp"
#include "dtae/errors.hpp"
#include "dtae/experiment.hpp"
#include "dtae/theory.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitCheck = 3;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seeds;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "runs";
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "key=value config file");
  cmd->add_option("--set", opts.overrides, "override key=value (repeatable)");
  cmd->add_option("--seeds", opts.seeds, "seed range N..M (inclusive)");
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&opts](const std::uint64_t& s) {
        opts.seed = s;
        opts.seed_given = true;
      },
      "single seed");
  cmd->add_option("--out", opts.out, "output directory");
}

dtae::TrainConfig build_config(const CommonOptions& opts) {
  dtae::TrainConfig cfg = opts.config_path.empty() ? dtae::TrainConfig{} : dtae::load_config_file(opts.config_path);
  for (const auto& o : opts.overrides) dtae::apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

std::vector<std::uint64_t> build_seeds(const CommonOptions& opts, const dtae::TrainConfig& cfg) {
  if (!opts.seeds.empty()) return dtae::parse_seed_range(opts.seeds);
  if (opts.seed_given) return {opts.seed};
  return {cfg.seed};
}

double mean_final(const dtae::RunManifest& m) {
  if (m.final_returns.empty()) return std::nan("");
  return std::accumulate(m.final_returns.begin(), m.final_returns.end(), 0.0) /
         static_cast<double>(m.final_returns.size());
}

void report(const dtae::RunManifest& m) {
  std::printf("%-12s final mean return %.6g over %zu seed(s)  [%s]\n", m.label.c_str(), mean_final(m), m.seeds.size(),
              m.dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft policy optimization with a dual-track advantage estimator"};
  app.require_subcommand(1);

  CommonOptions train_opts, sweep_opts, ablate_opts;
  auto* train = app.add_subcommand("train", "train over one or more seeds");
  add_common(train, train_opts);

  auto* sweep = app.add_subcommand("sweep", "train once per value of one config key");
  add_common(sweep, sweep_opts);
  std::string axis;
  std::vector<std::string> values;
  sweep->add_option("--axis", axis, "config key to vary")->required();
  sweep->add_option("--values", values, "values for the axis")->delimiter(',');

  auto* ablate = app.add_subcommand("ablate", "full SPOD, GAE only, eta=0, no clipping");
  add_common(ablate, ablate_opts);

  auto* check = app.add_subcommand("check", "numerical checks of the theory");
  std::uint64_t check_seed = 0;
  check->add_option("--seed", check_seed, "seed for random instances");

  auto* eval = app.add_subcommand("eval", "greedy rollouts of a checkpoint");
  std::string ckpt_path;
  int episodes = 10;
  std::uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval->add_option("--episodes", episodes, "episode count")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "reset seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      const auto cfg = build_config(train_opts);
      report(dtae::run_train(cfg, build_seeds(train_opts, cfg), train_opts.out));
    } else if (*sweep) {
      const auto cfg = build_config(sweep_opts);
      if (values.empty()) std::fprintf(stderr, "warning: empty value list, nothing to run\n");
      for (const auto& m : dtae::run_sweep(cfg, axis, values, build_seeds(sweep_opts, cfg), sweep_opts.out)) report(m);
    } else if (*ablate) {
      const auto cfg = build_config(ablate_opts);
      for (const auto& m : dtae::run_ablate(cfg, build_seeds(ablate_opts, cfg), ablate_opts.out)) report(m);
    } else if (*check) {
      bool ok = true;
      for (const auto& r : dtae::run_all_checks(check_seed)) {
        std::printf("%s\n", r.to_line().c_str());
        ok = ok && r.passed;
      }
      return ok ? kExitOk : kExitCheck;
    } else if (*eval) {
      const auto ckpt = dtae::load_checkpoint(ckpt_path);
      const auto returns = dtae::evaluate_greedy(ckpt, episodes, eval_seed);
      for (std::size_t i = 0; i < returns.size(); ++i) std::printf("episode %zu return %.6g\n", i, returns[i]);
      std::printf("mean return %.6g\n",
                  std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size()));
    }
  } catch (const dtae::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const dtae::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const dtae::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitOk;
}
