#pragma once

// Multi-seed experiment orchestration: per-seed metric CSVs, an aggregate CSV
// (mean/min/max of mean_return across seeds at each step) and a manifest that
// embeds the exact config.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dtae/checkpoint.hpp"
#include "dtae/trainer.hpp"

namespace dtae {

struct RunManifest {
  std::string label;
  TrainConfig config;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path dir;
  std::vector<std::string> seed_csv_files;  // relative to dir
  std::vector<std::string> checkpoint_files;
  std::string aggregate_csv_file;
  std::vector<double> final_returns;  // last mean_return per seed, NaN if no iteration ran
};

struct AggregateRow {
  std::int64_t step = 0;
  double mean_return = 0.0;
  double min_return = 0.0;
  double max_return = 0.0;
  int seeds = 0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const IterationMetrics& m);
std::string metrics_csv(const std::vector<IterationMetrics>& rows);

// Row i aggregates every seed that produced a row i; rows whose step values
// disagree across seeds are rejected.
std::vector<AggregateRow> aggregate_returns(const std::vector<std::vector<IterationMetrics>>& per_seed);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

// Runs one seed to cfg.total_steps. Writes the final checkpoint when a path is given.
std::vector<IterationMetrics> train_seed(const TrainConfig& cfg, const std::string& checkpoint_path = {});

RunManifest run_train(const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds,
                      const std::filesystem::path& out_dir, const std::string& label = "train");

std::vector<std::string> sweepable_keys();
std::vector<RunManifest> run_sweep(const TrainConfig& cfg, const std::string& axis,
                                   const std::vector<std::string>& values, const std::vector<std::uint64_t>& seeds,
                                   const std::filesystem::path& out_dir);

// Labels in order: spod, gae (DTAE replaced by GAE), eta0 (no entropy), noclip.
std::vector<TrainConfig> ablation_configs(const TrainConfig& cfg);
std::vector<std::string> ablation_labels();
std::vector<RunManifest> run_ablate(const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                    const std::filesystem::path& out_dir);

void write_manifest(const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& file);

// DTAE_RL_THREADS caps the number of seeds trained concurrently.
int worker_threads();

// "7" or "0..9" (inclusive).
std::vector<std::uint64_t> parse_seed_range(std::string_view text);

// Undiscounted returns of mean-action rollouts, one per episode.
std::vector<double> evaluate_greedy(const Checkpoint& ckpt, int episodes, std::uint64_t seed);

}  // namespace dtae
