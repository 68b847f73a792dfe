#include "dtae/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "dtae/config.hpp"

namespace dtae {

namespace fs = std::filesystem;

std::string metrics_csv_header() {
  return "step,mean_return,min_return,max_return,policy_loss,value_loss,mean_entropy,mean_kl,clip_fraction,lr,clip_eps,"
         "eta";
}

std::string metrics_csv_row(const IterationMetrics& m) {
  std::string row = std::to_string(m.step);
  for (double v : {m.mean_return, m.min_return, m.max_return, m.policy_loss, m.value_loss, m.mean_entropy, m.mean_kl,
                   m.clip_fraction, m.lr, m.clip_eps, m.eta})
    row += "," + format_double(v);
  return row;
}

std::string metrics_csv(const std::vector<IterationMetrics>& rows) {
  std::string out = "# dtae-rl metrics v1\n" + metrics_csv_header() + "\n";
  for (const auto& m : rows) out += metrics_csv_row(m) + "\n";
  return out;
}

std::vector<AggregateRow> aggregate_returns(const std::vector<std::vector<IterationMetrics>>& per_seed) {
  std::size_t longest = 0;
  for (const auto& s : per_seed) longest = std::max(longest, s.size());
  std::vector<AggregateRow> out;
  for (std::size_t i = 0; i < longest; ++i) {
    AggregateRow row;
    row.min_return = std::numeric_limits<double>::infinity();
    row.max_return = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& s : per_seed) {
      if (i >= s.size()) continue;
      if (row.seeds == 0)
        row.step = s[i].step;
      else if (s[i].step != row.step)
        throw ConfigError("aggregate: seeds disagree on the step at row " + std::to_string(i));
      sum += s[i].mean_return;
      row.min_return = std::min(row.min_return, s[i].mean_return);
      row.max_return = std::max(row.max_return, s[i].mean_return);
      ++row.seeds;
    }
    row.mean_return = sum / row.seeds;
    out.push_back(row);
  }
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "# dtae-rl aggregate v1\nstep,mean_return,min_return,max_return,seeds\n";
  for (const auto& r : rows)
    out += std::to_string(r.step) + "," + format_double(r.mean_return) + "," + format_double(r.min_return) + "," +
           format_double(r.max_return) + "," + std::to_string(r.seeds) + "\n";
  return out;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace

std::vector<IterationMetrics> train_seed(const TrainConfig& cfg, const std::string& checkpoint_path) {
  TrainerState state = make_trainer_state(cfg);
  if (!checkpoint_path.empty()) state.diagnostic_path = checkpoint_path + ".diag";
  std::vector<IterationMetrics> rows;
  while (state.steps_done < cfg.total_steps) rows.push_back(run_iteration(state, cfg));
  if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, {cfg.env, state.policy, state.value});
  return rows;
}

int worker_threads() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("DTAE_RL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

RunManifest run_train(const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds, const fs::path& out_dir,
                      const std::string& label) {
  cfg.validate();
  fs::create_directories(out_dir);
  RunManifest manifest;
  manifest.label = label;
  manifest.config = cfg;
  manifest.seeds = seeds;
  manifest.dir = out_dir;
  manifest.aggregate_csv_file = "aggregate.csv";
  for (auto seed : seeds) {
    manifest.seed_csv_files.push_back("seed_" + std::to_string(seed) + ".csv");
    manifest.checkpoint_files.push_back("seed_" + std::to_string(seed) + ".ckpt");
  }

  std::vector<std::vector<IterationMetrics>> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        TrainConfig seed_cfg = cfg;
        seed_cfg.seed = seeds[i];
        results[i] = train_seed(seed_cfg, (out_dir / manifest.checkpoint_files[i]).string());
        write_text(out_dir / manifest.seed_csv_files[i], metrics_csv(results[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::min<int>(worker_threads(), static_cast<int>(std::max<std::size_t>(1, seeds.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (const auto& rows : results)
    manifest.final_returns.push_back(rows.empty() ? std::numeric_limits<double>::quiet_NaN() : rows.back().mean_return);
  write_text(out_dir / manifest.aggregate_csv_file, aggregate_csv(aggregate_returns(results)));
  write_manifest(manifest);
  return manifest;
}

std::vector<std::string> sweepable_keys() {
  std::vector<std::string> keys;
  for (const auto& k : config_keys())
    if (k != "seed") keys.push_back(k);
  return keys;
}

std::vector<RunManifest> run_sweep(const TrainConfig& cfg, const std::string& axis,
                                   const std::vector<std::string>& values, const std::vector<std::uint64_t>& seeds,
                                   const fs::path& out_dir) {
  const auto keys = sweepable_keys();
  if (std::find(keys.begin(), keys.end(), axis) == keys.end()) {
    std::string list;
    for (const auto& k : keys) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown sweep axis '" + axis + "'; sweepable keys: " + list);
  }
  if (values.empty()) {
    std::cerr << "warning: sweep over '" << axis << "' has no values; nothing to run\n";
    return {};
  }
  std::vector<TrainConfig> configs;
  for (const auto& v : values) {
    TrainConfig c = cfg;
    apply_setting(c, axis, v);
    c.validate();
    configs.push_back(c);
  }
  std::vector<RunManifest> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::string label = axis + "=" + values[i];
    out.push_back(run_train(configs[i], seeds, out_dir / (axis + "_" + values[i]), label));
  }
  return out;
}

std::vector<std::string> ablation_labels() { return {"spod", "gae", "eta0", "noclip"}; }

std::vector<TrainConfig> ablation_configs(const TrainConfig& cfg) {
  TrainConfig full = cfg;
  full.algorithm = Algorithm::kSpod;
  TrainConfig no_dtae = full;
  no_dtae.estimator = Estimator::kGae;
  TrainConfig no_entropy = full;
  no_entropy.eta_0 = 0.0;
  TrainConfig no_clip = full;
  no_clip.clip = false;
  return {full, no_dtae, no_entropy, no_clip};
}

std::vector<RunManifest> run_ablate(const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                    const fs::path& out_dir) {
  const auto configs = ablation_configs(cfg);
  const auto labels = ablation_labels();
  std::vector<RunManifest> out;
  for (std::size_t i = 0; i < configs.size(); ++i)
    out.push_back(run_train(configs[i], seeds, out_dir / labels[i], labels[i]));
  return out;
}

void write_manifest(const RunManifest& m) {
  std::string text =
      "# dtae-rl run manifest v1\nlabel " + m.label + "\n[config]\n" + to_config_text(m.config) + "[seeds]\n";
  for (std::size_t i = 0; i < m.seeds.size(); ++i) {
    text += std::to_string(m.seeds[i]) + " " + m.seed_csv_files[i] + " " + m.checkpoint_files[i];
    if (i < m.final_returns.size()) text += " " + format_double(m.final_returns[i]);
    text += "\n";
  }
  text += "[aggregate]\n" + m.aggregate_csv_file + "\n";
  write_text(m.dir / "manifest.txt", text);
}

RunManifest read_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read manifest " + file.string());
  RunManifest m;
  m.dir = file.parent_path();
  std::string line, section, config_text;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("label ", 0) == 0) {
      m.label = line.substr(6);
      continue;
    }
    if (line.front() == '[') {
      section = line;
      continue;
    }
    if (section == "[config]") {
      config_text += line + "\n";
    } else if (section == "[seeds]") {
      std::istringstream ss(line);
      std::uint64_t seed = 0;
      std::string csv, ckpt, ret;
      ss >> seed >> csv >> ckpt;
      m.seeds.push_back(seed);
      m.seed_csv_files.push_back(csv);
      m.checkpoint_files.push_back(ckpt);
      if (ss >> ret) m.final_returns.push_back(std::strtod(ret.c_str(), nullptr));
    } else if (section == "[aggregate]") {
      m.aggregate_csv_file = line;
    }
  }
  m.config = parse_config_text(config_text);
  return m;
}

std::vector<std::uint64_t> parse_seed_range(std::string_view text) {
  auto parse = [&](std::string_view s) {
    const std::string str(s);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(str.c_str(), &end, 10);
    if (str.empty() || end != str.c_str() + str.size()) throw ConfigError("bad seed '" + str + "'");
    return static_cast<std::uint64_t>(v);
  };
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) return {parse(text)};
  const std::uint64_t lo = parse(text.substr(0, dots));
  const std::uint64_t hi = parse(text.substr(dots + 2));
  if (hi < lo) throw ConfigError("seed range '" + std::string(text) + "' is empty");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  return seeds;
}

std::vector<double> evaluate_greedy(const Checkpoint& ckpt, int episodes, std::uint64_t seed) {
  auto env = make_environment(ckpt.env);
  if (env->spec().state_dim != ckpt.policy.state_dim() || env->spec().action_dim != ckpt.policy.action_dim())
    throw ConfigError("checkpoint policy does not match environment " + ckpt.env);
  Rng rng(seed);
  std::vector<double> returns;
  for (int e = 0; e < episodes; ++e) {
    VectorXr s = env->reset(rng());
    double total = 0.0;
    while (true) {
      const StepResult r = env->step(policy_mean(ckpt.policy, s));
      total += r.reward;
      s = r.next_state;
      if (r.terminated || r.truncated) break;
    }
    returns.push_back(total);
  }
  return returns;
}

}  // namespace dtae
