#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dtae/config.hpp"
#include "dtae/errors.hpp"
#include "dtae/experiment.hpp"

using namespace dtae;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dtae_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TrainConfig tiny() {
  TrainConfig cfg;
  cfg.steps_per_batch = 256;
  cfg.total_steps = 1024;
  cfg.epochs_per_batch = 2;
  return cfg;
}

}  // namespace

TEST_CASE("config text round-trips every key") {
  TrainConfig cfg;
  cfg.env = "pendulum";
  cfg.alpha = 0.4;
  cfg.combine = CombineMode::kBeta;
  cfg.beta = 0.25;
  cfg.clip = false;
  cfg.estimator = Estimator::kGae;
  cfg.algorithm = Algorithm::kPpo;
  cfg.entropy_state = EntropyState::kCurrent;
  cfg.value_target = ValueTarget::kLambdaReturn;
  cfg.eta_0 = 1.0 / 3.0;
  cfg.seed = 99;
  const TrainConfig back = parse_config_text(to_config_text(cfg));
  CHECK(to_config_text(back) == to_config_text(cfg));
  CHECK(back.eta_0 == cfg.eta_0);
  for (const auto& key : config_keys()) CHECK(config_value(back, key) == config_value(cfg, key));
  CHECK(config_keys().size() >= 20);
}

TEST_CASE("config parsing errors name the key") {
  TrainConfig cfg;
  try {
    apply_override(cfg, "learning_rate=0.1");
    FAIL("no throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("learning_rate") != std::string::npos);
  }
  try {
    apply_setting(cfg, "alpha", "abc");
    FAIL("no throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_override(cfg, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("env = mujoco\n").validate(), ConfigError);
}

TEST_CASE("comments and whitespace in config files") {
  const auto cfg = parse_config_text("# header\n  alpha = 0.9  # trailing\n\ncombine=max\n");
  CHECK(cfg.alpha == 0.9);
  CHECK(cfg.combine == CombineMode::kMax);
}

TEST_CASE("seed ranges") {
  CHECK(parse_seed_range("3") == std::vector<std::uint64_t>{3});
  CHECK(parse_seed_range("0..2") == std::vector<std::uint64_t>{0, 1, 2});
  CHECK_THROWS_AS(parse_seed_range("5..1"), ConfigError);
  CHECK_THROWS_AS(parse_seed_range("x"), ConfigError);
}

TEST_CASE("aggregation") {
  std::vector<std::vector<IterationMetrics>> per_seed(3);
  double v = 1.0;
  for (auto& rows : per_seed)
    for (int i = 0; i < 4; ++i) {
      IterationMetrics m;
      m.step = 100 * (i + 1);
      m.mean_return = (v *= 1.37) - 3.0;
      rows.push_back(m);
    }
  per_seed[2].pop_back();
  const auto agg = aggregate_returns(per_seed);
  REQUIRE(agg.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    double sum = 0.0;
    int n = 0;
    for (const auto& rows : per_seed)
      if (i < rows.size()) {
        sum += rows[i].mean_return;
        ++n;
      }
    CHECK(std::abs(agg[i].mean_return - sum / n) < 1e-12);
    CHECK(agg[i].seeds == n);
    CHECK(agg[i].min_return <= agg[i].mean_return);
    CHECK(agg[i].mean_return <= agg[i].max_return);
  }
  per_seed[1][0].step = 7;
  CHECK_THROWS_AS(aggregate_returns(per_seed), ConfigError);
}

TEST_CASE("total_steps = 0 writes an empty curve and a manifest") {
  auto cfg = tiny();
  cfg.total_steps = 0;
  const auto dir = fresh_dir("empty");
  const auto m = run_train(cfg, {0}, dir);
  CHECK(fs::exists(dir / "manifest.txt"));
  CHECK(slurp(dir / "seed_0.csv") == metrics_csv({}));
  CHECK(std::isnan(m.final_returns[0]));
  fs::remove_all(dir);
}

TEST_CASE("run_train is deterministic and the manifest reproduces the run") {
  auto cfg = tiny();
  const auto d1 = fresh_dir("det1"), d2 = fresh_dir("det2"), d3 = fresh_dir("det3");
  const auto m1 = run_train(cfg, {0, 1, 2}, d1);
  run_train(cfg, {0, 1, 2}, d2);
  for (const auto& f : {"seed_0.csv", "seed_1.csv", "seed_2.csv", "aggregate.csv"})
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  CHECK(slurp(d1 / "seed_0.csv") != slurp(d1 / "seed_1.csv"));

  const auto back = read_manifest(d1 / "manifest.txt");
  CHECK(back.seeds == m1.seeds);
  CHECK(back.seed_csv_files == m1.seed_csv_files);
  CHECK(to_config_text(back.config) == to_config_text(cfg));
  REQUIRE(back.final_returns.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(back.final_returns[i] == m1.final_returns[i]);
  run_train(back.config, back.seeds, d3);
  CHECK(slurp(d1 / "aggregate.csv") == slurp(d3 / "aggregate.csv"));

  // rowwise order statistics of the emitted aggregate
  std::ifstream in(d1 / "aggregate.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 's') continue;
    double step, mean, lo, hi;
    char c;
    std::istringstream ss(line);
    ss >> step >> c >> mean >> c >> lo >> c >> hi;
    CHECK(lo <= mean);
    CHECK(mean <= hi);
    ++rows;
  }
  CHECK(rows == 4);
  for (const auto& d : {d1, d2, d3}) fs::remove_all(d);
}

TEST_CASE("thread count does not change the output") {
  auto cfg = tiny();
  const auto d1 = fresh_dir("thr1"), d2 = fresh_dir("thr2");
  setenv("DTAE_RL_THREADS", "1", 1);
  CHECK(worker_threads() == 1);
  run_train(cfg, {4, 5}, d1);
  setenv("DTAE_RL_THREADS", "2", 1);
  run_train(cfg, {4, 5}, d2);
  unsetenv("DTAE_RL_THREADS");
  CHECK(slurp(d1 / "aggregate.csv") == slurp(d2 / "aggregate.csv"));
  CHECK(slurp(d1 / "seed_5.csv") == slurp(d2 / "seed_5.csv"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("sweeps") {
  auto cfg = tiny();
  cfg.total_steps = 256;
  const auto dir = fresh_dir("sweep");
  SUBCASE("alpha values") {
    const auto ms = run_sweep(cfg, "alpha", {"0.1", "0.4", "0.9"}, {0}, dir);
    REQUIRE(ms.size() == 3);
    CHECK(ms[1].config.alpha == 0.4);
    CHECK(fs::exists(dir / "alpha_0.9" / "manifest.txt"));
  }
  SUBCASE("combine modes") { CHECK(run_sweep(cfg, "combine", {"mean", "max", "min", "beta"}, {0}, dir).size() == 4); }
  SUBCASE("empty value list") { CHECK(run_sweep(cfg, "alpha", {}, {0}, dir).empty()); }
  SUBCASE("unknown axis lists the sweepable keys") {
    try {
      run_sweep(cfg, "warp_factor", {"1"}, {0}, dir);
      FAIL("no throw");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("alpha") != std::string::npos);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("ablation configs") {
  TrainConfig cfg;
  const auto cs = ablation_configs(cfg);
  REQUIRE(cs.size() == 4);
  CHECK(ablation_labels().front() == "spod");
  CHECK(to_config_text(cs[0]) == to_config_text(cfg));
  CHECK(cs[1].estimator == Estimator::kGae);
  CHECK(cs[2].eta_0 == 0.0);
  CHECK(!cs[3].clip);
  auto small = tiny();
  small.total_steps = 256;
  const auto dir = fresh_dir("ablate");
  const auto ms = run_ablate(small, {0}, dir);
  REQUIRE(ms.size() == 4);
  CHECK(ms[0].label == "spod");
  CHECK(read_manifest(dir / "eta0" / "manifest.txt").config.eta_0 == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("greedy evaluation of a saved checkpoint") {
  auto cfg = tiny();
  const auto dir = fresh_dir("eval");
  run_train(cfg, {0}, dir);
  const auto ckpt = load_checkpoint((dir / "seed_0.ckpt").string());
  const auto a = evaluate_greedy(ckpt, 3, 1), b = evaluate_greedy(ckpt, 3, 1);
  CHECK(a.size() == 3);
  CHECK(a == b);
  for (double r : a) CHECK(r <= 0.0);
  fs::remove_all(dir);
}
