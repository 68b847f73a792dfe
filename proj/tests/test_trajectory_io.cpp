#include <doctest.h>

#include <sstream>

#include "dtae/advantage.hpp"
#include "dtae/errors.hpp"
#include "dtae/trajectory_io.hpp"

using namespace dtae;

TEST_CASE("dump and reload reproduces the batch bit-exactly") {
  for (const auto& name : environment_names()) {
    auto env = make_environment(name);
    Rng rng(1);
    const auto pi = make_gaussian_policy<double>(env->spec().state_dim, env->spec().action_dim, 8, rng, 0.0);
    const Batch b = collect_batch(pi, *env, 450, rng);
    std::stringstream ss;
    write_trajectories(ss, b);
    const Batch back = read_trajectories(ss);
    REQUIRE(back.trajectories.size() == b.trajectories.size());
    for (std::size_t i = 0; i < b.trajectories.size(); ++i) {
      CHECK(back.trajectories[i].states == b.trajectories[i].states);
      CHECK(back.trajectories[i].actions == b.trajectories[i].actions);
      CHECK(back.trajectories[i].raw_rewards == b.trajectories[i].raw_rewards);
      CHECK(back.trajectories[i].end == b.trajectories[i].end);
    }
  }
}

TEST_CASE("a hand-written dump feeds the estimators") {
  std::stringstream ss(
      "# dtae-trajectory v1\n"
      "dims 1 1\n"
      "episode 0 terminated\n"
      "0,0.5,0.1,1,0\n"
      "1,0.25,-0.2,1,0\n"
      "2,0.125,0.3,1,1\n"
      "final,0\n");
  const Batch b = read_trajectories(ss);
  REQUIRE(b.trajectories.size() == 1);
  const auto& tr = b.trajectories[0];
  CHECK(tr.terminated());
  CHECK(tr.length() == 3);
  const auto tv = make_trajectory_values<double>(tr.raw_rewards, VectorXr::Zero(4), true);
  const VectorXr g = gae(tv, 0.99, 1.0);
  CHECK(g[0] == doctest::Approx(2.9701));
}

TEST_CASE("malformed dumps are rejected") {
  std::stringstream no_header("dims 1 1\n");
  CHECK_THROWS_AS(read_trajectories(no_header), ConfigError);
  std::stringstream short_line(
      "# dtae-trajectory v1\n"
      "dims 2 1\n"
      "episode 0 time_limit\n"
      "0,0.5,0.1,1,0\n"
      "final,0,0\n");
  CHECK_THROWS_AS(read_trajectories(short_line), ConfigError);
}
