#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dtae/envs.hpp"
#include "dtae/errors.hpp"

using namespace dtae;

TEST_CASE("reset is deterministic per seed") {
  for (const auto& name : environment_names()) {
    auto a = make_environment(name), b = make_environment(name);
    CHECK(a->reset(17) == b->reset(17));
    CHECK(a->elapsed_steps() == 0);
  }
  CHECK_THROWS_AS(make_environment("humanoid"), ConfigError);
}

TEST_CASE("point mass reset distribution") {
  PointMass env;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const VectorXr x = env.reset(s);
    CHECK(x.head(2).cwiseAbs().maxCoeff() <= 1.0);
    CHECK(x.tail(2).isZero(0.0));
  }
}

TEST_CASE("point mass dynamics by hand") {
  PointMass env;
  env.reset(0);
  env.set_state(Eigen::Vector2d(0.3, -0.4), Eigen::Vector2d(0.5, 0.2));
  VectorXr a(2);
  a << 0.7, -1.0;
  const auto r = env.step(a);
  const double dt = 0.05;
  CHECK(r.next_state[2] == doctest::Approx(0.5 + dt * 0.7));
  CHECK(r.next_state[3] == doctest::Approx(0.2 - dt * 1.0));
  CHECK(r.next_state[0] == doctest::Approx(0.3 + dt * (0.5 + dt * 0.7)));
  CHECK(r.next_state[1] == doctest::Approx(-0.4 + dt * (0.2 - dt * 1.0)));
  CHECK(r.reward == doctest::Approx(-(0.09 + 0.16 + 0.01 * (0.49 + 1.0))));
}

TEST_CASE("point mass at goal with zero action has zero reward") {
  PointMass env;
  env.reset(0);
  env.set_state(Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero());
  CHECK(env.step(VectorXr::Zero(2)).reward == 0.0);
}

TEST_CASE("point mass reward is bounded over random rollouts") {
  PointMass env;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int ep = 0; ep < 20; ++ep) {
    env.reset(static_cast<std::uint64_t>(ep));
    for (int t = 0; t < 200; ++t) {
      const auto r = env.step(VectorXr::NullaryExpr(2, [&] { return u(rng); }));
      CHECK(r.reward <= 0.0);
      CHECK(r.reward >= -8.02);
    }
  }
  CHECK(env.clipped_action_count() > 0);
}

TEST_CASE("pendulum reset ranges and dynamics") {
  PendulumSwingup env;
  for (std::uint64_t s = 0; s < 100; ++s) {
    env.reset(s);
    CHECK(std::abs(env.theta()) <= std::numbers::pi);
    CHECK(std::abs(env.theta_dot()) <= 1.0);
  }
  env.set_state(0.4, -0.3);
  const auto r = env.step(VectorXr::Constant(1, 1.5));
  const double thdot = -0.3 + (3.0 * 10.0 / 2.0 * std::sin(0.4) + 3.0 * 1.5) * 0.05;
  const double th = 0.4 + thdot * 0.05;
  CHECK(env.theta_dot() == doctest::Approx(thdot));
  CHECK(env.theta() == doctest::Approx(th));
  CHECK(r.next_state[0] == doctest::Approx(std::cos(th)));
  CHECK(r.next_state[1] == doctest::Approx(std::sin(th)));
  CHECK(r.reward == doctest::Approx(-(0.16 + 0.1 * 0.09 + 0.001 * 2.25)));
}

TEST_CASE("wrap_angle") {
  CHECK(wrap_angle(3.0 * std::numbers::pi / 2.0) == doctest::Approx(-std::numbers::pi / 2.0));
  CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
  CHECK(wrap_angle(-7.0) == doctest::Approx(-7.0 + 2.0 * std::numbers::pi));
}

TEST_CASE("cart pole stays upright for a while with zero force") {
  CartPoleContinuous env;
  env.reset(0);
  env.set_state(Eigen::Vector4d::Zero());
  for (int t = 0; t < 20; ++t) {
    const auto r = env.step(VectorXr::Zero(1));
    CHECK(!r.terminated);
    CHECK(r.reward == 1.0);
    CHECK(std::abs(r.next_state[2]) < 1e-12);
  }
  env.set_state(Eigen::Vector4d(0.0, 0.0, 0.01, 0.0));
  for (int t = 0; t < 5; ++t) CHECK(std::abs(env.step(VectorXr::Zero(1)).next_state[2]) < 0.05);
}

TEST_CASE("cart pole terminates past the angle limit") {
  CartPoleContinuous env;
  env.reset(0);
  env.set_state(Eigen::Vector4d(0.0, 0.0, 0.3, 0.0));
  CHECK(env.step(VectorXr::Zero(1)).terminated);
  CHECK_THROWS_AS(env.step(VectorXr::Zero(1)), UsageError);
}

TEST_CASE("truncation at the horizon") {
  PointMass env;
  env.reset(1);
  StepResult r;
  for (int t = 0; t < 200; ++t) r = env.step(VectorXr::Zero(2));
  CHECK(r.truncated);
  CHECK(!r.terminated);
  CHECK_THROWS_AS(env.step(VectorXr::Zero(2)), UsageError);
}

TEST_CASE("step contract") {
  PointMass env;
  CHECK_THROWS_AS(env.step(VectorXr::Zero(2)), UsageError);
  env.reset(0);
  CHECK_THROWS_AS(env.step(VectorXr::Zero(3)), ConfigError);
  CHECK_THROWS_AS(env.step(VectorXr::Constant(2, std::nan(""))), NumericError);
}

TEST_CASE("seed and action sequence determine the rollout") {
  for (const auto& name : environment_names()) {
    auto a = make_environment(name), b = make_environment(name);
    a->reset(5);
    b->reset(5);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      const VectorXr act = VectorXr::NullaryExpr(a->spec().action_dim, [&] { return n(rng); });
      const auto ra = a->step(act), rb = b->step(act);
      CHECK(ra.next_state == rb.next_state);
      CHECK(ra.reward == rb.reward);
      if (ra.terminated || ra.truncated) break;
    }
  }
}
