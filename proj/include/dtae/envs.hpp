#pragma once

// Desk-scale continuous-control environments.
//
// point_mass   2-D double integrator. State (x, y, vx, vy). dt = 0.05,
//              action = acceleration in [-1, 1]^2. Semi-implicit Euler:
//              v' = v + dt a, p' = p + dt v'. Position is confined to the box
//              [-2, 2]^2; hitting a wall zeroes that velocity component.
//              Reward -(|p|^2 + 0.01 |a|^2) on the pre-step position, so it
//              lies in [-8.02, 0]. Reset: p ~ U[-1, 1]^2, v = 0. Horizon 200.
// pendulum     Gravity pendulum, theta = 0 upright. Observation
//              (cos th, sin th, thdot). g = 10, m = 1, l = 1, dt = 0.05,
//              thdot' = clip(thdot + (3g/(2l) sin th + 3/(m l^2) u) dt, -8, 8),
//              th' = th + thdot' dt, torque u in [-2, 2].
//              Reward -(wrap(th)^2 + 0.1 thdot^2 + 0.001 u^2).
//              Reset: th ~ U[-pi, pi], thdot ~ U[-1, 1]. Horizon 200.
// cart_pole    Continuous-force cart-pole. State (x, xdot, th, thdot).
//              g = 9.8, cart mass 1.0, pole mass 0.1, half pole length 0.5,
//              tau = 0.02, explicit Euler, force in [-10, 10]. Reward +1 per
//              step; terminates when |th| > 12 deg or |x| > 2.4.
//              Reset: every state component ~ U[-0.05, 0.05]. Horizon 500.

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dtae/nn.hpp"

namespace dtae {

struct EnvSpec {
  std::string name;
  Index state_dim = 0;
  Index action_dim = 0;
  VectorXr action_low;
  VectorXr action_high;
  int max_episode_steps = 1;
};

struct StepResult {
  VectorXr next_state;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;

  // Deterministic in seed; clears the step counter.
  VectorXr reset(std::uint64_t seed);
  // Actions outside the bounds are clipped and counted.
  StepResult step(const VectorXr& action);

  int elapsed_steps() const { return elapsed_; }
  std::int64_t clipped_action_count() const { return clipped_; }
  virtual VectorXr observation() const = 0;

 protected:
  struct Transition {
    double reward;
    bool terminated;
  };
  virtual void reset_state(Rng& rng) = 0;
  virtual Transition advance(const VectorXr& action) = 0;

 private:
  int elapsed_ = 0;
  bool active_ = false;
  std::int64_t clipped_ = 0;
};

class PointMass final : public Environment {
 public:
  static constexpr double kDt = 0.05;
  static constexpr double kBox = 2.0;
  static constexpr double kActionCost = 0.01;

  PointMass();
  const EnvSpec& spec() const override { return spec_; }
  VectorXr observation() const override;
  void set_state(const Eigen::Vector2d& position, const Eigen::Vector2d& velocity);

 protected:
  void reset_state(Rng& rng) override;
  Transition advance(const VectorXr& action) override;

 private:
  EnvSpec spec_;
  Eigen::Vector2d pos_ = Eigen::Vector2d::Zero();
  Eigen::Vector2d vel_ = Eigen::Vector2d::Zero();
};

class PendulumSwingup final : public Environment {
 public:
  static constexpr double kDt = 0.05;
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kMaxTorque = 2.0;

  PendulumSwingup();
  const EnvSpec& spec() const override { return spec_; }
  VectorXr observation() const override;
  void set_state(double theta, double theta_dot);
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }

 protected:
  void reset_state(Rng& rng) override;
  Transition advance(const VectorXr& action) override;

 private:
  EnvSpec spec_;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
};

class CartPoleContinuous final : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kTau = 0.02;
  static constexpr double kMaxForce = 10.0;
  static constexpr double kThetaLimit = 12.0 * 3.14159265358979323846 / 180.0;
  static constexpr double kXLimit = 2.4;

  CartPoleContinuous();
  const EnvSpec& spec() const override { return spec_; }
  VectorXr observation() const override { return state_; }
  void set_state(const Eigen::Vector4d& state);

 protected:
  void reset_state(Rng& rng) override;
  Transition advance(const VectorXr& action) override;

 private:
  EnvSpec spec_;
  VectorXr state_ = VectorXr::Zero(4);
};

// Wraps an angle into [-pi, pi).
double wrap_angle(double angle);

std::vector<std::string> environment_names();
std::unique_ptr<Environment> make_environment(std::string_view name);

}  // namespace dtae
