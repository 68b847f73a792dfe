#include "dtae/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dtae {

VectorXr Environment::reset(std::uint64_t seed) {
  Rng rng(seed);
  reset_state(rng);
  elapsed_ = 0;
  active_ = true;
  return observation();
}

StepResult Environment::step(const VectorXr& action) {
  if (!active_) throw UsageError("step called on an environment that is not running; call reset first");
  const EnvSpec& s = spec();
  if (action.size() != s.action_dim)
    throw ConfigError("action dim " + std::to_string(action.size()) + " != " + std::to_string(s.action_dim));
  if (!action.allFinite()) throw NumericError("non-finite action");
  const VectorXr clipped = action.cwiseMax(s.action_low).cwiseMin(s.action_high);
  if (clipped != action) ++clipped_;

  const Transition tr = advance(clipped);
  ++elapsed_;
  StepResult out;
  out.next_state = observation();
  out.reward = tr.reward;
  out.terminated = tr.terminated;
  out.truncated = !tr.terminated && elapsed_ >= s.max_episode_steps;
  if (out.terminated || out.truncated) active_ = false;
  return out;
}

double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  return std::fmod(std::fmod(angle + pi, 2.0 * pi) + 2.0 * pi, 2.0 * pi) - pi;
}

PointMass::PointMass() {
  spec_.name = "point_mass";
  spec_.state_dim = 4;
  spec_.action_dim = 2;
  spec_.action_low = VectorXr::Constant(2, -1.0);
  spec_.action_high = VectorXr::Constant(2, 1.0);
  spec_.max_episode_steps = 200;
}

VectorXr PointMass::observation() const {
  VectorXr s(4);
  s << pos_, vel_;
  return s;
}

void PointMass::set_state(const Eigen::Vector2d& position, const Eigen::Vector2d& velocity) {
  pos_ = position;
  vel_ = velocity;
}

void PointMass::reset_state(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  pos_.x() = u(rng);
  pos_.y() = u(rng);
  vel_.setZero();
}

Environment::Transition PointMass::advance(const VectorXr& action) {
  const double reward = -(pos_.squaredNorm() + kActionCost * action.squaredNorm());
  vel_ += kDt * action;
  pos_ += kDt * vel_;
  for (int i = 0; i < 2; ++i) {
    if (std::abs(pos_[i]) > kBox) {
      pos_[i] = std::copysign(kBox, pos_[i]);
      vel_[i] = 0.0;
    }
  }
  return {reward, false};
}

PendulumSwingup::PendulumSwingup() {
  spec_.name = "pendulum";
  spec_.state_dim = 3;
  spec_.action_dim = 1;
  spec_.action_low = VectorXr::Constant(1, -kMaxTorque);
  spec_.action_high = VectorXr::Constant(1, kMaxTorque);
  spec_.max_episode_steps = 200;
}

VectorXr PendulumSwingup::observation() const {
  VectorXr s(3);
  s << std::cos(theta_), std::sin(theta_), theta_dot_;
  return s;
}

void PendulumSwingup::set_state(double theta, double theta_dot) {
  theta_ = theta;
  theta_dot_ = theta_dot;
}

void PendulumSwingup::reset_state(Rng& rng) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> speed(-1.0, 1.0);
  theta_ = angle(rng);
  theta_dot_ = speed(rng);
}

Environment::Transition PendulumSwingup::advance(const VectorXr& action) {
  const double u = action[0];
  const double th = wrap_angle(theta_);
  const double reward = -(th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);
  double new_dot =
      theta_dot_ + (3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) + 3.0 / (kMass * kLength * kLength) * u) * kDt;
  new_dot = std::clamp(new_dot, -kMaxSpeed, kMaxSpeed);
  theta_ += new_dot * kDt;
  theta_dot_ = new_dot;
  return {reward, false};
}

CartPoleContinuous::CartPoleContinuous() {
  spec_.name = "cart_pole";
  spec_.state_dim = 4;
  spec_.action_dim = 1;
  spec_.action_low = VectorXr::Constant(1, -kMaxForce);
  spec_.action_high = VectorXr::Constant(1, kMaxForce);
  spec_.max_episode_steps = 500;
}

void CartPoleContinuous::set_state(const Eigen::Vector4d& state) { state_ = state; }

void CartPoleContinuous::reset_state(Rng& rng) {
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (Index i = 0; i < 4; ++i) state_[i] = u(rng);
}

Environment::Transition CartPoleContinuous::advance(const VectorXr& action) {
  const double force = action[0];
  const double x = state_[0], x_dot = state_[1], th = state_[2], th_dot = state_[3];
  const double total_mass = kCartMass + kPoleMass;
  const double pole_mass_length = kPoleMass * kHalfLength;
  const double cos_th = std::cos(th), sin_th = std::sin(th);
  const double temp = (force + pole_mass_length * th_dot * th_dot * sin_th) / total_mass;
  const double th_acc =
      (kGravity * sin_th - cos_th * temp) / (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_th * cos_th / total_mass));
  const double x_acc = temp - pole_mass_length * th_acc * cos_th / total_mass;
  state_[0] = x + kTau * x_dot;
  state_[1] = x_dot + kTau * x_acc;
  state_[2] = th + kTau * th_dot;
  state_[3] = th_dot + kTau * th_acc;
  const bool done = std::abs(state_[0]) > kXLimit || std::abs(state_[2]) > kThetaLimit;
  return {1.0, done};
}

std::vector<std::string> environment_names() { return {"point_mass", "pendulum", "cart_pole"}; }

std::unique_ptr<Environment> make_environment(std::string_view name) {
  if (name == "point_mass") return std::make_unique<PointMass>();
  if (name == "pendulum") return std::make_unique<PendulumSwingup>();
  if (name == "cart_pole") return std::make_unique<CartPoleContinuous>();
  throw ConfigError("unknown environment '" + std::string(name) + "' (expected point_mass, pendulum or cart_pole)");
}

}  // namespace dtae
