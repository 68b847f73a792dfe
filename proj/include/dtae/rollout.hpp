#pragma once

#include <cstdint>
#include <vector>

#include "dtae/envs.hpp"
#include "dtae/gaussian.hpp"

namespace dtae {

enum class EpisodeEnd {
  kTerminated,  // true terminal state, V(s_T) = 0
  kTimeLimit,   // env horizon reached, bootstrap through V(s_T)
  kBatchCut,    // batch budget exhausted mid-episode, bootstrap through V(s_T)
};

struct Trajectory {
  MatrixXr states;   // s_0..s_T, one per row
  MatrixXr actions;  // a_0..a_{T-1}
  VectorXr raw_rewards;
  VectorXr soft_rewards;
  VectorXr old_log_probs;
  VectorXr next_state_entropies;  // H(pi_old(s_{t+1})) of the collecting policy
  VectorXr state_entropies;       // H(pi_old(s_t))
  EpisodeEnd end = EpisodeEnd::kTimeLimit;

  Index length() const { return raw_rewards.size(); }
  bool terminated() const { return end == EpisodeEnd::kTerminated; }
  bool truncated() const { return end != EpisodeEnd::kTerminated; }
  bool complete_episode() const { return end != EpisodeEnd::kBatchCut; }
  double raw_return() const { return raw_rewards.sum(); }
};

void validate(const Trajectory& traj);

// Every trajectory is sampled by the same policy snapshot.
struct Batch {
  std::vector<Trajectory> trajectories;

  Index step_count() const;
  // Undiscounted raw returns of episodes that ended inside the batch; falls
  // back to every trajectory when no episode completed.
  std::vector<double> episode_returns() const;
};

// Runs episodes until exactly steps_per_batch transitions are collected; the
// last episode is cut and marked kBatchCut if the budget runs out first.
// Soft rewards are initialised to the raw rewards.
Batch collect_batch(const GaussianPolicy<double>& policy, Environment& env, Index steps_per_batch, Rng& rng);

// r^H_t = r_t + eta H(pi(s_{t+1})) from the single sampled next state; the
// entropy term is dropped on a true terminal transition.
VectorXr augment_rewards(const Trajectory& traj, const GaussianPolicy<double>& policy, double eta);

// G_t = sum_l gamma^l r^H_{t+l+1} + gamma^{T-t} V(s_T) when truncated.
VectorXr rewards_to_go(const Trajectory& traj, double gamma, double bootstrap_value);
VectorXr rewards_to_go(const Trajectory& traj, double gamma, const ValueNet<double>& value);

}  // namespace dtae
