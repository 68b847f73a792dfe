#include "dtae/rollout.hpp"

namespace dtae {

void validate(const Trajectory& traj) {
  const Index t = traj.raw_rewards.size();
  if (traj.states.rows() != t + 1 || traj.actions.rows() != t || traj.soft_rewards.size() != t ||
      traj.old_log_probs.size() != t || traj.next_state_entropies.size() != t || traj.state_entropies.size() != t)
    throw ConfigError("trajectory sequences have inconsistent lengths");
}

Index Batch::step_count() const {
  Index n = 0;
  for (const auto& tr : trajectories) n += tr.length();
  return n;
}

std::vector<double> Batch::episode_returns() const {
  std::vector<double> out;
  for (const auto& tr : trajectories)
    if (tr.complete_episode()) out.push_back(tr.raw_return());
  if (out.empty())
    for (const auto& tr : trajectories) out.push_back(tr.raw_return());
  return out;
}

Batch collect_batch(const GaussianPolicy<double>& policy, Environment& env, Index steps_per_batch, Rng& rng) {
  const EnvSpec& spec = env.spec();
  if (policy.state_dim() != spec.state_dim || policy.action_dim() != spec.action_dim)
    throw ConfigError("policy dimensions do not match environment " + spec.name);
  if (steps_per_batch < 1) throw ConfigError("steps_per_batch must be at least 1");

  const double entropy = entropy_of(policy);
  Batch batch;
  Index collected = 0;
  while (collected < steps_per_batch) {
    std::vector<VectorXr> states{env.reset(rng())};
    std::vector<VectorXr> actions;
    std::vector<double> rewards, log_probs;
    EpisodeEnd end = EpisodeEnd::kBatchCut;
    while (collected < steps_per_batch) {
      const auto sample = sample_action(policy, states.back(), rng);
      const StepResult step = env.step(sample.action);
      actions.push_back(sample.action);
      log_probs.push_back(sample.log_prob);
      rewards.push_back(step.reward);
      states.push_back(step.next_state);
      ++collected;
      if (step.terminated) {
        end = EpisodeEnd::kTerminated;
        break;
      }
      if (step.truncated) {
        end = EpisodeEnd::kTimeLimit;
        break;
      }
    }
    Trajectory tr;
    const Index len = static_cast<Index>(rewards.size());
    tr.states.resize(len + 1, spec.state_dim);
    tr.actions.resize(len, spec.action_dim);
    for (Index i = 0; i <= len; ++i) tr.states.row(i) = states[i].transpose();
    for (Index i = 0; i < len; ++i) tr.actions.row(i) = actions[i].transpose();
    tr.raw_rewards = Eigen::Map<const VectorXr>(rewards.data(), len);
    tr.soft_rewards = tr.raw_rewards;
    tr.old_log_probs = Eigen::Map<const VectorXr>(log_probs.data(), len);
    tr.next_state_entropies = VectorXr::Constant(len, entropy);
    tr.state_entropies = VectorXr::Constant(len, entropy);
    tr.end = end;
    batch.trajectories.push_back(std::move(tr));
  }
  return batch;
}

VectorXr augment_rewards(const Trajectory& traj, const GaussianPolicy<double>& policy, double eta) {
  VectorXr soft = traj.raw_rewards;
  if (eta == 0.0) return soft;
  const Index n = traj.length();
  for (Index t = 0; t < n; ++t) {
    if (t + 1 == n && traj.terminated()) continue;
    const VectorXr next = traj.states.row(t + 1).transpose();
    soft[t] += eta * entropy_of(policy, next);
  }
  return soft;
}

VectorXr rewards_to_go(const Trajectory& traj, double gamma, double bootstrap_value) {
  const Index n = traj.length();
  VectorXr g(n);
  double acc = traj.terminated() ? 0.0 : bootstrap_value;
  for (Index t = n; t-- > 0;) {
    acc = traj.soft_rewards[t] + gamma * acc;
    g[t] = acc;
  }
  return g;
}

VectorXr rewards_to_go(const Trajectory& traj, double gamma, const ValueNet<double>& value) {
  const double bootstrap = traj.terminated() ? 0.0 : value_of(value, VectorXr(traj.states.bottomRows(1).transpose()));
  return rewards_to_go(traj, gamma, bootstrap);
}

}  // namespace dtae
