#include "dtae/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dtae/checkpoint.hpp"

namespace dtae {

AdvantageConfig TrainConfig::advantage_config() const {
  AdvantageConfig a;
  a.gamma = gamma;
  a.lambda = lambda;
  a.alpha = alpha;
  a.combine = combine;
  a.beta = beta;
  return a;
}

void TrainConfig::validate() const {
  advantage_config().validate();
  make_environment(env);
  if (eta_0 < 0.0) throw ConfigError("eta_0 must be non-negative");
  if (clip_eps_0 < 0.0) throw ConfigError("clip_eps_0 must be non-negative");
  if (lr_0 < 0.0) throw ConfigError("lr_0 must be non-negative");
  if (entropy_loss_coef < 0.0 || value_loss_coef < 0.0) throw ConfigError("loss coefficients must be non-negative");
  if (minibatch_size < 1) throw ConfigError("minibatch_size must be at least 1");
  if (epochs_per_batch < 1) throw ConfigError("epochs_per_batch must be at least 1");
  if (steps_per_batch < 1) throw ConfigError("steps_per_batch must be at least 1");
  if (total_steps < 0) throw ConfigError("total_steps must be non-negative");
  if (hidden_units < 1) throw ConfigError("hidden_units must be at least 1");
  if (max_grad_norm < 0.0) throw ConfigError("max_grad_norm must be non-negative");
}

double linear_schedule(double initial, double progress) {
  if (!(progress >= 0.0 && progress <= 1.0)) throw ConfigError("schedule progress must lie in [0, 1]");
  return std::max(0.0, initial * (1.0 - progress));
}

TrainerState make_trainer_state(const TrainConfig& cfg) {
  cfg.validate();
  TrainerState st;
  st.env = make_environment(cfg.env);
  st.rng.seed(cfg.seed);
  const EnvSpec& spec = st.env->spec();
  st.policy =
      make_gaussian_policy<double>(spec.state_dim, spec.action_dim, cfg.hidden_units, st.rng, cfg.initial_log_std);
  clamp_log_std(st.policy);
  st.value = make_value_net<double>(spec.state_dim, cfg.hidden_units, st.rng);
  st.shadow = {st.policy, st.value};
  st.policy_opt = make_adam_state(st.policy);
  st.value_opt = make_adam_state(st.value);
  return st;
}

VectorXr compute_t_terms(const GaussianPolicy<double>& policy, const SurrogateInputs& in, double eta, double coef) {
  VectorXr t = in.advantages;
  for (Index i = 0; i < t.size(); ++i) {
    const double h_new = entropy_of(policy, VectorXr(in.entropy_states.row(i).transpose()));
    t[i] += coef * eta * (h_new - in.old_entropies[i]);
  }
  return t;
}

SurrogateResult clipped_surrogate_loss(const GaussianPolicy<double>& policy, const SurrogateInputs& in, double eps,
                                       double eta, double coef, bool clip) {
  SurrogateResult res;
  const Index n = in.states.rows();
  if (n == 0) throw ConfigError("surrogate loss needs at least one sample");
  const LogProbBatch<double> eval = log_prob_batch(policy, in.states, in.actions);
  const VectorXr ratio = (eval.log_probs - in.old_log_probs).array().exp().matrix();
  if (!ratio.allFinite()) {
    res.finite = false;
    res.grads = zeros_like(policy);
    return res;
  }
  const VectorXr t = compute_t_terms(policy, in, eta, coef);
  const double lo = 1.0 - eps, hi = 1.0 + eps;

  VectorXr d_logp(n), d_t(n);
  double objective = 0.0;
  Index clipped = 0;
  for (Index i = 0; i < n; ++i) {
    const double r = ratio[i];
    const double unclipped = r * t[i];
    if (std::abs(r - 1.0) > eps) ++clipped;
    if (!clip) {
      objective += unclipped;
      d_logp[i] = r * t[i];
      d_t[i] = r;
      continue;
    }
    const double rc = std::clamp(r, lo, hi);
    const double clipped_obj = rc * t[i];
    if (unclipped <= clipped_obj) {
      objective += unclipped;
      d_logp[i] = r * t[i];
      d_t[i] = r;
    } else {
      objective += clipped_obj;
      d_logp[i] = (r > lo && r < hi) ? r * t[i] : 0.0;
      d_t[i] = rc;
    }
  }
  const double nd = static_cast<double>(n);
  res.loss = -objective / nd;
  res.clip_fraction = static_cast<double>(clipped) / nd;
  const VectorXr weights = -d_logp / nd;
  res.grads = log_prob_backward(policy, eval, in.actions, weights);
  // dH/dlog_std_i = 1 for every sample.
  res.grads.log_std.array() += -coef * eta * d_t.sum() / nd;
  return res;
}

SurrogateResult ppo_surrogate_loss(const GaussianPolicy<double>& policy, const MatrixXr& states,
                                   const MatrixXr& actions, const VectorXr& old_log_probs, const VectorXr& advantages,
                                   double eps) {
  SurrogateResult res;
  const Index n = states.rows();
  if (n == 0) throw ConfigError("surrogate loss needs at least one sample");
  const LogProbBatch<double> eval = log_prob_batch(policy, states, actions);
  const VectorXr ratio = (eval.log_probs - old_log_probs).array().exp().matrix();
  if (!ratio.allFinite()) {
    res.finite = false;
    res.grads = zeros_like(policy);
    return res;
  }
  VectorXr d_logp(n);
  double objective = 0.0;
  Index clipped = 0;
  for (Index i = 0; i < n; ++i) {
    const double r = ratio[i];
    const double rc = std::clamp(r, 1.0 - eps, 1.0 + eps);
    if (std::abs(r - 1.0) > eps) ++clipped;
    const double surr1 = r * advantages[i];
    const double surr2 = rc * advantages[i];
    if (surr1 <= surr2) {
      objective += surr1;
      d_logp[i] = r * advantages[i];
    } else {
      objective += surr2;
      d_logp[i] = (r > 1.0 - eps && r < 1.0 + eps) ? r * advantages[i] : 0.0;
    }
  }
  const double nd = static_cast<double>(n);
  res.loss = -objective / nd;
  res.clip_fraction = static_cast<double>(clipped) / nd;
  res.grads = log_prob_backward(policy, eval, actions, VectorXr(-d_logp / nd));
  return res;
}

ValueLossResult value_regression_loss(const ValueNet<double>& value, const MatrixXr& states, const VectorXr& targets,
                                      double coef) {
  if (targets.size() != states.rows()) throw ConfigError("value loss: target count does not match states");
  ForwardCache<double> cache;
  const VectorXr v = values_of(value, states, &cache);
  const VectorXr diff = v - targets;
  const double n = static_cast<double>(states.rows());
  ValueLossResult res;
  res.loss = coef * diff.squaredNorm() / n;
  const MatrixXr out_grad = (2.0 * coef / n) * diff;
  res.grads.net = mlp_backward(value.net, cache, out_grad);
  return res;
}

double mean_policy_kl(const GaussianPolicy<double>& old_policy, const GaussianPolicy<double>& new_policy,
                      const MatrixXr& states) {
  if (states.rows() == 0) return 0.0;
  const MatrixXr mu_old = mlp_forward_batch(old_policy.mean_net, states);
  const MatrixXr mu_new = mlp_forward_batch(new_policy.mean_net, states);
  const VectorXr var_old = (2.0 * old_policy.log_std.array()).exp().matrix();
  const VectorXr var_new = (2.0 * new_policy.log_std.array()).exp().matrix();
  const double const_part =
      (new_policy.log_std.array() - old_policy.log_std.array() + var_old.array() / (2.0 * var_new.array()) - 0.5).sum();
  const MatrixXr diff = mu_old - mu_new;
  const VectorXr mean_part =
      (diff.array().square().rowwise() / (2.0 * var_new.array()).transpose()).rowwise().sum().matrix();
  return const_part + mean_part.mean();
}

namespace {

struct Schedules {
  double lr;
  double eps;
  double eta;
  Index batch_steps;
};

Schedules schedules_for(const TrainerState& st, const TrainConfig& cfg) {
  if (st.steps_done >= cfg.total_steps) throw UsageError("training budget exhausted");
  const double progress = static_cast<double>(st.steps_done) / static_cast<double>(cfg.total_steps);
  Schedules s;
  s.lr = linear_schedule(cfg.lr_0, progress);
  s.eps = linear_schedule(cfg.clip_eps_0, progress);
  s.eta = linear_schedule(cfg.eta_0, progress);
  s.batch_steps = static_cast<Index>(std::min<std::int64_t>(cfg.steps_per_batch, cfg.total_steps - st.steps_done));
  return s;
}

// Concatenation of a batch's per-step data.
struct FlatBatch {
  MatrixXr states;
  MatrixXr next_states;
  MatrixXr actions;
  VectorXr old_log_probs;
  VectorXr next_entropies;
  VectorXr state_entropies;
};

FlatBatch flatten(const Batch& batch) {
  const Index n = batch.step_count();
  const Index sd = batch.trajectories.front().states.cols();
  const Index ad = batch.trajectories.front().actions.cols();
  FlatBatch f;
  f.states.resize(n, sd);
  f.next_states.resize(n, sd);
  f.actions.resize(n, ad);
  f.old_log_probs.resize(n);
  f.next_entropies.resize(n);
  f.state_entropies.resize(n);
  Index row = 0;
  for (const auto& tr : batch.trajectories) {
    const Index len = tr.length();
    f.states.middleRows(row, len) = tr.states.topRows(len);
    f.next_states.middleRows(row, len) = tr.states.bottomRows(len);
    f.actions.middleRows(row, len) = tr.actions;
    f.old_log_probs.segment(row, len) = tr.old_log_probs;
    f.next_entropies.segment(row, len) = tr.next_state_entropies;
    f.state_entropies.segment(row, len) = tr.state_entropies;
    row += len;
  }
  return f;
}

template <typename Derived>
MatrixXr gather_rows(const Eigen::MatrixBase<Derived>& m, const std::vector<Index>& rows) {
  return m(rows, Eigen::all);
}

VectorXr gather(const VectorXr& v, const std::vector<Index>& rows) { return v(rows); }

std::vector<std::vector<Index>> minibatch_order(Index n, int minibatch_size, Rng& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Index>> out;
  for (Index start = 0; start < n; start += minibatch_size) {
    const Index end = std::min<Index>(n, start + minibatch_size);
    out.emplace_back(perm.begin() + start, perm.begin() + end);
  }
  return out;
}

void fill_return_stats(IterationMetrics& m, const Batch& batch) {
  const std::vector<double> returns = batch.episode_returns();
  m.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
  m.min_return = *std::min_element(returns.begin(), returns.end());
  m.max_return = *std::max_element(returns.begin(), returns.end());
}

void write_diagnostic(const TrainerState& st) {
  if (st.diagnostic_path.empty()) return;
  try {
    save_checkpoint(st.diagnostic_path, {st.env->spec().name, st.policy, st.value});
  } catch (const std::exception&) {
  }
}

IterationMetrics spod_iteration_impl(TrainerState& st, const TrainConfig& cfg) {
  const Schedules sched = schedules_for(st, cfg);
  IterationMetrics metrics;
  metrics.lr = sched.lr;
  metrics.clip_eps = sched.eps;
  metrics.eta = sched.eta;

  // Collect with pi_{theta_k}, then build soft rewards from the same snapshot.
  Batch batch = collect_batch(st.policy, *st.env, sched.batch_steps, st.rng);
  for (auto& tr : batch.trajectories) tr.soft_rewards = augment_rewards(tr, st.policy, sched.eta);
  const FlatBatch flat = flatten(batch);
  const Index n = flat.states.rows();

  // Advantages: GAE on the current value net, TDAE on the shadow value net.
  const AdvantageConfig adv_cfg = cfg.advantage_config();
  metrics.gae_value_checksum = parameter_checksum(st.value);
  metrics.tdae_value_checksum = parameter_checksum(st.shadow.value);
  VectorXr advantages(n), targets(n);
  Index row = 0;
  for (const auto& tr : batch.trajectories) {
    const Index len = tr.length();
    const VectorXr current = values_of(st.value, tr.states);
    const auto current_tv = make_trajectory_values<double>(tr.soft_rewards, current, tr.terminated());
    if (cfg.estimator == Estimator::kGae) {
      advantages.segment(row, len) = gae(current_tv, cfg.gamma, cfg.lambda);
    } else {
      const VectorXr shadow = values_of(st.shadow.value, tr.states);
      advantages.segment(row, len) =
          dual_track_advantage<double>(tr.soft_rewards, current, shadow, tr.terminated(), adv_cfg);
    }
    if (cfg.value_target == ValueTarget::kLambdaReturn)
      targets.segment(row, len) = lambda_return(current_tv, cfg.gamma, cfg.lambda);
    else
      targets.segment(row, len) = rewards_to_go(tr, cfg.gamma, current_tv.values[len]);
    row += len;
  }

  // Shadow snapshot before optimizing: theta~_{k+1} = theta_k, phi~_{k+1} = phi_k.
  st.shadow = {st.policy, st.value};
  const GaussianPolicy<double> old_policy = st.policy;

  if (cfg.normalize_advantages) normalize_advantages(advantages);
  const MatrixXr& entropy_states = cfg.entropy_state == EntropyState::kNext ? flat.next_states : flat.states;
  const VectorXr& old_entropies = cfg.entropy_state == EntropyState::kNext ? flat.next_entropies : flat.state_entropies;

  double policy_loss_sum = 0.0, value_loss_sum = 0.0, clip_sum = 0.0;
  int updates = 0;
  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    for (const auto& idx : minibatch_order(n, cfg.minibatch_size, st.rng)) {
      SurrogateInputs in;
      in.states = gather_rows(flat.states, idx);
      in.actions = gather_rows(flat.actions, idx);
      in.old_log_probs = gather(flat.old_log_probs, idx);
      in.advantages = gather(advantages, idx);
      in.entropy_states = gather_rows(entropy_states, idx);
      in.old_entropies = gather(old_entropies, idx);
      SurrogateResult sur =
          clipped_surrogate_loss(st.policy, in, sched.eps, sched.eta, cfg.entropy_loss_coef, cfg.clip);
      if (!sur.finite) {
        ++metrics.skipped_minibatches;
        continue;
      }
      ValueLossResult vl = value_regression_loss(st.value, in.states, gather(targets, idx), cfg.value_loss_coef);
      if (sched.lr > 0.0) {
        clip_global_norm(sur.grads, cfg.max_grad_norm);
        adam_step(st.policy, sur.grads, st.policy_opt, sched.lr);
        clamp_log_std(st.policy);
        clip_global_norm(vl.grads, cfg.max_grad_norm);
        adam_step(st.value, vl.grads, st.value_opt, sched.lr);
      }
      policy_loss_sum += sur.loss;
      value_loss_sum += vl.loss;
      clip_sum += sur.clip_fraction;
      ++updates;
    }
  }

  st.steps_done += n;
  ++st.iteration;
  metrics.step = st.steps_done;
  fill_return_stats(metrics, batch);
  if (updates > 0) {
    metrics.policy_loss = policy_loss_sum / updates;
    metrics.value_loss = value_loss_sum / updates;
    metrics.clip_fraction = clip_sum / updates;
  }
  metrics.mean_entropy = entropy_of(st.policy);
  metrics.mean_kl = mean_policy_kl(old_policy, st.policy, flat.states);
  return metrics;
}

IterationMetrics ppo_iteration_impl(TrainerState& st, const TrainConfig& cfg) {
  const Schedules sched = schedules_for(st, cfg);
  IterationMetrics metrics;
  metrics.lr = sched.lr;
  metrics.clip_eps = sched.eps;
  metrics.eta = 0.0;

  const Batch batch = collect_batch(st.policy, *st.env, sched.batch_steps, st.rng);
  const FlatBatch flat = flatten(batch);
  const Index n = flat.states.rows();

  metrics.gae_value_checksum = parameter_checksum(st.value);
  metrics.tdae_value_checksum = 0;  // no second track
  VectorXr advantages(n), returns(n);
  Index row = 0;
  for (const auto& tr : batch.trajectories) {
    const Index len = tr.length();
    const auto tv = make_trajectory_values<double>(tr.raw_rewards, values_of(st.value, tr.states), tr.terminated());
    advantages.segment(row, len) = gae(tv, cfg.gamma, cfg.lambda);
    returns.segment(row, len) = rewards_to_go(tr, cfg.gamma, tv.values[len]);
    row += len;
  }
  const GaussianPolicy<double> old_policy = st.policy;
  if (cfg.normalize_advantages) normalize_advantages(advantages);

  double policy_loss_sum = 0.0, value_loss_sum = 0.0, clip_sum = 0.0;
  int updates = 0;
  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    for (const auto& idx : minibatch_order(n, cfg.minibatch_size, st.rng)) {
      const MatrixXr states = gather_rows(flat.states, idx);
      SurrogateResult sur = ppo_surrogate_loss(st.policy, states, gather_rows(flat.actions, idx),
                                               gather(flat.old_log_probs, idx), gather(advantages, idx), sched.eps);
      if (!sur.finite) {
        ++metrics.skipped_minibatches;
        continue;
      }
      ValueLossResult vl = value_regression_loss(st.value, states, gather(returns, idx), cfg.value_loss_coef);
      if (sched.lr > 0.0) {
        clip_global_norm(sur.grads, cfg.max_grad_norm);
        adam_step(st.policy, sur.grads, st.policy_opt, sched.lr);
        clamp_log_std(st.policy);
        clip_global_norm(vl.grads, cfg.max_grad_norm);
        adam_step(st.value, vl.grads, st.value_opt, sched.lr);
      }
      policy_loss_sum += sur.loss;
      value_loss_sum += vl.loss;
      clip_sum += sur.clip_fraction;
      ++updates;
    }
  }

  st.steps_done += n;
  ++st.iteration;
  metrics.step = st.steps_done;
  fill_return_stats(metrics, batch);
  if (updates > 0) {
    metrics.policy_loss = policy_loss_sum / updates;
    metrics.value_loss = value_loss_sum / updates;
    metrics.clip_fraction = clip_sum / updates;
  }
  metrics.mean_entropy = entropy_of(st.policy);
  metrics.mean_kl = mean_policy_kl(old_policy, st.policy, flat.states);
  return metrics;
}

}  // namespace

IterationMetrics train_iteration(TrainerState& state, const TrainConfig& cfg) {
  try {
    return spod_iteration_impl(state, cfg);
  } catch (const NumericError&) {
    write_diagnostic(state);
    throw;
  }
}

IterationMetrics ppo_iteration(TrainerState& state, const TrainConfig& cfg) {
  try {
    return ppo_iteration_impl(state, cfg);
  } catch (const NumericError&) {
    write_diagnostic(state);
    throw;
  }
}

IterationMetrics run_iteration(TrainerState& state, const TrainConfig& cfg) {
  return cfg.algorithm == Algorithm::kPpo ? ppo_iteration(state, cfg) : train_iteration(state, cfg);
}

}  // namespace dtae
