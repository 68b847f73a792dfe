#pragma once

// Soft policy optimization with the dual-track advantage estimator, plus a
// plain PPO iteration kept as an independent reference path.

#include <cstdint>
#include <memory>
#include <string>

#include "dtae/advantage.hpp"
#include "dtae/envs.hpp"
#include "dtae/gaussian.hpp"
#include "dtae/rollout.hpp"

namespace dtae {

enum class Algorithm { kSpod, kPpo };
enum class Estimator { kDtae, kGae };
// Where the entropy difference inside T_t is evaluated.
enum class EntropyState { kNext, kCurrent };
enum class ValueTarget { kRewardsToGo, kLambdaReturn };

struct TrainConfig {
  std::string env = "point_mass";
  Algorithm algorithm = Algorithm::kSpod;

  double gamma = 0.99;
  double lambda = 0.95;
  double alpha = 0.1;
  double eta_0 = 1e-3;
  double clip_eps_0 = 0.2;
  double lr_0 = 3e-4;
  double entropy_loss_coef = 1.0;
  double value_loss_coef = 0.5;
  int minibatch_size = 64;
  int epochs_per_batch = 10;
  int steps_per_batch = 2048;
  std::int64_t total_steps = 150000;

  Estimator estimator = Estimator::kDtae;
  CombineMode combine = CombineMode::kMean;
  double beta = 0.99;
  bool clip = true;
  bool normalize_advantages = true;
  EntropyState entropy_state = EntropyState::kNext;
  ValueTarget value_target = ValueTarget::kRewardsToGo;
  double max_grad_norm = 0.5;
  int hidden_units = 64;
  double initial_log_std = 0.0;
  std::uint64_t seed = 0;

  AdvantageConfig advantage_config() const;
  void validate() const;
};

// initial * (1 - progress), progress in [0, 1].
double linear_schedule(double initial, double progress);

struct ShadowState {
  GaussianPolicy<double> policy;
  ValueNet<double> value;
};

struct TrainerState {
  std::unique_ptr<Environment> env;
  GaussianPolicy<double> policy;
  ValueNet<double> value;
  ShadowState shadow;
  AdamState<GaussianPolicy<double>> policy_opt;
  AdamState<ValueNet<double>> value_opt;
  Rng rng;
  std::int64_t steps_done = 0;
  int iteration = 0;
  std::string diagnostic_path;  // checkpoint written here when an iteration hits a numeric error
};

TrainerState make_trainer_state(const TrainConfig& cfg);

struct IterationMetrics {
  std::int64_t step = 0;  // cumulative environment steps after this iteration
  double mean_return = 0.0;
  double min_return = 0.0;
  double max_return = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double mean_entropy = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  double lr = 0.0;
  double clip_eps = 0.0;
  double eta = 0.0;
  int skipped_minibatches = 0;
  // Checksums of the value parameters read by each advantage track.
  std::uint64_t gae_value_checksum = 0;
  std::uint64_t tdae_value_checksum = 0;

  bool operator==(const IterationMetrics&) const = default;
};

// One minibatch worth of policy-loss inputs.
struct SurrogateInputs {
  MatrixXr states;
  MatrixXr actions;
  VectorXr old_log_probs;
  VectorXr advantages;      // A^H, already combined and normalized
  MatrixXr entropy_states;  // s_{t+1} or s_t, per EntropyState
  VectorXr old_entropies;   // H(pi_old) at entropy_states, cached at collection
};

// T_t = A_t + coef * eta * (H_theta(s*) - H_old(s*)).
VectorXr compute_t_terms(const GaussianPolicy<double>& policy, const SurrogateInputs& in, double eta, double coef);

struct SurrogateResult {
  double loss = 0.0;
  GaussianPolicy<double> grads;
  double clip_fraction = 0.0;
  bool finite = true;
};

// -mean(min(r T, clip(r, 1-eps, 1+eps) T)); with clip=false, -mean(r T).
// Gradients flow through r and through the entropy term inside T.
SurrogateResult clipped_surrogate_loss(const GaussianPolicy<double>& policy, const SurrogateInputs& in, double eps,
                                       double eta, double coef, bool clip = true);

// Standard PPO loss on raw advantages; shares no code with the soft surrogate
// beyond the log-probability primitives.
SurrogateResult ppo_surrogate_loss(const GaussianPolicy<double>& policy, const MatrixXr& states,
                                   const MatrixXr& actions, const VectorXr& old_log_probs, const VectorXr& advantages,
                                   double eps);

struct ValueLossResult {
  double loss = 0.0;
  ValueNet<double> grads;
};

// coef * mean((V(s) - target)^2)
ValueLossResult value_regression_loss(const ValueNet<double>& value, const MatrixXr& states, const VectorXr& targets,
                                      double coef);

double mean_policy_kl(const GaussianPolicy<double>& old_policy, const GaussianPolicy<double>& new_policy,
                      const MatrixXr& states);

IterationMetrics train_iteration(TrainerState& state, const TrainConfig& cfg);
IterationMetrics ppo_iteration(TrainerState& state, const TrainConfig& cfg);
// Dispatches on cfg.algorithm.
IterationMetrics run_iteration(TrainerState& state, const TrainConfig& cfg);

}  // namespace dtae
