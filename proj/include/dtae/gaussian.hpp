#pragma once

// Diagonal Gaussian policy with a state-independent log standard deviation,
// and the scalar soft value network. All entropies and KLs are in nats.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <type_traits>

#include "dtae/nn.hpp"

namespace dtae {

template <typename Scalar_>
struct GaussianPolicy {
  using Scalar = Scalar_;
  static constexpr double kMinLogStd = -20.0;
  static constexpr double kMaxLogStd = 2.0;

  MlpParams<Scalar> mean_net;
  VectorX<Scalar> log_std;

  Index state_dim() const { return mean_net.input_dim(); }
  Index action_dim() const { return mean_net.output_dim(); }
};

template <typename Scalar_>
struct ValueNet {
  using Scalar = Scalar_;
  MlpParams<Scalar> net;

  Index state_dim() const { return net.input_dim(); }
};

template <typename T>
struct is_gaussian_policy : std::false_type {};
template <typename S>
struct is_gaussian_policy<GaussianPolicy<S>> : std::true_type {};
template <typename T>
struct is_value_net : std::false_type {};
template <typename S>
struct is_value_net<ValueNet<S>> : std::true_type {};

template <typename T>
concept GaussianPolicyType = is_gaussian_policy<std::remove_cvref_t<T>>::value;
template <typename T>
concept ValueNetType = is_value_net<std::remove_cvref_t<T>>::value;

template <typename F, GaussianPolicyType First, GaussianPolicyType... Rest>
void for_each_tensor(F&& f, First& first, Rest&... rest) {
  for_each_tensor(f, first.mean_net, rest.mean_net...);
  f(first.log_std, rest.log_std...);
}

template <typename F, ValueNetType First, ValueNetType... Rest>
void for_each_tensor(F&& f, First& first, Rest&... rest) {
  for_each_tensor(f, first.net, rest.net...);
}

template <typename P>
  requires GaussianPolicyType<P> || ValueNetType<P>
std::remove_cvref_t<P> zeros_like(const P& params) {
  std::remove_cvref_t<P> z = params;
  for_each_tensor([](auto& t) { t.setZero(); }, z);
  return z;
}

template <typename Scalar>
GaussianPolicy<Scalar> make_gaussian_policy(Index state_dim, Index action_dim, Index hidden_units, Rng& rng,
                                            Scalar initial_log_std = Scalar(0)) {
  const std::array<Index, 4> sizes{state_dim, hidden_units, hidden_units, action_dim};
  GaussianPolicy<Scalar> p;
  p.mean_net = init_mlp<Scalar>(sizes, Scalar(0.01), rng);
  p.log_std = VectorX<Scalar>::Constant(action_dim, initial_log_std);
  return p;
}

template <typename Scalar>
ValueNet<Scalar> make_value_net(Index state_dim, Index hidden_units, Rng& rng) {
  const std::array<Index, 4> sizes{state_dim, hidden_units, hidden_units, 1};
  return ValueNet<Scalar>{init_mlp<Scalar>(sizes, Scalar(1), rng)};
}

// Projects log_std back into [kMinLogStd, kMaxLogStd] after an optimizer step.
template <typename Scalar>
void clamp_log_std(GaussianPolicy<Scalar>& policy) {
  policy.log_std = policy.log_std.cwiseMax(Scalar(GaussianPolicy<Scalar>::kMinLogStd))
                       .cwiseMin(Scalar(GaussianPolicy<Scalar>::kMaxLogStd));
}

template <typename Scalar>
struct DiagGaussian {
  VectorX<Scalar> mean;
  VectorX<Scalar> log_std;
};

template <typename Scalar>
Scalar log_density(const DiagGaussian<Scalar>& dist, const std::type_identity_t<VectorX<Scalar>>& action) {
  if (action.size() != dist.mean.size()) throw ConfigError("action dim does not match distribution");
  const Scalar half_log_2pi = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  const auto z = ((action - dist.mean).array() * (-dist.log_std.array()).exp());
  return (Scalar(-0.5) * z.square() - dist.log_std.array() - half_log_2pi).sum();
}

// sum_i 1/2 ln(2 pi e sigma_i^2)
template <typename Scalar>
Scalar gaussian_entropy(const VectorX<Scalar>& log_std) {
  const Scalar per_dim = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar> * std::numbers::e_v<Scalar>);
  return (log_std.array() + per_dim).sum();
}

// KL(p || q) for diagonal Gaussians.
template <typename Scalar>
Scalar kl_divergence(const DiagGaussian<Scalar>& p, const DiagGaussian<Scalar>& q) {
  if (p.mean.size() != q.mean.size()) throw ConfigError("kl: action dims differ");
  const auto var_p = (Scalar(2) * p.log_std.array()).exp();
  const auto var_q = (Scalar(2) * q.log_std.array()).exp();
  const auto diff = (p.mean - q.mean).array();
  return (q.log_std.array() - p.log_std.array() + (var_p + diff.square()) / (Scalar(2) * var_q) - Scalar(0.5)).sum();
}

template <typename Scalar>
VectorX<Scalar> policy_mean(const GaussianPolicy<Scalar>& policy, const std::type_identity_t<VectorX<Scalar>>& state) {
  return mlp_forward(policy.mean_net, state).output;
}

template <typename Scalar>
DiagGaussian<Scalar> distribution_at(const GaussianPolicy<Scalar>& policy,
                                     const std::type_identity_t<VectorX<Scalar>>& state) {
  return {policy_mean(policy, state), policy.log_std};
}

template <typename Scalar>
struct ActionSample {
  VectorX<Scalar> action;
  Scalar log_prob;
};

// deterministic=true returns the mean action (with its log-density).
template <typename Scalar>
ActionSample<Scalar> sample_action(const GaussianPolicy<Scalar>& policy,
                                   const std::type_identity_t<VectorX<Scalar>>& state, Rng& rng,
                                   bool deterministic = false) {
  DiagGaussian<Scalar> dist = distribution_at(policy, state);
  VectorX<Scalar> action = dist.mean;
  if (!deterministic) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < action.size(); ++i) action[i] += std::exp(dist.log_std[i]) * static_cast<Scalar>(normal(rng));
  }
  const Scalar lp = log_density(dist, action);
  return {std::move(action), lp};
}

template <typename Scalar>
Scalar log_prob_of(const GaussianPolicy<Scalar>& policy, const std::type_identity_t<VectorX<Scalar>>& state,
                   const std::type_identity_t<VectorX<Scalar>>& action) {
  return log_density(distribution_at(policy, state), action);
}

// The state argument is accepted for interface symmetry; log_std does not depend on it.
template <typename Scalar>
Scalar entropy_of(const GaussianPolicy<Scalar>& policy, const std::type_identity_t<VectorX<Scalar>>& /*state*/) {
  return gaussian_entropy(policy.log_std);
}

template <typename Scalar>
Scalar entropy_of(const GaussianPolicy<Scalar>& policy) {
  return gaussian_entropy(policy.log_std);
}

template <typename Scalar>
Scalar kl_divergence(const GaussianPolicy<Scalar>& p, const GaussianPolicy<Scalar>& q,
                     const std::type_identity_t<VectorX<Scalar>>& state) {
  return kl_divergence(distribution_at(p, state), distribution_at(q, state));
}

// Batched log-probabilities, keeping what the backward pass needs.
template <typename Scalar>
struct LogProbBatch {
  MatrixX<Scalar> means;
  ForwardCache<Scalar> cache;
  VectorX<Scalar> log_probs;
};

template <typename Scalar>
LogProbBatch<Scalar> log_prob_batch(const GaussianPolicy<Scalar>& policy,
                                    const std::type_identity_t<MatrixX<Scalar>>& states,
                                    const std::type_identity_t<MatrixX<Scalar>>& actions) {
  if (actions.rows() != states.rows() || actions.cols() != policy.action_dim())
    throw ConfigError("log_prob_batch: action matrix shape mismatch");
  LogProbBatch<Scalar> out;
  out.means = mlp_forward_batch(policy.mean_net, states, &out.cache);
  const Scalar half_log_2pi = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  const auto inv_std = (-policy.log_std.array()).exp().matrix().transpose();
  const MatrixX<Scalar> z = (actions - out.means).array().rowwise() * inv_std.array();
  out.log_probs = (Scalar(-0.5) * z.array().square()).rowwise().sum().matrix();
  out.log_probs.array() -= policy.log_std.sum() + half_log_2pi * Scalar(policy.action_dim());
  return out;
}

// Gradient of sum_i weights_i * log pi(a_i | s_i).
template <typename Scalar>
GaussianPolicy<Scalar> log_prob_backward(const GaussianPolicy<Scalar>& policy, const LogProbBatch<Scalar>& eval,
                                         const std::type_identity_t<MatrixX<Scalar>>& actions,
                                         const std::type_identity_t<VectorX<Scalar>>& weights) {
  const auto inv_var = (Scalar(-2) * policy.log_std.array()).exp().matrix().transpose();
  const MatrixX<Scalar> diff = actions - eval.means;
  // d logp / d mean = (a - mu) / sigma^2
  MatrixX<Scalar> mean_grad = diff.array().rowwise() * inv_var.array();
  mean_grad.array().colwise() *= weights.array();
  GaussianPolicy<Scalar> grads;
  grads.mean_net = mlp_backward(policy.mean_net, eval.cache, mean_grad);
  // d logp / d log_std = ((a - mu) / sigma)^2 - 1
  const MatrixX<Scalar> z2 = diff.array().square().rowwise() * inv_var.array();
  grads.log_std = ((z2.array() - Scalar(1)).colwise() * weights.array()).colwise().sum().transpose();
  return grads;
}

template <typename Scalar>
GaussianPolicy<Scalar> log_prob_gradient(const GaussianPolicy<Scalar>& policy,
                                         const std::type_identity_t<VectorX<Scalar>>& state,
                                         const std::type_identity_t<VectorX<Scalar>>& action) {
  MatrixX<Scalar> s = state.transpose();
  MatrixX<Scalar> a = action.transpose();
  const auto eval = log_prob_batch(policy, s, a);
  return log_prob_backward(policy, eval, a, VectorX<Scalar>::Ones(1));
}

// d H / d log_std_i = 1; the mean network does not enter the entropy.
template <typename Scalar>
GaussianPolicy<Scalar> entropy_gradient(const GaussianPolicy<Scalar>& policy) {
  GaussianPolicy<Scalar> grads = zeros_like(policy);
  grads.log_std.setOnes();
  return grads;
}

template <typename Scalar>
Scalar value_of(const ValueNet<Scalar>& value, const std::type_identity_t<VectorX<Scalar>>& state) {
  return mlp_forward(value.net, state).output[0];
}

template <typename Scalar>
VectorX<Scalar> values_of(const ValueNet<Scalar>& value, const std::type_identity_t<MatrixX<Scalar>>& states,
                          ForwardCache<Scalar>* cache = nullptr) {
  return mlp_forward_batch(value.net, states, cache).col(0);
}

}  // namespace dtae
