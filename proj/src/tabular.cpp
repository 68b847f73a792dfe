#include "dtae/tabular.hpp"

#include <cmath>
#include <random>

#include "dtae/errors.hpp"

namespace dtae {

void TabularMDP::validate() const {
  if (n_states < 1 || n_actions < 1) throw ConfigError("tabular mdp needs at least one state and action");
  if (static_cast<Index>(transition.size()) != n_actions) throw ConfigError("one transition matrix per action");
  for (const auto& p : transition) {
    if (p.rows() != n_states || p.cols() != n_states) throw ConfigError("transition matrix must be n_states square");
    if ((p.array() < 0.0).any()) throw ConfigError("negative transition probability");
    if (((p.rowwise().sum().array() - 1.0).abs() > 1e-12).any()) throw ConfigError("transition rows must sum to 1");
  }
  if (reward.rows() != n_states || reward.cols() != n_actions) throw ConfigError("reward must be n_states x n_actions");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("tabular gamma must lie in (0, 1)");
  if (initial_dist.size() != n_states || std::abs(initial_dist.sum() - 1.0) > 1e-12)
    throw ConfigError("initial distribution must have n_states entries summing to 1");
}

void validate_policy(const TabularMDP& mdp, const TabularPolicy& policy) {
  if (policy.rows() != mdp.n_states || policy.cols() != mdp.n_actions)
    throw ConfigError("policy must be n_states x n_actions");
  if ((policy.array() < 0.0).any() || ((policy.rowwise().sum().array() - 1.0).abs() > 1e-12).any())
    throw ConfigError("policy rows must be probability distributions");
}

Eigen::VectorXd policy_entropies(const TabularPolicy& policy) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(policy.rows());
  for (Index s = 0; s < policy.rows(); ++s)
    for (Index a = 0; a < policy.cols(); ++a) {
      const double p = policy(s, a);
      if (p > 0.0) h[s] -= p * std::log(p);
    }
  return h;
}

Eigen::MatrixXd soft_rewards(const TabularMDP& mdp, const TabularPolicy& entropy_policy, double eta) {
  Eigen::MatrixXd r = mdp.reward;
  if (eta == 0.0) return r;
  const Eigen::VectorXd h = policy_entropies(entropy_policy);
  for (Index a = 0; a < mdp.n_actions; ++a) r.col(a) += eta * (mdp.transition[a] * h);
  return r;
}

Eigen::MatrixXd state_transition(const TabularMDP& mdp, const TabularPolicy& policy) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_states);
  for (Index a = 0; a < mdp.n_actions; ++a) p += policy.col(a).asDiagonal() * mdp.transition[a];
  return p;
}

Eigen::VectorXd state_values(const TabularMDP& mdp, const TabularPolicy& policy, double eta,
                             std::optional<int> horizon) {
  mdp.validate();
  validate_policy(mdp, policy);
  const Eigen::VectorXd r_pi = soft_rewards(mdp, policy, eta).cwiseProduct(policy).rowwise().sum();
  const Eigen::MatrixXd p_pi = state_transition(mdp, policy);
  if (!horizon) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * p_pi;
    return a.fullPivLu().solve(r_pi);
  }
  if (*horizon < 0) throw ConfigError("horizon must be non-negative");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.n_states);
  for (int k = 0; k < *horizon; ++k) v = r_pi + mdp.gamma * p_pi * v;
  return v;
}

Eigen::MatrixXd action_values(const TabularMDP& mdp, const TabularPolicy& policy, double eta) {
  const Eigen::VectorXd v = state_values(mdp, policy, eta);
  Eigen::MatrixXd q = soft_rewards(mdp, policy, eta);
  for (Index a = 0; a < mdp.n_actions; ++a) q.col(a) += mdp.gamma * (mdp.transition[a] * v);
  return q;
}

double exact_policy_return(const TabularMDP& mdp, const TabularPolicy& policy, std::optional<int> horizon, double eta) {
  return mdp.initial_dist.dot(state_values(mdp, policy, eta, horizon));
}

namespace {

Eigen::VectorXd random_simplex_point(Index n, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) x[i] = expo(rng);
  return x / x.sum();
}

}  // namespace

TabularMDP random_tabular_mdp(Index n_states, Index n_actions, double gamma, Rng& rng) {
  TabularMDP mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index a = 0; a < n_actions; ++a) {
    Eigen::MatrixXd p(n_states, n_states);
    for (Index s = 0; s < n_states; ++s) p.row(s) = random_simplex_point(n_states, rng).transpose();
    mdp.transition.push_back(std::move(p));
  }
  mdp.reward.resize(n_states, n_actions);
  for (Index s = 0; s < n_states; ++s)
    for (Index a = 0; a < n_actions; ++a) mdp.reward(s, a) = u(rng);
  mdp.initial_dist = random_simplex_point(n_states, rng);
  return mdp;
}

TabularPolicy random_tabular_policy(Index n_states, Index n_actions, Rng& rng) {
  TabularPolicy pi(n_states, n_actions);
  for (Index s = 0; s < n_states; ++s) pi.row(s) = random_simplex_point(n_actions, rng).transpose();
  return pi;
}

}  // namespace dtae
