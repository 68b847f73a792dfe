#pragma once

// Exact finite MDPs for checking estimators and the soft performance-difference
// identity without sampling noise.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dtae/nn.hpp"

namespace dtae {

struct TabularMDP {
  Index n_states = 0;
  Index n_actions = 0;
  std::vector<Eigen::MatrixXd> transition;  // transition[a](s, s') = P(s' | s, a)
  Eigen::MatrixXd reward;                   // reward(s, a)
  double gamma = 0.99;
  Eigen::VectorXd initial_dist;

  void validate() const;
};

// policy(s, a) = pi(a | s); each row sums to one.
using TabularPolicy = Eigen::MatrixXd;

void validate_policy(const TabularMDP& mdp, const TabularPolicy& policy);

// H(s) = -sum_a pi(a|s) ln pi(a|s), with 0 ln 0 = 0.
Eigen::VectorXd policy_entropies(const TabularPolicy& policy);

// r^H(s, a) = r(s, a) + eta * E_{s' ~ P(.|s,a)} H_entropy_policy(s').
Eigen::MatrixXd soft_rewards(const TabularMDP& mdp, const TabularPolicy& entropy_policy, double eta);

// Markov chain over states induced by the policy: P_pi(s, s').
Eigen::MatrixXd state_transition(const TabularMDP& mdp, const TabularPolicy& policy);

// V^H_pi: exact linear solve when horizon is empty, else the finite-horizon sum
// of the first `horizon` discounted soft rewards.
Eigen::VectorXd state_values(const TabularMDP& mdp, const TabularPolicy& policy, double eta = 0.0,
                             std::optional<int> horizon = std::nullopt);

// Q^H_pi(s, a) = r^H(s, a) + gamma sum_s' P(s'|s,a) V^H_pi(s'), infinite horizon.
Eigen::MatrixXd action_values(const TabularMDP& mdp, const TabularPolicy& policy, double eta = 0.0);

// J(pi) = rho . V^H_pi. eta = 0 gives the plain discounted return.
double exact_policy_return(const TabularMDP& mdp, const TabularPolicy& policy,
                           std::optional<int> horizon = std::nullopt, double eta = 0.0);

// Random Dirichlet(1)-style rows for P and rho, rewards ~ U[0, 1].
TabularMDP random_tabular_mdp(Index n_states, Index n_actions, double gamma, Rng& rng);
TabularPolicy random_tabular_policy(Index n_states, Index n_actions, Rng& rng);

}  // namespace dtae
