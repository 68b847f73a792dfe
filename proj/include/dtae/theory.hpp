#pragma once

// Numerical checks of the soft performance-difference identity, the Gaussian
// entropy-difference bound under a KL trust region, and D_TV^2 <= D_KL.

#include <cstdint>
#include <string>
#include <vector>

#include "dtae/tabular.hpp"

namespace dtae {

struct CheckReport {
  std::string name;
  std::int64_t instances = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::string note;

  std::string to_line() const;
};

// passed = max_violation <= tolerance
CheckReport make_report(std::string name, std::int64_t instances, double max_violation, double tolerance,
                        std::string note = {});

// Smallest T with gamma^T max|r^H| / (1 - gamma) < tolerance / 10.
int truncation_horizon(const TabularMDP& mdp, double eta, double tolerance);

struct PerformanceDifference {
  double lhs = 0.0;  // J^H(pi_hat) - J^H(pi), exact
  double rhs = 0.0;  // sum_{t<horizon} gamma^t E_{pi_hat}[T_pi(s_t, a_t)]
};

// J^H uses the soft reward r + eta E_{s'} H(s'), with H = -sum pi ln pi. T_pi is
// A^H_pi(s, a) + eta E_{s'}[H_hat(s') - H(s')].
PerformanceDifference performance_difference(const TabularMDP& mdp, const TabularPolicy& pi,
                                             const TabularPolicy& pi_hat, double eta, int horizon);

CheckReport verify_theorem1(const TabularMDP& mdp, const TabularPolicy& pi, const TabularPolicy& pi_hat, double eta,
                            int horizon, double tolerance = 1e-8);
// Random MDPs with 2..6 states, 2..3 actions, gamma = 0.9.
CheckReport verify_theorem1_random(int n_mdps, double eta, std::uint64_t seed, double tolerance = 1e-8);

struct GaussianPair {
  double mu = 0.0, sigma = 1.0;          // pi
  double mu_hat = 0.0, sigma_hat = 1.0;  // pi_hat
};

double gaussian_kl_1d(double mu_p, double sigma_p, double mu_q, double sigma_q);
double gaussian_entropy_1d(double sigma);

// Pairs near each other so a useful share satisfies KL(pi || pi_hat) <= delta.
std::vector<GaussianPair> random_gaussian_pairs(int count, double spread, std::uint64_t seed);

// Largest H(pi_hat) - H(pi) over pairs with KL(pi || pi_hat) <= delta; -inf if none qualify.
double max_entropy_gain(const std::vector<GaussianPair>& pairs, double delta);

// Draws until n_pairs pairs satisfy the KL constraint, then checks
// H(pi_hat) - H(pi) <= delta + 1/2 on each.
CheckReport verify_lemma1(int n_pairs, double delta, std::uint64_t seed);

// sigma_hat / sigma = e^{delta + 1/2}: the entropy gap equals delta + 1/2.
// Violation is |gap - (delta + 1/2)|.
CheckReport verify_lemma1_boundary(double delta, double tolerance = 1e-9);

// 1/2 int |p - q| by composite Simpson between the density crossing points.
struct QuadratureResult {
  double value = 0.0;
  double mass_error = 0.0;  // |int p - 1| on the same grid
};
QuadratureResult total_variation_1d(double mu_p, double sigma_p, double mu_q, double sigma_q,
                                    int points_per_segment = 400);

// D_TV^2 <= D_KL + tolerance on random pairs. A grid whose mass error exceeds
// 1e-9 widens the tolerance by that error and notes it.
CheckReport verify_tv_kl(int n_pairs, std::uint64_t seed, double tolerance = 1e-9, int points_per_segment = 400);

std::vector<CheckReport> run_all_checks(std::uint64_t seed);

}  // namespace dtae
