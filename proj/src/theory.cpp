#include "dtae/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "dtae/errors.hpp"

namespace dtae {

std::string CheckReport::to_line() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-24s %s instances=%lld max_violation=%.3e tolerance=%.1e", name.c_str(),
                passed ? "PASS" : "FAIL", static_cast<long long>(instances), max_violation, tolerance);
  std::string line = buf;
  if (!note.empty()) line += "  " + note;
  return line;
}

CheckReport make_report(std::string name, std::int64_t instances, double max_violation, double tolerance,
                        std::string note) {
  CheckReport r;
  r.name = std::move(name);
  r.instances = instances;
  r.max_violation = max_violation;
  r.tolerance = tolerance;
  r.passed = max_violation <= tolerance;
  r.note = std::move(note);
  return r;
}

int truncation_horizon(const TabularMDP& mdp, double eta, double tolerance) {
  const double max_entropy = std::log(static_cast<double>(mdp.n_actions));
  const double r_max = mdp.reward.cwiseAbs().maxCoeff() + std::abs(eta) * max_entropy;
  if (r_max == 0.0) return 1;
  const double target = tolerance / 10.0 * (1.0 - mdp.gamma) / r_max;
  return std::max(1, static_cast<int>(std::ceil(std::log(target) / std::log(mdp.gamma))) + 1);
}

PerformanceDifference performance_difference(const TabularMDP& mdp, const TabularPolicy& pi,
                                             const TabularPolicy& pi_hat, double eta, int horizon) {
  mdp.validate();
  validate_policy(mdp, pi);
  validate_policy(mdp, pi_hat);
  PerformanceDifference out;
  out.lhs = exact_policy_return(mdp, pi_hat, std::nullopt, eta) - exact_policy_return(mdp, pi, std::nullopt, eta);

  const Eigen::VectorXd v = state_values(mdp, pi, eta);
  const Eigen::MatrixXd q = action_values(mdp, pi, eta);
  const Eigen::VectorXd h_gap = policy_entropies(pi_hat) - policy_entropies(pi);
  Eigen::MatrixXd t_values(mdp.n_states, mdp.n_actions);
  for (Index a = 0; a < mdp.n_actions; ++a) t_values.col(a) = q.col(a) - v + eta * (mdp.transition[a] * h_gap);
  const Eigen::VectorXd expected_t = t_values.cwiseProduct(pi_hat).rowwise().sum();

  // Forward state distribution under pi_hat.
  const Eigen::MatrixXd p_hat = state_transition(mdp, pi_hat);
  Eigen::VectorXd dist = mdp.initial_dist;
  double discount = 1.0;
  for (int t = 0; t < horizon; ++t) {
    out.rhs += discount * dist.dot(expected_t);
    dist = p_hat.transpose() * dist;
    discount *= mdp.gamma;
  }
  return out;
}

CheckReport verify_theorem1(const TabularMDP& mdp, const TabularPolicy& pi, const TabularPolicy& pi_hat, double eta,
                            int horizon, double tolerance) {
  const auto pd = performance_difference(mdp, pi, pi_hat, eta, horizon);
  char note[96];
  std::snprintf(note, sizeof(note), "lhs=%.12g rhs=%.12g", pd.lhs, pd.rhs);
  return make_report("theorem1", 1, std::abs(pd.lhs - pd.rhs), tolerance, note);
}

CheckReport verify_theorem1_random(int n_mdps, double eta, std::uint64_t seed, double tolerance) {
  Rng rng(seed);
  std::uniform_int_distribution<int> states(2, 6), actions(2, 3);
  double worst = 0.0;
  for (int i = 0; i < n_mdps; ++i) {
    const Index ns = states(rng), na = actions(rng);
    const TabularMDP mdp = random_tabular_mdp(ns, na, 0.9, rng);
    const TabularPolicy pi = random_tabular_policy(ns, na, rng);
    const TabularPolicy pi_hat = random_tabular_policy(ns, na, rng);
    const auto pd = performance_difference(mdp, pi, pi_hat, eta, truncation_horizon(mdp, eta, tolerance));
    worst = std::max(worst, std::abs(pd.lhs - pd.rhs));
  }
  char name[48];
  std::snprintf(name, sizeof(name), "theorem1[eta=%g]", eta);
  return make_report(name, n_mdps, worst, tolerance);
}

double gaussian_kl_1d(double mu_p, double sigma_p, double mu_q, double sigma_q) {
  return std::log(sigma_q / sigma_p) + (sigma_p * sigma_p + (mu_p - mu_q) * (mu_p - mu_q)) / (2.0 * sigma_q * sigma_q) -
         0.5;
}

double gaussian_entropy_1d(double sigma) {
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * sigma * sigma);
}

std::vector<GaussianPair> random_gaussian_pairs(int count, double spread, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> mu(-2.0, 2.0), log_sigma(std::log(0.1), std::log(5.0)), jitter(-1.0, 1.0);
  std::vector<GaussianPair> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    GaussianPair p;
    p.mu = mu(rng);
    p.sigma = std::exp(log_sigma(rng));
    p.mu_hat = p.mu + p.sigma * spread * jitter(rng);
    p.sigma_hat = p.sigma * std::exp(spread * jitter(rng));
    pairs.push_back(p);
  }
  return pairs;
}

double max_entropy_gain(const std::vector<GaussianPair>& pairs, double delta) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pairs)
    if (gaussian_kl_1d(p.mu, p.sigma, p.mu_hat, p.sigma_hat) <= delta)
      best = std::max(best, gaussian_entropy_1d(p.sigma_hat) - gaussian_entropy_1d(p.sigma));
  return best;
}

CheckReport verify_lemma1(int n_pairs, double delta, std::uint64_t seed) {
  const double spread = 2.0 * std::sqrt(delta);
  const double bound = delta + 0.5;
  int accepted = 0;
  double worst = 0.0, best_gain = -std::numeric_limits<double>::infinity();
  std::uint64_t round = 0;
  while (accepted < n_pairs) {
    if (round > 1000) throw NumericError("lemma1: could not draw enough pairs inside the trust region");
    for (const auto& p : random_gaussian_pairs(n_pairs, spread, seed + 7919 * round)) {
      if (accepted == n_pairs) break;
      if (gaussian_kl_1d(p.mu, p.sigma, p.mu_hat, p.sigma_hat) > delta) continue;
      ++accepted;
      const double gain = gaussian_entropy_1d(p.sigma_hat) - gaussian_entropy_1d(p.sigma);
      best_gain = std::max(best_gain, gain);
      worst = std::max(worst, gain - bound);
    }
    ++round;
  }
  char name[48], note[64];
  std::snprintf(name, sizeof(name), "lemma1[delta=%g]", delta);
  std::snprintf(note, sizeof(note), "max_gain=%.4g bound=%.4g", best_gain, bound);
  return make_report(name, accepted, worst, 0.0, note);
}

CheckReport verify_lemma1_boundary(double delta, double tolerance) {
  const double sigma = 0.7;
  const double sigma_hat = sigma * std::exp(delta + 0.5);
  const double gain = gaussian_entropy_1d(sigma_hat) - gaussian_entropy_1d(sigma);
  char name[48];
  std::snprintf(name, sizeof(name), "lemma1_boundary[delta=%g]", delta);
  return make_report(name, 1, std::abs(gain - (delta + 0.5)), tolerance);
}

namespace {

double gaussian_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

template <typename F>
double simpson(F&& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

QuadratureResult total_variation_1d(double mu_p, double sigma_p, double mu_q, double sigma_q, int points_per_segment) {
  const double lo = std::min(mu_p - 12.0 * sigma_p, mu_q - 12.0 * sigma_q);
  const double hi = std::max(mu_p + 12.0 * sigma_p, mu_q + 12.0 * sigma_q);
  // Roots of ln p(x) = ln q(x): a x^2 + b x + c = 0.
  const double a = 0.5 / (sigma_q * sigma_q) - 0.5 / (sigma_p * sigma_p);
  const double b = mu_p / (sigma_p * sigma_p) - mu_q / (sigma_q * sigma_q);
  const double c =
      mu_q * mu_q / (2.0 * sigma_q * sigma_q) - mu_p * mu_p / (2.0 * sigma_p * sigma_p) + std::log(sigma_q / sigma_p);
  std::vector<double> cuts{lo, hi};
  if (std::abs(a) < 1e-14) {
    if (b != 0.0) cuts.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      cuts.push_back((-b + std::sqrt(disc)) / (2.0 * a));
      cuts.push_back((-b - std::sqrt(disc)) / (2.0 * a));
    }
  }
  // Extra cuts keep a narrow density from falling between grid points.
  for (double k : {-6.0, -3.0, -1.0, 1.0, 3.0, 6.0}) {
    cuts.push_back(mu_p + k * sigma_p);
    cuts.push_back(mu_q + k * sigma_q);
  }
  std::sort(cuts.begin(), cuts.end());
  auto abs_diff = [&](double x) { return std::abs(gaussian_pdf(x, mu_p, sigma_p) - gaussian_pdf(x, mu_q, sigma_q)); };
  auto p_only = [&](double x) { return gaussian_pdf(x, mu_p, sigma_p); };
  QuadratureResult out;
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double x0 = std::max(lo, cuts[i]), x1 = std::min(hi, cuts[i + 1]);
    if (x1 <= x0) continue;
    out.value += simpson(abs_diff, x0, x1, points_per_segment);
    mass += simpson(p_only, x0, x1, points_per_segment);
  }
  out.value *= 0.5;
  out.mass_error = std::abs(mass - 1.0);
  return out;
}

CheckReport verify_tv_kl(int n_pairs, std::uint64_t seed, double tolerance, int points_per_segment) {
  Rng rng(seed);
  std::uniform_real_distribution<double> mu(-3.0, 3.0), log_sigma(std::log(0.2), std::log(3.0));
  double worst = -std::numeric_limits<double>::infinity();
  double widen = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const double mp = mu(rng), sp = std::exp(log_sigma(rng)), mq = mu(rng), sq = std::exp(log_sigma(rng));
    const auto tv = total_variation_1d(mp, sp, mq, sq, points_per_segment);
    if (tv.mass_error > 1e-9) widen = std::max(widen, tv.mass_error);
    worst = std::max(worst, tv.value * tv.value - gaussian_kl_1d(mp, sp, mq, sq));
  }
  std::string note;
  if (widen > 0.0) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "warning: coarse grid, tolerance widened by %.2e", widen);
    note = buf;
  }
  return make_report("tv_kl", n_pairs, std::max(0.0, worst), tolerance + widen, note);
}

std::vector<CheckReport> run_all_checks(std::uint64_t seed) {
  std::vector<CheckReport> out;
  out.push_back(verify_theorem1_random(50, 0.0, seed));
  out.push_back(verify_theorem1_random(50, 0.1, seed + 1));
  out.push_back(verify_lemma1(10000, 0.01, seed + 2));
  out.push_back(verify_lemma1(10000, 0.1, seed + 3));
  out.push_back(verify_lemma1_boundary(0.01));
  out.push_back(verify_lemma1_boundary(0.1));
  out.push_back(verify_tv_kl(10000, seed + 4));
  const auto spot = total_variation_1d(0.0, 1.0, 1.0, 1.0);
  const double kl = gaussian_kl_1d(0.0, 1.0, 1.0, 1.0);
  char note[96];
  std::snprintf(note, sizeof(note), "kl=%.6f tv=%.6f tv^2=%.6f", kl, spot.value, spot.value * spot.value);
  out.push_back(make_report("tv_kl_spot[N(0,1)|N(1,1)]", 1, std::max(0.0, spot.value * spot.value - kl), 1e-9, note));
  return out;
}

}  // namespace dtae
