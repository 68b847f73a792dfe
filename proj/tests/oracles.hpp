#pragma once

// Slow reference implementations used as test oracles. Deliberately written as
// plain loops over std::vector so they share nothing with the library's
// Eigen-based recursions.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

// values has rewards.size() + 1 entries.
inline Vec td_errors(const Vec& r, const Vec& v, double gamma) {
  Vec d(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) d[t] = r[t] + gamma * v[t + 1] - v[t];
  return d;
}

// O(T^2) direct sum: A_t = sum_k (gamma lambda)^k delta_{t+k}
inline Vec gae_double_sum(const Vec& r, const Vec& v, double gamma, double lambda) {
  const Vec d = td_errors(r, v, gamma);
  Vec a(r.size(), 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    double w = 1.0;
    for (std::size_t k = t; k < r.size(); ++k) {
      a[t] += w * d[k];
      w *= gamma * lambda;
    }
  }
  return a;
}

// n-step return G_{t:t+n}, bootstrapped with V(s_{t+n}).
inline double n_step_return(const Vec& r, const Vec& v, double gamma, std::size_t t, std::size_t n) {
  double g = 0.0, w = 1.0;
  for (std::size_t l = 0; l < n; ++l) {
    g += w * r[t + l];
    w *= gamma;
  }
  return g + w * v[t + n];
}

// Forward view: (1 - lambda) sum_n lambda^{n-1} G_{t:t+n}, the last n taking the remaining mass.
inline Vec lambda_return_forward(const Vec& r, const Vec& v, double gamma, double lambda) {
  const std::size_t T = r.size();
  Vec out(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t N = T - t;
    double g = 0.0, w = 1.0;
    for (std::size_t n = 1; n < N; ++n) {
      g += (1.0 - lambda) * w * n_step_return(r, v, gamma, t, n);
      w *= lambda;
    }
    out[t] = g + w * n_step_return(r, v, gamma, t, N);
  }
  return out;
}

// Builds V^TD(s) = V(s) + alpha sum_k (gamma lambda)^k delta_{t+k} explicitly, then
// A^TD_t = r_{t+1} + gamma V^TD(s_{t+1}) - V^TD(s_t).
inline Vec tdae_constructive(const Vec& r, const Vec& v, double gamma, double lambda, double alpha) {
  const std::size_t T = r.size();
  const Vec d = td_errors(r, v, gamma);
  Vec v_td(T + 1);
  for (std::size_t t = 0; t <= T; ++t) {
    double s = 0.0, w = 1.0;
    for (std::size_t k = t; k < T; ++k) {
      s += w * d[k];
      w *= gamma * lambda;
    }
    v_td[t] = v[t] + alpha * s;
  }
  Vec a(T);
  for (std::size_t t = 0; t < T; ++t) a[t] = r[t] + gamma * v_td[t + 1] - v_td[t];
  return a;
}

// G_t = sum_l gamma^l r_{t+l} + gamma^{T-t} bootstrap
inline Vec rewards_to_go(const Vec& r, double gamma, double bootstrap) {
  const std::size_t T = r.size();
  Vec g(T);
  for (std::size_t t = 0; t < T; ++t) {
    double s = 0.0, w = 1.0;
    for (std::size_t l = t; l < T; ++l) {
      s += w * r[l];
      w *= gamma;
    }
    g[t] = s + w * bootstrap;
  }
  return g;
}

struct RandomTrajectory {
  Vec rewards;
  Vec values;
  bool terminal = false;
};

inline RandomTrajectory random_trajectory(std::mt19937_64& rng, std::size_t max_len = 200) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::bernoulli_distribution term(0.5);
  RandomTrajectory tr;
  const std::size_t T = len(rng);
  for (std::size_t t = 0; t < T; ++t) tr.rewards.push_back(u(rng));
  for (std::size_t t = 0; t <= T; ++t) tr.values.push_back(u(rng));
  tr.terminal = term(rng);
  if (tr.terminal) tr.values.back() = 0.0;
  return tr;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace oracle
