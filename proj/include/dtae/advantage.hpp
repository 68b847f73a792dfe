#pragma once

// TD errors, lambda-returns, GAE, TDAE and the dual-track combination.
//
// A trajectory of length T carries rewards r_1..r_T and values V(s_0)..V(s_T).
// Sums that run to infinity in the textbook definitions stop at the episode
// end; a time-limit truncation bootstraps through V(s_T), a true terminal has
// V(s_T) = 0.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "dtae/errors.hpp"
#include "dtae/nn.hpp"

namespace dtae {

enum class CombineMode { kMean, kMax, kMin, kBeta };

inline std::string_view to_string(CombineMode mode) {
  switch (mode) {
    case CombineMode::kMean:
      return "mean";
    case CombineMode::kMax:
      return "max";
    case CombineMode::kMin:
      return "min";
    case CombineMode::kBeta:
      return "beta";
  }
  return "mean";
}

inline CombineMode parse_combine_mode(std::string_view text) {
  if (text == "mean") return CombineMode::kMean;
  if (text == "max") return CombineMode::kMax;
  if (text == "min") return CombineMode::kMin;
  if (text == "beta") return CombineMode::kBeta;
  throw ConfigError("unknown combine mode '" + std::string(text) + "' (expected mean, max, min or beta)");
}

struct AdvantageConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double alpha = 0.1;
  CombineMode combine = CombineMode::kMean;
  std::optional<double> beta;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (lambda == 0.0 && alpha > 0.0) throw ConfigError("tdae is undefined for lambda = 0 with alpha > 0");
    if (combine == CombineMode::kBeta && !beta) throw ConfigError("combine=beta requires beta");
    if (beta && !(*beta >= 0.0 && *beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  }
};

template <typename Scalar>
struct TrajectoryValues {
  VectorX<Scalar> rewards;  // r_1..r_T
  VectorX<Scalar> values;   // V(s_0)..V(s_T)
  bool terminal = false;

  Index length() const { return rewards.size(); }
};

template <typename Scalar>
void validate(const TrajectoryValues<Scalar>& tv) {
  if (tv.values.size() != tv.rewards.size() + 1)
    throw ConfigError("trajectory values must have exactly one more entry than rewards");
  if (tv.terminal && tv.values[tv.rewards.size()] != Scalar(0))
    throw ConfigError("terminal trajectory must have V(s_T) = 0");
}

// Builds a trajectory, zeroing the final value when the episode truly terminated.
template <typename Scalar>
TrajectoryValues<Scalar> make_trajectory_values(VectorX<Scalar> rewards, VectorX<Scalar> values, bool terminal) {
  TrajectoryValues<Scalar> tv{std::move(rewards), std::move(values), terminal};
  if (tv.values.size() != tv.rewards.size() + 1)
    throw ConfigError("trajectory values must have exactly one more entry than rewards");
  if (terminal) tv.values[tv.rewards.size()] = Scalar(0);
  return tv;
}

// delta_t = r_{t+1} + gamma V(s_{t+1}) - V(s_t)
template <typename Scalar>
VectorX<Scalar> td_errors(const TrajectoryValues<Scalar>& tv, Scalar gamma) {
  validate(tv);
  const Index n = tv.length();
  return tv.rewards + gamma * tv.values.tail(n) - tv.values.head(n);
}

// Backward recursion A_t = delta_t + gamma lambda A_{t+1}, A_T = 0.
template <typename Scalar>
VectorX<Scalar> discounted_suffix_sum(const VectorX<Scalar>& deltas, Scalar decay) {
  VectorX<Scalar> out(deltas.size());
  Scalar acc = Scalar(0);
  for (Index t = deltas.size(); t-- > 0;) {
    acc = deltas[t] + decay * acc;
    out[t] = acc;
  }
  return out;
}

template <typename Scalar>
VectorX<Scalar> gae(const TrajectoryValues<Scalar>& tv, Scalar gamma, Scalar lambda) {
  if (!(lambda >= Scalar(0) && lambda <= Scalar(1))) throw ConfigError("lambda must lie in [0, 1]");
  return discounted_suffix_sum<Scalar>(td_errors(tv, gamma), gamma * lambda);
}

// G^lambda_t = V(s_t) + sum_k (gamma lambda)^k delta_{t+k}
template <typename Scalar>
VectorX<Scalar> lambda_return(const TrajectoryValues<Scalar>& tv, Scalar gamma, Scalar lambda) {
  return tv.values.head(tv.length()) + gae(tv, gamma, lambda);
}

// A^TD_t = (1 - alpha) delta_t + alpha (1 - lambda) gamma sum_k (gamma lambda)^k delta_{t+k+1}.
// The (1 - lambda) gamma factor replaces (1/lambda - 1) gamma lambda so small lambda stays finite.
template <typename Scalar>
VectorX<Scalar> tdae(const TrajectoryValues<Scalar>& tv, Scalar gamma, Scalar lambda, Scalar alpha) {
  if (!(alpha >= Scalar(0) && alpha <= Scalar(1))) throw ConfigError("alpha must lie in [0, 1]");
  if (!(lambda >= Scalar(0) && lambda <= Scalar(1))) throw ConfigError("lambda must lie in [0, 1]");
  if (lambda == Scalar(0) && alpha > Scalar(0)) throw ConfigError("tdae is undefined for lambda = 0 with alpha > 0");
  const VectorX<Scalar> deltas = td_errors(tv, gamma);
  const VectorX<Scalar> tail = discounted_suffix_sum<Scalar>(deltas, gamma * lambda);
  const Index n = deltas.size();
  VectorX<Scalar> out(n);
  const Scalar tail_weight = alpha * (Scalar(1) - lambda) * gamma;
  for (Index t = 0; t < n; ++t) {
    const Scalar future = (t + 1 < n) ? tail[t + 1] : Scalar(0);
    out[t] = (Scalar(1) - alpha) * deltas[t] + tail_weight * future;
  }
  return out;
}

template <typename Scalar>
VectorX<Scalar> dtae_combine(const VectorX<Scalar>& a_gae, const VectorX<Scalar>& a_tdae, CombineMode mode,
                             std::optional<double> beta = std::nullopt) {
  if (a_gae.size() != a_tdae.size()) throw ConfigError("dtae_combine: advantage lengths differ");
  switch (mode) {
    case CombineMode::kMean:
      return Scalar(0.5) * (a_gae + a_tdae);
    case CombineMode::kMax:
      return a_gae.cwiseMax(a_tdae);
    case CombineMode::kMin:
      return a_gae.cwiseMin(a_tdae);
    case CombineMode::kBeta: {
      if (!beta) throw ConfigError("combine=beta requires beta");
      const Scalar b = static_cast<Scalar>(*beta);
      return b * a_gae + (Scalar(1) - b) * a_tdae;
    }
  }
  throw ConfigError("unknown combine mode");
}

// GAE from the current value network, TDAE from the shadow value network, on
// the same sampled trajectory.
template <typename Scalar>
VectorX<Scalar> dual_track_advantage(const VectorX<Scalar>& rewards, const VectorX<Scalar>& current_values,
                                     const VectorX<Scalar>& shadow_values, bool terminal, const AdvantageConfig& cfg) {
  cfg.validate();
  const auto current = make_trajectory_values<Scalar>(rewards, current_values, terminal);
  const auto shadow = make_trajectory_values<Scalar>(rewards, shadow_values, terminal);
  const Scalar gamma = static_cast<Scalar>(cfg.gamma);
  const Scalar lambda = static_cast<Scalar>(cfg.lambda);
  return dtae_combine<Scalar>(gae(current, gamma, lambda), tdae(shadow, gamma, lambda, static_cast<Scalar>(cfg.alpha)),
                              cfg.combine, cfg.beta);
}

// Zero mean, unit standard deviation. A constant batch is only centred.
template <typename Scalar>
void normalize_advantages(VectorX<Scalar>& advantages) {
  if (advantages.size() == 0) return;
  const Scalar mean = advantages.mean();
  advantages.array() -= mean;
  const Scalar var = advantages.squaredNorm() / Scalar(advantages.size());
  advantages /= std::sqrt(var) + Scalar(1e-8);
}

}  // namespace dtae
