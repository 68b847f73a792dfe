#pragma once

// Dense two-hidden-layer MLPs with hand-written reverse mode and Adam.
//
// Every layer stores its weight as an (out x in) row-major matrix. Hidden
// layers use ReLU, the final layer is linear. Batched entry points take one
// sample per row.

#include <Eigen/Dense>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dtae/errors.hpp"

namespace dtae {

using Index = Eigen::Index;
using Rng = std::mt19937_64;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXr = MatrixX<double>;
using VectorXr = VectorX<double>;

enum class Activation { kReLU };

template <typename Scalar_>
struct MlpParams {
  using Scalar = Scalar_;

  std::vector<MatrixX<Scalar>> weights;
  std::vector<VectorX<Scalar>> biases;
  Activation activation = Activation::kReLU;

  std::size_t num_layers() const { return weights.size(); }
  Index input_dim() const { return weights.empty() ? 0 : weights.front().cols(); }
  Index output_dim() const { return weights.empty() ? 0 : weights.back().rows(); }

  Index parameter_count() const {
    Index n = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
    return n;
  }
};

template <typename T>
struct is_mlp_params : std::false_type {};
template <typename S>
struct is_mlp_params<MlpParams<S>> : std::true_type {};
template <typename T>
concept MlpParamsType = is_mlp_params<std::remove_cvref_t<T>>::value;

// Visits matching tensors of several identically-shaped parameter sets.
template <typename F, MlpParamsType First, MlpParamsType... Rest>
void for_each_tensor(F&& f, First& first, Rest&... rest) {
  for (std::size_t i = 0; i < first.weights.size(); ++i) {
    f(first.weights[i], rest.weights[i]...);
    f(first.biases[i], rest.biases[i]...);
  }
}

template <typename Scalar>
bool same_shape(const MlpParams<Scalar>& a, const MlpParams<Scalar>& b) {
  if (a.weights.size() != b.weights.size() || a.biases.size() != b.biases.size()) return false;
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    if (a.weights[i].rows() != b.weights[i].rows() || a.weights[i].cols() != b.weights[i].cols() ||
        a.biases[i].size() != b.biases[i].size())
      return false;
  }
  return true;
}

template <typename Scalar>
void validate(const MlpParams<Scalar>& params) {
  if (params.weights.empty()) throw ConfigError("mlp has no layers");
  if (params.weights.size() != params.biases.size()) throw ConfigError("mlp weight/bias layer counts differ");
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    if (params.biases[i].size() != params.weights[i].rows())
      throw ConfigError("mlp layer " + std::to_string(i) + ": bias size does not match weight rows");
    if (i > 0 && params.weights[i].cols() != params.weights[i - 1].rows())
      throw ConfigError("mlp layer " + std::to_string(i) + ": input dim does not match previous output dim");
  }
}

// layer_sizes = {input, hidden..., output}
template <typename Scalar>
MlpParams<Scalar> zeros_mlp(std::span<const Index> layer_sizes) {
  if (layer_sizes.size() < 2) throw ConfigError("mlp needs at least input and output sizes");
  MlpParams<Scalar> p;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    p.weights.push_back(MatrixX<Scalar>::Zero(layer_sizes[i + 1], layer_sizes[i]));
    p.biases.push_back(VectorX<Scalar>::Zero(layer_sizes[i + 1]));
  }
  return p;
}

template <MlpParamsType P>
std::remove_cvref_t<P> zeros_like(const P& params) {
  std::remove_cvref_t<P> z = params;
  for_each_tensor([](auto& t) { t.setZero(); }, z);
  return z;
}

// Generic helpers over anything for_each_tensor understands.
template <typename P>
bool all_finite(const P& params) {
  bool ok = true;
  for_each_tensor([&ok](const auto& t) { ok = ok && t.allFinite(); }, params);
  return ok;
}

template <typename P>
double squared_norm(const P& params) {
  double s = 0.0;
  for_each_tensor([&s](const auto& t) { s += static_cast<double>(t.squaredNorm()); }, params);
  return s;
}

template <typename P>
void scale_in_place(P& params, double factor) {
  for_each_tensor([factor](auto& t) { t *= static_cast<typename std::remove_cvref_t<decltype(t)>::Scalar>(factor); },
                  params);
}

template <typename P>
void add_in_place(P& target, const P& other) {
  for_each_tensor([](auto& a, const auto& b) { a += b; }, target, other);
}

// Rescales so the global L2 norm is at most max_norm. Returns the norm before clipping.
template <typename P>
double clip_global_norm(P& grads, double max_norm) {
  const double norm = std::sqrt(squared_norm(grads));
  if (max_norm > 0.0 && norm > max_norm) scale_in_place(grads, max_norm / (norm + 1e-6));
  return norm;
}

template <typename Scalar>
struct ForwardCache {
  std::vector<MatrixX<Scalar>> inputs;           // input fed to each layer, batch x in
  std::vector<MatrixX<Scalar>> pre_activations;  // affine output of each layer, batch x out
};

template <typename Scalar, typename Derived>
MatrixX<Scalar> mlp_forward_batch(const MlpParams<Scalar>& params, const Eigen::MatrixBase<Derived>& inputs,
                                  ForwardCache<Scalar>* cache = nullptr) {
  if (params.weights.empty()) throw ConfigError("mlp has no layers");
  if (inputs.cols() != params.input_dim())
    throw ConfigError("mlp input dim " + std::to_string(inputs.cols()) + " != " + std::to_string(params.input_dim()));
  if (cache) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  MatrixX<Scalar> h = inputs;
  const std::size_t n = params.weights.size();
  for (std::size_t l = 0; l < n; ++l) {
    MatrixX<Scalar> z = h * params.weights[l].transpose();
    z.rowwise() += params.biases[l].transpose();
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre_activations.push_back(z);
    }
    h = (l + 1 < n) ? MatrixX<Scalar>(z.cwiseMax(Scalar(0))) : std::move(z);
  }
  if (!h.allFinite()) throw NumericError("mlp forward produced a non-finite value");
  return h;
}

template <typename Scalar>
struct MlpOutput {
  VectorX<Scalar> output;
  ForwardCache<Scalar> cache;
};

template <typename Scalar, typename Derived>
MlpOutput<Scalar> mlp_forward(const MlpParams<Scalar>& params, const Eigen::MatrixBase<Derived>& input) {
  static_assert(Derived::ColsAtCompileTime == 1, "mlp_forward takes a column vector; use mlp_forward_batch");
  MlpOutput<Scalar> out;
  MatrixX<Scalar> row = input.transpose();
  out.output = mlp_forward_batch(params, row, &out.cache).row(0).transpose();
  return out;
}

// Gradients of sum_rows(output_row . output_grad_row) w.r.t. every weight and bias.
template <typename Scalar>
MlpParams<Scalar> mlp_backward_rows(const MlpParams<Scalar>& params, const ForwardCache<Scalar>& cache,
                                    const MatrixX<Scalar>& output_grads) {
  const std::size_t n = params.weights.size();
  if (cache.inputs.size() != n || cache.pre_activations.size() != n)
    throw ConfigError("forward cache does not match mlp depth");
  if (output_grads.rows() != cache.inputs.front().rows() || output_grads.cols() != params.output_dim())
    throw ConfigError("output gradient shape does not match forward cache");
  if (!output_grads.allFinite()) throw NumericError("non-finite output gradient");

  MlpParams<Scalar> grads = zeros_like(params);
  MatrixX<Scalar> g = output_grads;
  for (std::size_t l = n; l-- > 0;) {
    if (l + 1 < n) g = g.cwiseProduct((cache.pre_activations[l].array() > Scalar(0)).matrix().template cast<Scalar>());
    grads.weights[l].noalias() = g.transpose() * cache.inputs[l];
    grads.biases[l] = g.colwise().sum().transpose();
    if (l > 0) g = g * params.weights[l];
  }
  if (!all_finite(grads)) throw NumericError("mlp backward produced a non-finite gradient");
  return grads;
}

// A compile-time column vector is taken as the gradient of a single-row batch.
template <typename Scalar, typename Derived>
MlpParams<Scalar> mlp_backward(const MlpParams<Scalar>& params, const ForwardCache<Scalar>& cache,
                               const Eigen::MatrixBase<Derived>& output_grad) {
  if constexpr (Derived::ColsAtCompileTime == 1)
    return mlp_backward_rows(params, cache, MatrixX<Scalar>(output_grad.transpose()));
  else
    return mlp_backward_rows(params, cache, MatrixX<Scalar>(output_grad));
}

// Orthogonal init scaled by gain; sqrt(2) on hidden ReLU layers. Biases start at zero.
template <typename Scalar>
MatrixX<Scalar> orthogonal_matrix(Index rows, Index cols, Scalar gain, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool tall = rows >= cols;
  const Index big = tall ? rows : cols;
  const Index small = tall ? cols : rows;
  Eigen::MatrixXd a(big, small);
  for (Index i = 0; i < big; ++i)
    for (Index j = 0; j < small; ++j) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Index j = 0; j < small; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  MatrixX<Scalar> w = tall ? MatrixX<Scalar>(q.cast<Scalar>()) : MatrixX<Scalar>(q.transpose().cast<Scalar>());
  return w * gain;
}

template <typename Scalar>
MlpParams<Scalar> init_mlp(std::span<const Index> layer_sizes, Scalar output_gain, Rng& rng) {
  MlpParams<Scalar> p = zeros_mlp<Scalar>(layer_sizes);
  const Scalar hidden_gain = std::sqrt(Scalar(2));
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const Scalar gain = (l + 1 == p.weights.size()) ? output_gain : hidden_gain;
    p.weights[l] = orthogonal_matrix<Scalar>(p.weights[l].rows(), p.weights[l].cols(), gain, rng);
  }
  return p;
}

template <typename Params>
struct AdamState {
  Params m;
  Params v;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Params>
AdamState<Params> make_adam_state(const Params& params) {
  return AdamState<Params>{zeros_like(params), zeros_like(params)};
}

// Bias-corrected Adam. A non-finite gradient leaves params and state untouched.
template <typename Params>
void adam_step(Params& params, const Params& grads, AdamState<Params>& state, double lr) {
  if (!(lr > 0.0)) throw ConfigError("adam learning rate must be positive");
  bool shapes_ok = true;
  for_each_tensor(
      [&shapes_ok](const auto& p, const auto& g, const auto& m, const auto& v) {
        shapes_ok = shapes_ok && p.rows() == g.rows() && p.cols() == g.cols() && p.rows() == m.rows() &&
                    p.cols() == m.cols() && p.rows() == v.rows() && p.cols() == v.cols();
      },
      params, grads, state.m, state.v);
  if (!shapes_ok) throw ConfigError("adam: parameter, gradient and moment shapes differ");
  if (!all_finite(grads)) throw NumericError("adam: non-finite gradient, update rejected");

  ++state.step_count;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  const double b1 = state.beta1, b2 = state.beta2, eps = state.eps;
  for_each_tensor(
      [=](auto& p, const auto& g, auto& m, auto& v) {
        using S = typename std::remove_cvref_t<decltype(p)>::Scalar;
        m = S(b1) * m + S(1.0 - b1) * g;
        v = S(b2) * v + S(1.0 - b2) * g.cwiseProduct(g);
        p.array() -= S(lr) * (m.array() / S(bc1)) / ((v.array() / S(bc2)).sqrt() + S(eps));
      },
      params, grads, state.m, state.v);
}

}  // namespace dtae
