#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "dtae/errors.hpp"
#include "dtae/nn.hpp"

using namespace dtae;

namespace {

// Plain loops, no Eigen expressions: independent forward oracle.
VectorXr naive_forward(const MlpParams<double>& p, const VectorXr& x) {
  std::vector<double> h(x.data(), x.data() + x.size());
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const auto& w = p.weights[l];
    std::vector<double> next(static_cast<std::size_t>(w.rows()));
    for (Index i = 0; i < w.rows(); ++i) {
      double s = p.biases[l][i];
      for (Index j = 0; j < w.cols(); ++j) s += w(i, j) * h[static_cast<std::size_t>(j)];
      if (l + 1 < p.weights.size() && s < 0.0) s = 0.0;
      next[static_cast<std::size_t>(i)] = s;
    }
    h = std::move(next);
  }
  return Eigen::Map<VectorXr>(h.data(), static_cast<Index>(h.size()));
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST_CASE("zero network outputs zeros") {
  const std::array<Index, 3> sizes{3, 4, 2};
  const auto p = zeros_mlp<double>(sizes);
  const auto out = mlp_forward(p, VectorXr::Random(3));
  CHECK(out.output.isZero(0.0));
}

TEST_CASE("identity linear head passes input through") {
  const std::array<Index, 2> sizes{2, 2};
  auto p = zeros_mlp<double>(sizes);
  p.weights[0].setIdentity();
  VectorXr x(2);
  x << 1.0, -2.0;
  const auto out = mlp_forward(p, x);
  CHECK(out.output[0] == 1.0);
  CHECK(out.output[1] == -2.0);
}

TEST_CASE("forward matches a naive loop implementation") {
  Rng rng(11);
  const std::array<Index, 4> sizes{5, 7, 6, 3};
  for (int trial = 0; trial < 20; ++trial) {
    auto p = init_mlp<double>(sizes, 1.0, rng);
    for (auto& b : p.biases) b.setRandom();
    const VectorXr x = VectorXr::Random(5) * 3.0;
    const VectorXr fast = mlp_forward(p, x).output;
    const VectorXr slow = naive_forward(p, x);
    CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("batched forward equals per-row forward") {
  Rng rng(3);
  const std::array<Index, 3> sizes{4, 8, 2};
  const auto p = init_mlp<double>(sizes, 1.0, rng);
  const MatrixXr xs = MatrixXr::Random(6, 4);
  const MatrixXr out = mlp_forward_batch(p, xs);
  for (Index r = 0; r < 6; ++r) {
    const VectorXr single = mlp_forward(p, VectorXr(xs.row(r).transpose())).output;
    CHECK((out.row(r).transpose() - single).norm() < 1e-14);
  }
}

TEST_CASE("dimension mismatch is a configuration error") {
  const std::array<Index, 2> sizes{3, 1};
  const auto p = zeros_mlp<double>(sizes);
  CHECK_THROWS_AS(mlp_forward(p, VectorXr::Zero(2)), ConfigError);
  auto out = mlp_forward(p, VectorXr::Zero(3));
  CHECK_THROWS_AS(mlp_backward(p, out.cache, VectorXr::Ones(2)), ConfigError);
}

TEST_CASE("non-finite output raises a numeric error") {
  const std::array<Index, 2> sizes{1, 1};
  auto p = zeros_mlp<double>(sizes);
  p.weights[0](0, 0) = 1.0;
  VectorXr x(1);
  x << std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(mlp_forward(p, x), NumericError);
}

TEST_CASE("backward of a scalar linear map") {
  const std::array<Index, 2> sizes{1, 1};
  auto p = zeros_mlp<double>(sizes);
  p.weights[0](0, 0) = 0.7;
  VectorXr x(1);
  x << 3.0;
  const auto out = mlp_forward(p, x);
  const auto g = mlp_backward(p, out.cache, VectorXr::Ones(1));
  CHECK(g.weights[0](0, 0) == doctest::Approx(3.0));
  CHECK(g.biases[0][0] == doctest::Approx(1.0));
  const auto g0 = mlp_backward(p, out.cache, VectorXr::Zero(1));
  CHECK(squared_norm(g0) == 0.0);
}

TEST_CASE("backward matches central finite differences on 100 random instances") {
  Rng rng(2024);
  std::uniform_int_distribution<int> width(1, 6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::array<Index, 4> sizes{width(rng), width(rng), width(rng), width(rng)};
    auto p = init_mlp<double>(sizes, 1.0, rng);
    for (auto& b : p.biases) b.setRandom();
    const VectorXr x = VectorXr::Random(sizes[0]);
    const VectorXr og = VectorXr::Random(sizes[3]);
    const auto out = mlp_forward(p, x);
    const auto g = mlp_backward(p, out.cache, og);
    auto f = [&](const MlpParams<double>& q) { return mlp_forward(q, x).output.dot(og); };
    const double h = 1e-5;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      for (Index k = 0; k < p.weights[l].size(); ++k) {
        auto plus = p, minus = p;
        plus.weights[l].data()[k] += h;
        minus.weights[l].data()[k] -= h;
        worst = std::max(worst, rel_err((f(plus) - f(minus)) / (2 * h), g.weights[l].data()[k]));
      }
      for (Index k = 0; k < p.biases[l].size(); ++k) {
        auto plus = p, minus = p;
        plus.biases[l][k] += h;
        minus.biases[l][k] -= h;
        worst = std::max(worst, rel_err((f(plus) - f(minus)) / (2 * h), g.biases[l][k]));
      }
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("orthogonal init has orthonormal rows or columns scaled by gain") {
  Rng rng(5);
  const MatrixXr w = orthogonal_matrix<double>(4, 9, 2.0, rng);
  CHECK((w * w.transpose() - 4.0 * MatrixXr::Identity(4, 4)).norm() < 1e-12);
  const MatrixXr t = orthogonal_matrix<double>(9, 4, 1.0, rng);
  CHECK((t.transpose() * t - MatrixXr::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("init is deterministic per seed") {
  const std::array<Index, 3> sizes{3, 5, 1};
  Rng a(9), b(9);
  const auto pa = init_mlp<double>(sizes, 1.0, a);
  const auto pb = init_mlp<double>(sizes, 1.0, b);
  for (std::size_t l = 0; l < pa.weights.size(); ++l) CHECK(pa.weights[l] == pb.weights[l]);
}

TEST_CASE("adam: zero gradient leaves params unchanged and counts the step") {
  Rng rng(1);
  const std::array<Index, 3> sizes{2, 3, 1};
  auto p = init_mlp<double>(sizes, 1.0, rng);
  const auto before = p;
  auto st = make_adam_state(p);
  adam_step(p, zeros_like(p), st, 1e-3);
  CHECK(st.step_count == 1);
  for (std::size_t l = 0; l < p.weights.size(); ++l) CHECK(p.weights[l] == before.weights[l]);
}

TEST_CASE("adam: first step moves by -lr * sign(g)") {
  const std::array<Index, 2> sizes{2, 1};
  auto p = zeros_mlp<double>(sizes);
  auto g = zeros_like(p);
  g.weights[0](0, 0) = 0.3;
  g.weights[0](0, 1) = -7.0;
  auto st = make_adam_state(p);
  const double lr = 1e-2;
  adam_step(p, g, st, lr);
  // m_hat = g, v_hat = g^2, update = lr g / (|g| + eps)
  CHECK(p.weights[0](0, 0) == doctest::Approx(-lr * 0.3 / (0.3 + 1e-8)).epsilon(1e-12));
  CHECK(p.weights[0](0, 1) == doctest::Approx(lr * 7.0 / (7.0 + 1e-8)).epsilon(1e-12));
  CHECK(p.biases[0][0] == 0.0);
}

TEST_CASE("adam: two identical steps give the closed-form accumulators") {
  const std::array<Index, 2> sizes{1, 1};
  auto p = zeros_mlp<double>(sizes);
  auto g = zeros_like(p);
  g.weights[0](0, 0) = 2.0;
  auto st = make_adam_state(p);
  adam_step(p, g, st, 1e-3);
  adam_step(p, g, st, 1e-3);
  CHECK(st.step_count == 2);
  CHECK(st.m.weights[0](0, 0) == doctest::Approx(0.9 * 0.1 * 2.0 + 0.1 * 2.0));
  CHECK(st.v.weights[0](0, 0) == doctest::Approx(0.999 * 0.001 * 4.0 + 0.001 * 4.0));
}

TEST_CASE("adam rejects bad input") {
  const std::array<Index, 2> sizes{1, 1};
  auto p = zeros_mlp<double>(sizes);
  auto st = make_adam_state(p);
  auto g = zeros_like(p);
  CHECK_THROWS_AS(adam_step(p, g, st, 0.0), ConfigError);
  g.weights[0](0, 0) = std::nan("");
  CHECK_THROWS_AS(adam_step(p, g, st, 1e-3), NumericError);
  CHECK(st.step_count == 0);
  const std::array<Index, 2> other{2, 1};
  CHECK_THROWS_AS(adam_step(p, zeros_mlp<double>(other), st, 1e-3), ConfigError);
}

TEST_CASE("global norm clipping") {
  const std::array<Index, 2> sizes{2, 1};
  auto g = zeros_mlp<double>(sizes);
  g.weights[0] << 3.0, 4.0;
  const double norm = clip_global_norm(g, 0.5);
  CHECK(norm == doctest::Approx(5.0));
  CHECK(std::sqrt(squared_norm(g)) == doctest::Approx(0.5).epsilon(1e-6));
  auto small = zeros_mlp<double>(sizes);
  small.weights[0] << 0.1, 0.0;
  clip_global_norm(small, 0.5);
  CHECK(small.weights[0](0, 0) == 0.1);
}

TEST_CASE("float instantiation compiles and runs") {
  Rng rng(4);
  const std::array<Index, 3> sizes{2, 4, 1};
  auto p = init_mlp<float>(sizes, 1.0f, rng);
  const auto out = mlp_forward(p, VectorX<float>::Ones(2));
  CHECK(std::isfinite(out.output[0]));
}
