#include <doctest.h>

#include <cmath>
#include <random>

#include "dense_oracle.hpp"
#include "nuqml/grad.hpp"

using namespace nuqml;

namespace {

constexpr LayerVariant kAllVariants[] = {LayerVariant::NoLCU, LayerVariant::LCU,
                                         LayerVariant::IqpLayer, LayerVariant::IqpEmbedding};

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("parameter shift on a single RY") {
  const CircuitProgram p{1, {Gate::ry(0, 0)}, 1, 0, false};
  Eigen::VectorXd v(1);
  v << 0.7;
  CHECK(grad_parameter_shift(p, v, 0)[0] == doctest::Approx(-std::sin(0.7)).epsilon(1e-13));
  v << 0.0;
  CHECK(std::abs(grad_parameter_shift(p, v, 0)[0]) < 1e-10);
  CHECK(std::abs(grad_finite_difference(p, v, 1e-4).d_params(0, 0)) < 1e-8);
}

TEST_CASE("parameter shift agrees with finite differences on the 3-qubit ansatz") {
  std::mt19937_64 rng(21);
  const QuantumLayerSpec spec{LayerVariant::NoLCU, 3, 4};
  const Eigen::VectorXd theta = oracle::random_angles(spec.n_params(), rng);
  const Eigen::VectorXd x = oracle::random_angles(3, rng);
  const auto fd = grad_finite_difference(spec, theta, x, 1e-5);
  for (int i = 0; i < spec.n_params(); ++i) {
    CHECK(max_abs(grad_parameter_shift(spec, theta, x, i) - fd.d_params.col(i)) < 1e-6);
  }
  CHECK_THROWS_AS(grad_parameter_shift({LayerVariant::LCU, 3, 4}, theta, x, 0), UnsupportedVariant);
  CHECK_THROWS_AS(grad_parameter_shift(spec, theta, x, 12), IndexError);
}

TEST_CASE("shared slots accumulate over every gate that reads them") {
  // Two RY gates on disjoint qubits share one slot.
  const CircuitProgram p{2, {Gate::ry(0, 0), Gate::ry(1, 0), Gate::cnot(0, 1)}, 1, 0, false};
  Eigen::VectorXd v(1);
  v << 0.37;
  const auto rev = grad_reverse(p, v);
  const auto fd = grad_finite_difference(p, v, 1e-5);
  CHECK(max_abs(rev.d_params - fd.d_params) < 1e-9);
  CHECK(max_abs(grad_parameter_shift(p, v, 0) - rev.d_params.col(0)) < 1e-12);
}

TEST_CASE("reverse mode with W = I matches the unitary gradients") {
  std::mt19937_64 rng(8);
  const auto emb = build_angle_embedding(3);
  const auto wrapped = build_lcu_wrapped(CircuitProgram{3, {}, 0, 0, false}, emb);
  const Eigen::VectorXd x = oracle::random_angles(3, rng);
  const auto a = grad_reverse(wrapped, x);
  const auto b = grad_reverse(emb, x);
  CHECK(max_abs(a.d_inputs - b.d_inputs) < 1e-9);
  CHECK(max_abs(a.expectations - b.expectations) < 1e-12);
  CHECK(max_abs(a.d_success) < 1e-12);
}

TEST_CASE("reverse mode on a 2-qubit LCU layer matches central differences") {
  std::mt19937_64 rng(99);
  const QuantumLayerSpec spec{LayerVariant::LCU, 2, 4};
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd theta = oracle::random_angles(spec.n_params(), rng);
    const Eigen::VectorXd x = oracle::random_angles(2, rng);
    const auto rev = grad_reverse(spec, theta, x);
    const auto fd = grad_finite_difference(spec, theta, x, 1e-5);
    CHECK(max_abs(rev.d_params - fd.d_params) < 1e-5);
    CHECK(max_abs(rev.d_inputs - fd.d_inputs) < 1e-5);
    CHECK(max_abs(rev.expectations - fd.expectations) < 1e-12);
  }
}

TEST_CASE("stationary output direction has zero gradient") {
  const CircuitProgram p{1, {Gate::rx(0, 0)}, 1, 0, false};
  const auto rev = grad_reverse(p, Eigen::VectorXd::Zero(1));
  CHECK(std::abs(rev.d_params(0, 0)) < 1e-12);
}

TEST_CASE("gradient consistency across variants, N in 2..6") {
  std::mt19937_64 rng(2025);
  for (auto variant : kAllVariants) {
    for (int n = 2; n <= 6; ++n) {
      const QuantumLayerSpec spec{variant, n, 4};
      const auto program = build_layer(spec);
      double worst = 0, worst_success = 0;
      for (int draw = 0; draw < 20; ++draw) {
        const Eigen::VectorXd values = oracle::random_angles(program.n_slots(), rng);
        const auto rev = grad_reverse(program, values);
        const auto fd = grad_finite_difference(program, values, 1e-5);
        worst = std::max({worst, max_abs(rev.d_params - fd.d_params),
                          max_abs(rev.d_inputs - fd.d_inputs)});
        worst_success = std::max(worst_success, max_abs(rev.d_success - fd.d_success));
      }
      CAPTURE(to_string(variant));
      CAPTURE(n);
      CHECK(worst < 1e-5);
      CHECK(worst_success < 1e-5);
    }
  }
}

TEST_CASE("parameter shift equals reverse mode on unitary layers") {
  std::mt19937_64 rng(6);
  for (int n = 2; n <= 4; ++n) {
    const QuantumLayerSpec spec{LayerVariant::NoLCU, n, 4};
    const Eigen::VectorXd theta = oracle::random_angles(spec.n_params(), rng);
    const Eigen::VectorXd x = oracle::random_angles(n, rng);
    const auto rev = grad_reverse(spec, theta, x);
    for (int i = 0; i < spec.n_params(); ++i) {
      CHECK(max_abs(grad_parameter_shift(spec, theta, x, i) - rev.d_params.col(i)) < 1e-9);
    }
  }
}

TEST_CASE("finite-difference step bounds") {
  const QuantumLayerSpec spec{LayerVariant::NoLCU, 2, 1};
  const Eigen::VectorXd t = Eigen::VectorXd::Zero(2), x = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(grad_finite_difference(spec, t, x, 1e-2), ParameterError);
  CHECK_THROWS_AS(grad_finite_difference(spec, t, x, 1e-8), ParameterError);
  CHECK_NOTHROW(grad_finite_difference(spec, t, x, 1e-7));
  CHECK_NOTHROW(grad_finite_difference(spec, t, x, 1e-3));
}

TEST_CASE("degenerate post-selection is reported by reverse mode") {
  const auto p = build_lcu_wrapped(CircuitProgram{1, {Gate::rx(0, 0)}, 1, 0, false});
  Eigen::VectorXd v(1);
  v << 2 * M_PI;
  CHECK_THROWS_AS(grad_reverse(p, v), DegeneratePostselection);
  CHECK_THROWS_AS(vector_jacobian_product(p, v, Eigen::VectorXd::Ones(1)),
                  DegeneratePostselection);
}

TEST_CASE("vector-Jacobian product equals cotangent^T J") {
  std::mt19937_64 rng(42);
  for (auto variant : kAllVariants) {
    const auto program = build_layer({variant, 3, 4});
    const Eigen::VectorXd values = oracle::random_angles(program.n_slots(), rng);
    const Eigen::VectorXd g = Eigen::VectorXd::Random(3);
    const auto rev = grad_reverse(program, values);
    const auto vjp = vector_jacobian_product(program, values, g);
    Eigen::MatrixXd full(3, program.n_slots());
    full << rev.d_params, rev.d_inputs;
    CHECK(max_abs(vjp.slot_gradient - full.transpose() * g) < 1e-12);
    CHECK(max_abs(vjp.output.expectations - rev.expectations) < 1e-12);
    CHECK(std::abs(vjp.output.success_prob - rev.success_prob) < 1e-14);
  }
}
