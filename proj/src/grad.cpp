#include "nuqml/grad.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace nuqml {

namespace {

using Amplitudes = State::Amplitudes;

State run_ops(const std::vector<PrimitiveOp>& ops, int n_qubits, const ParameterVector& values,
              std::ptrdiff_t shifted_op = -1, double shift = 0.0) {
  State state(n_qubits);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    double angle = op_angle(ops[i], values);
    if (static_cast<std::ptrdiff_t>(i) == shifted_op) angle += shift;
    apply_op(state.amplitudes(), ops[i], angle);
  }
  return state;
}

// Backward sweep from the final state; `lambdas` start as O_k |Psi>.
Eigen::MatrixXd adjoint_sweep(const std::vector<PrimitiveOp>& ops, const ParameterVector& values,
                              Amplitudes psi, std::vector<Amplitudes> lambdas, int n_slots) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Index>(lambdas.size()), n_slots);
  Amplitudes mu;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    const double angle = op_angle(*it, values);
    apply_op(psi, *it, angle, OpAction::Adjoint);
    if (it->slot) {
      mu = psi;
      apply_op(mu, *it, angle, OpAction::Derivative);
      for (std::size_t k = 0; k < lambdas.size(); ++k) {
        jac(Index(k), *it->slot) += 2.0 * lambdas[k].dot(mu).real();
      }
    }
    for (auto& lambda : lambdas) apply_op(lambda, *it, angle, OpAction::Adjoint);
  }
  return jac;
}

// Diagonals [P0 Z_1, ..., P0 Z_N, P0] for post-selected programs, [Z_0..Z_{N-1}] otherwise.
Eigen::MatrixXd layer_observables(const CircuitProgram& program) {
  const Index dim = Index{1} << program.n_qubits;
  if (!program.postselect_ancilla) {
    Eigen::MatrixXd d(dim, program.n_qubits);
    for (int q = 0; q < program.n_qubits; ++q) d.col(q) = z_diagonal(program.n_qubits, q);
    return d;
  }
  const int n_main = program.n_main();
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(dim);
  p0.head(dim / 2).setOnes();
  Eigen::MatrixXd d(dim, n_main + 1);
  for (int q = 0; q < n_main; ++q) {
    d.col(q) = p0.cwiseProduct(z_diagonal(program.n_qubits, q + 1));
  }
  d.col(n_main) = p0;
  return d;
}

void check_step(double step) {
  if (!(step >= 1e-7 && step <= 1e-3)) {
    throw ParameterError("finite-difference step " + std::to_string(step) +
                         " outside [1e-7, 1e-3]");
  }
}

GradientRecord split(const CircuitProgram& program, Eigen::VectorXd expectations,
                     const Eigen::MatrixXd& d_slots, double success,
                     Eigen::RowVectorXd d_success) {
  GradientRecord r;
  r.expectations = std::move(expectations);
  r.d_params = d_slots.leftCols(program.n_params);
  r.d_inputs = d_slots.rightCols(program.n_inputs);
  r.success_prob = success;
  r.d_success = std::move(d_success);
  return r;
}

}  // namespace

ObservableJacobian adjoint_jacobian(const CircuitProgram& program, const ParameterVector& values,
                                    const Eigen::MatrixXd& diagonals) {
  if (values.size() != program.n_slots()) throw ParameterError("slot vector length mismatch");
  const auto ops = flatten(program.gates, program.n_qubits, program.n_slots());
  State final_state = run_ops(ops, program.n_qubits, values);
  const Amplitudes& psi = final_state.amplitudes();
  if (diagonals.rows() != psi.size()) throw ParameterError("observable dimension mismatch");

  ObservableJacobian out;
  out.values.resize(diagonals.cols());
  std::vector<Amplitudes> lambdas;
  lambdas.reserve(std::size_t(diagonals.cols()));
  for (Index k = 0; k < diagonals.cols(); ++k) {
    Amplitudes lambda = psi.cwiseProduct(diagonals.col(k).cast<std::complex<double>>());
    out.values[k] = psi.dot(lambda).real();
    lambdas.push_back(std::move(lambda));
  }
  out.jacobian = adjoint_sweep(ops, values, psi, std::move(lambdas), program.n_slots());
  return out;
}

GradientRecord grad_reverse(const CircuitProgram& program, const ParameterVector& values) {
  const auto obs = adjoint_jacobian(program, values, layer_observables(program));
  if (!program.postselect_ancilla) {
    return split(program, obs.values, obs.jacobian, 1.0,
                 Eigen::RowVectorXd::Zero(program.n_slots()));
  }
  const int n = program.n_main();
  const double mass = obs.values[n];
  if (mass < kDegenerateThreshold) {
    throw DegeneratePostselection("degenerate gradient: post-selection mass vanishes", mass);
  }
  const Eigen::VectorXd e = obs.values.head(n) / mass;
  const Eigen::RowVectorXd d_mass = obs.jacobian.row(n);
  const Eigen::MatrixXd d_e = (obs.jacobian.topRows(n) - e * d_mass) / mass;
  return split(program, e, d_e, mass, d_mass);
}

GradientRecord grad_reverse(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                            const Eigen::VectorXd& inputs) {
  const auto program = build_layer(spec);
  return grad_reverse(program, program.bind(params, inputs));
}

Eigen::VectorXd grad_parameter_shift(const CircuitProgram& program, const ParameterVector& values,
                                     int slot) {
  if (program.postselect_ancilla) {
    throw UnsupportedVariant("parameter shift is only exact for unitary programs");
  }
  if (slot < 0 || slot >= program.n_slots()) throw IndexError("slot out of range");
  const auto ops = flatten(program.gates, program.n_qubits, program.n_slots());
  constexpr double kShift = std::numbers::pi / 2;
  const auto expect = [&](std::ptrdiff_t op, double shift) {
    const State s = run_ops(ops, program.n_qubits, values, op, shift);
    Eigen::VectorXd e(program.n_qubits);
    for (int q = 0; q < program.n_qubits; ++q) e[q] = expectation_z(s, q);
    return e;
  };
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(program.n_qubits);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].slot != slot) continue;
    const auto op = static_cast<std::ptrdiff_t>(i);
    grad += 0.5 * (expect(op, kShift) - expect(op, -kShift));
  }
  return grad;
}

Eigen::VectorXd grad_parameter_shift(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                                     const Eigen::VectorXd& inputs, int param_index) {
  if (spec.postselected()) {
    throw UnsupportedVariant("parameter shift requested for non-unitary variant " +
                             std::string(to_string(spec.variant)));
  }
  const auto program = build_layer(spec);
  if (param_index < 0 || param_index >= program.n_params) {
    throw IndexError("parameter index out of range");
  }
  return grad_parameter_shift(program, program.bind(params, inputs), param_index);
}

GradientRecord grad_finite_difference(const CircuitProgram& program, const ParameterVector& values,
                                      double step) {
  check_step(step);
  const LayerOutput centre = evaluate(program, values);
  const Index n = centre.expectations.size();
  Eigen::MatrixXd d(n, program.n_slots());
  Eigen::RowVectorXd d_success(program.n_slots());
  ParameterVector probe = values;
  for (int s = 0; s < program.n_slots(); ++s) {
    probe[s] = values[s] + step;
    const LayerOutput plus = evaluate(program, probe);
    probe[s] = values[s] - step;
    const LayerOutput minus = evaluate(program, probe);
    probe[s] = values[s];
    d.col(s) = (plus.expectations - minus.expectations) / (2 * step);
    d_success[s] = (plus.success_prob - minus.success_prob) / (2 * step);
  }
  return split(program, centre.expectations, d, centre.success_prob, d_success);
}

GradientRecord grad_finite_difference(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                                      const Eigen::VectorXd& inputs, double step) {
  const auto program = build_layer(spec);
  return grad_finite_difference(program, program.bind(params, inputs), step);
}

VjpResult vector_jacobian_product(const CircuitProgram& program, const ParameterVector& values,
                                  const Eigen::VectorXd& cotangent) {
  if (values.size() != program.n_slots()) throw ParameterError("slot vector length mismatch");
  if (cotangent.size() != program.n_main()) throw ParameterError("cotangent length mismatch");
  const auto ops = flatten(program.gates, program.n_qubits, program.n_slots());
  const State final_state = run_ops(ops, program.n_qubits, values);
  const Amplitudes& psi = final_state.amplitudes();
  const Eigen::VectorXd probs = psi.cwiseAbs2();
  const Index dim = psi.size();
  const int n = program.n_main();
  const int offset = program.postselect_ancilla ? 1 : 0;
  // Post-selected outputs live in the ancilla-0 half of the register.
  const Index live = program.postselect_ancilla ? dim / 2 : dim;

  VjpResult out;
  out.output.expectations.resize(n);
  const double mass = program.postselect_ancilla ? probs.head(live).sum() : 1.0;
  if (program.postselect_ancilla && mass < kDegenerateThreshold) {
    throw DegeneratePostselection("post-selection annihilates the state", mass);
  }
  out.output.success_prob = program.postselect_ancilla ? mass : 1.0;

  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(dim);
  for (int q = 0; q < n; ++q) {
    const Eigen::VectorXd z = z_diagonal(program.n_qubits, q + offset);
    out.output.expectations[q] = z.head(live).dot(probs.head(live)) / mass;
    weighted.head(live) += cotangent[q] * z.head(live);
  }
  if (program.postselect_ancilla) {
    const double centre = cotangent.dot(out.output.expectations);
    weighted.head(live).array() -= centre;
    weighted /= mass;
  }
  std::vector<Amplitudes> lambdas{psi.cwiseProduct(weighted.cast<std::complex<double>>())};
  out.slot_gradient = adjoint_sweep(ops, values, psi, std::move(lambdas), program.n_slots())
                          .row(0)
                          .transpose();
  return out;
}

}  // namespace nuqml
