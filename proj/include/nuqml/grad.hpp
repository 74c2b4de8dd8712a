#pragma once

#include <Eigen/Dense>

#include "nuqml/circuit.hpp"

namespace nuqml {

/// Derivatives of a layer's expectation vector. Rows index main-register
/// qubits; columns index trainable parameters / inputs in program order.
struct GradientRecord {
  Eigen::VectorXd expectations;
  Eigen::MatrixXd d_params;
  Eigen::MatrixXd d_inputs;
  double success_prob = 1.0;
  Eigen::RowVectorXd d_success;  // over [params, inputs]; zero for unitary programs
};

struct ObservableJacobian {
  Eigen::VectorXd values;    // <Psi|O_k|Psi>
  Eigen::MatrixXd jacobian;  // K x n_slots
};

/// Adjoint-method derivatives of <Psi|O_k|Psi> with respect to every slot,
/// where each column of `diagonals` is the diagonal of a Hermitian observable
/// on the full register. One forward pass plus one backward sweep.
ObservableJacobian adjoint_jacobian(const CircuitProgram& program, const ParameterVector& values,
                                    const Eigen::MatrixXd& diagonals);

/// Reverse-mode Jacobian. Post-selected expectations are differentiated as
/// Rayleigh quotients <phi|Z_i|phi> / <phi|phi> of the unnormalized ancilla-0
/// branch, so the renormalization's parameter dependence is included.
GradientRecord grad_reverse(const CircuitProgram& program, const ParameterVector& values);
GradientRecord grad_reverse(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                            const Eigen::VectorXd& inputs);

/// [f(t + pi/2) - f(t - pi/2)] / 2 summed over every gate reading `slot`.
/// Only defined for unitary programs.
Eigen::VectorXd grad_parameter_shift(const CircuitProgram& program, const ParameterVector& values,
                                     int slot);
Eigen::VectorXd grad_parameter_shift(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                                     const Eigen::VectorXd& inputs, int param_index);

/// Central differences; `step` must lie in [1e-7, 1e-3].
GradientRecord grad_finite_difference(const CircuitProgram& program, const ParameterVector& values,
                                      double step);
GradientRecord grad_finite_difference(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                                      const Eigen::VectorXd& inputs, double step);

struct VjpResult {
  LayerOutput output;
  Eigen::VectorXd slot_gradient;  // d(cotangent . expectations) / d slot
};

/// Gradient of cotangent . expectations with a single backward sweep.
VjpResult vector_jacobian_product(const CircuitProgram& program, const ParameterVector& values,
                                  const Eigen::VectorXd& cotangent);

}  // namespace nuqml
