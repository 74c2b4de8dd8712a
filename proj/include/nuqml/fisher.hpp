#pragma once

#include <Eigen/Dense>

#include <json.hpp>

#include "nuqml/circuit.hpp"

namespace nuqml {

struct QfiResult {
  Eigen::MatrixXd matrix;  // P x P, symmetric positive semidefinite
  double trace = 0.0;
};

/// A pure state and its derivatives with respect to the trainable parameters.
struct StateJacobian {
  Eigen::VectorXcd state;
  Eigen::MatrixXcd derivatives;  // column i is |d_i psi>
};

/// Forward tangent propagation through the program. For post-selected programs
/// the state is the renormalized ancilla-0 branch on the main register and the
/// derivatives include the normalization's dependence on the parameters.
StateJacobian state_jacobian(const CircuitProgram& program, const ParameterVector& values);

/// F_ij = 4 Re[<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>].
QfiResult qfi_from_state(const StateJacobian& jacobian);

QfiResult qfi_matrix(const CircuitProgram& program, const ParameterVector& values);
QfiResult qfi_matrix(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                     const Eigen::VectorXd& inputs);

/// Trace of the QFI matrix.
double effective_dimension(const QfiResult& qfi);

/// (n_classical - n_quantum) / n_classical * 100. Positive when the quantum
/// model uses fewer parameters.
double fisher_efficiency(long long n_classical, long long n_quantum);

/// (acc_lcu - acc_nolcu) / acc_classical * 100, the performance-ratio form used
/// when LCU and NoLCU share a parameter count.
double fisher_efficiency_perf(double acc_lcu, double acc_nolcu, double acc_classical);

struct EfficiencyReport {
  double eta_param = 0.0;
  double eta_perf = 0.0;
  long long n_classical = 0;
  long long n_quantum = 0;
  double acc_lcu = 0.0;
  double acc_nolcu = 0.0;
  double acc_classical = 0.0;

  friend bool operator==(const EfficiencyReport&, const EfficiencyReport&) = default;
};

EfficiencyReport make_efficiency_report(long long n_classical, long long n_quantum,
                                        double acc_lcu, double acc_nolcu, double acc_classical);

void to_json(nlohmann::json& j, const EfficiencyReport& report);
void from_json(const nlohmann::json& j, EfficiencyReport& report);

}  // namespace nuqml
