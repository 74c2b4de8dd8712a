#pragma once

#include <Eigen/Dense>

#include <vector>

#include "nuqml/statevec.hpp"

namespace nuqml {

/// O = sum_k alpha_k U_k with alpha_k > 0 and every U_k unitary on the same register.
struct LcuDecomposition {
  std::vector<double> coefficients;
  std::vector<Eigen::MatrixXcd> unitaries;

  /// Throws ParameterError on non-positive coefficients, mismatched lengths,
  /// non-square or non-unitary operands (|U^dagger U - I| > 1e-9).
  void validate() const;
  int n_qubits() const;
};

/// Ancilla qubits needed to index K terms: ceil(log2 K), zero when K == 1.
int lcu_ancilla_count(int n_terms);

/// Unitary V on ceil(log2 K) qubits whose first column is sqrt(alpha_k / sum alpha),
/// zero-padded to a power of two. Built as a Householder reflection, so V is
/// Hermitian and equals H for two equal coefficients.
Eigen::MatrixXcd lcu_preparation_unitary(const std::vector<double>& coefficients);

struct LcuResult {
  State state;
  double success_prob;
};

/// prepare -> select -> unprepare on an ancilla register placed above the
/// input (ancilla qubits are the most significant), then post-select the
/// ancilla on |0...0>. The success probability is the projective mass,
/// |sum_k (alpha_k / sum alpha) U_k psi|^2.
LcuResult lcu_apply_general(const LcuDecomposition& decomposition, const State& input);

}  // namespace nuqml
