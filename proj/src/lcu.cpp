#include "nuqml/lcu.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace nuqml {

void LcuDecomposition::validate() const {
  if (coefficients.empty()) throw ParameterError("LCU needs at least one term");
  if (coefficients.size() != unitaries.size()) {
    throw ParameterError("LCU coefficient and unitary counts differ");
  }
  const Index dim = unitaries.front().rows();
  if (dim < 2 || (dim & (dim - 1)) != 0) {
    throw ParameterError("LCU operands must act on a qubit register");
  }
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    if (!(coefficients[k] > 0.0) || !std::isfinite(coefficients[k])) {
      throw ParameterError("LCU coefficient " + std::to_string(k) + " is not positive");
    }
    const auto& u = unitaries[k];
    if (u.rows() != dim || u.cols() != dim) {
      throw ParameterError("LCU operand " + std::to_string(k) + " has the wrong shape");
    }
    const double defect =
        (u.adjoint() * u - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (defect > 1e-9) {
      throw ParameterError("LCU operand " + std::to_string(k) + " is not unitary");
    }
  }
}

int LcuDecomposition::n_qubits() const {
  int n = 0;
  while ((Index{1} << n) < unitaries.front().rows()) ++n;
  return n;
}

int lcu_ancilla_count(int n_terms) {
  int m = 0;
  while ((1 << m) < n_terms) ++m;
  return m;
}

Eigen::MatrixXcd lcu_preparation_unitary(const std::vector<double>& coefficients) {
  const int m = lcu_ancilla_count(static_cast<int>(coefficients.size()));
  const Index dim = Index{1} << m;
  const double total = std::accumulate(coefficients.begin(), coefficients.end(), 0.0);
  Eigen::VectorXcd target = Eigen::VectorXcd::Zero(dim);
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    target[Index(k)] = std::sqrt(coefficients[k] / total);
  }
  // Reflection through the hyperplane orthogonal to (e0 - target) maps e0 to
  // target; the amplitudes are real and non-negative so no phase fix is needed.
  Eigen::VectorXcd u = -target;
  u[0] += 1.0;
  const double norm2 = u.squaredNorm();
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(dim, dim);
  if (norm2 > 1e-300) v -= (2.0 / norm2) * u * u.adjoint();
  return v;
}

LcuResult lcu_apply_general(const LcuDecomposition& decomposition, const State& input) {
  decomposition.validate();
  const Index dim = input.dim();
  if (decomposition.unitaries.front().rows() != dim) {
    throw ParameterError("LCU operands do not match the input register");
  }
  const int m = lcu_ancilla_count(static_cast<int>(decomposition.coefficients.size()));
  if (m + input.n_qubits() > kMaxQubits) throw CapacityError("LCU ancilla register too large");
  const Index blocks = Index{1} << m;
  const Eigen::MatrixXcd prep = lcu_preparation_unitary(decomposition.coefficients);

  // Column k of `reg` is the main-register block with ancilla value k.
  Eigen::MatrixXcd reg = Eigen::MatrixXcd::Zero(dim, blocks);
  reg.col(0) = input.amplitudes();
  reg = reg * prep.transpose();
  for (std::size_t k = 0; k < decomposition.unitaries.size(); ++k) {
    reg.col(Index(k)) = decomposition.unitaries[k] * reg.col(Index(k));
  }
  reg = reg * prep.adjoint().transpose();

  Eigen::VectorXcd kept = reg.col(0);
  const double mass = kept.squaredNorm();
  if (mass < kDegenerateThreshold) {
    throw DegeneratePostselection("LCU combination annihilates the input", mass);
  }
  kept /= std::sqrt(mass);
  return {State(input.n_qubits(), std::move(kept)), mass};
}

}  // namespace nuqml
