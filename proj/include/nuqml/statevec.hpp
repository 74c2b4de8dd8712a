#pragma once

// Dense statevector simulator.
//
// Qubit 0 is the most significant bit of the amplitude index, so for n qubits
// qubit q is stored in bit (n - 1 - q). Gate conventions:
//   RX(t) = exp(-i t X / 2), RY(t) = exp(-i t Y / 2), RZ(t) = exp(-i t Z / 2)
//   CPhase(t) = diag(1, 1, 1, exp(i t))   (CZ is CPhase(pi))

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "nuqml/errors.hpp"

namespace nuqml {

using Index = Eigen::Index;

inline constexpr int kMaxQubits = 24;
/// Post-selection below this mass is treated as annihilating the state.
inline constexpr double kDegenerateThreshold = 1e-12;

enum class GateKind { H, X, Z, RX, RY, RZ, CNOT, CPhase, Controlled };

constexpr bool is_parametric(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ ||
         kind == GateKind::CPhase;
}

std::string_view to_string(GateKind kind);
GateKind gate_kind_from_string(std::string_view name);

struct Gate;
using GateList = std::vector<Gate>;

/// One circuit instruction. `qubits` holds the target for single-qubit kinds,
/// {control, target} for CNOT, the two qubits for CPhase, and {control} for
/// Controlled, whose `body` is applied where the control qubit is 1.
struct Gate {
  GateKind kind = GateKind::H;
  std::vector<int> qubits;
  std::optional<int> slot;
  std::shared_ptr<const GateList> body;

  static Gate h(int q) { return {GateKind::H, {q}, std::nullopt, nullptr}; }
  static Gate x(int q) { return {GateKind::X, {q}, std::nullopt, nullptr}; }
  static Gate z(int q) { return {GateKind::Z, {q}, std::nullopt, nullptr}; }
  static Gate rx(int q, int slot) { return {GateKind::RX, {q}, slot, nullptr}; }
  static Gate ry(int q, int slot) { return {GateKind::RY, {q}, slot, nullptr}; }
  static Gate rz(int q, int slot) { return {GateKind::RZ, {q}, slot, nullptr}; }
  static Gate cnot(int control, int target) {
    return {GateKind::CNOT, {control, target}, std::nullopt, nullptr};
  }
  static Gate cphase(int a, int b, int slot) { return {GateKind::CPhase, {a, b}, slot, nullptr}; }
  static Gate controlled(int control, GateList body) {
    return {GateKind::Controlled, {control}, std::nullopt,
            std::make_shared<const GateList>(std::move(body))};
  }
};

bool operator==(const Gate& a, const Gate& b);

/// Number of primitive gates, counting every gate inside a controlled body.
int primitive_count(const GateList& gates);

/// Throws IndexError for bad qubits and ParameterError for missing or
/// out-of-range slots (`n_slots` is the length of the bound value vector).
void validate_gate(const Gate& gate, int n_qubits, int n_slots);

/// A primitive gate with all of its controls folded into one bit mask.
/// `target` is the bit the 2x2 matrix acts on (first qubit for CPhase),
/// `partner` the second CPhase bit; the op acts only on indices where every
/// bit of `controls` is set.
struct PrimitiveOp {
  GateKind kind = GateKind::H;
  Index target = 0;
  Index partner = 0;
  Index controls = 0;
  std::optional<int> slot;
};

constexpr Index qubit_bit(int n_qubits, int qubit) { return Index{1} << (n_qubits - 1 - qubit); }

/// Lowers a gate list into kernel ops, validating each gate on the way.
std::vector<PrimitiveOp> flatten(const GateList& gates, int n_qubits, int n_slots);

template <typename Real>
class StateVector {
 public:
  using Scalar = std::complex<Real>;
  using Amplitudes = Eigen::VectorX<Scalar>;

  /// |0...0> on `n_qubits` qubits.
  explicit StateVector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
      throw CapacityError("qubit count " + std::to_string(n_qubits) + " outside [1, " +
                          std::to_string(kMaxQubits) + "]");
    }
    amplitudes_ = Amplitudes::Zero(Index{1} << n_qubits);
    amplitudes_[0] = Scalar(1);
  }

  /// Adopts explicit amplitudes; zero qubits is allowed (a single scalar).
  StateVector(int n_qubits, Amplitudes amplitudes)
      : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    if (n_qubits < 0 || n_qubits > kMaxQubits) {
      throw CapacityError("qubit count " + std::to_string(n_qubits) + " outside [0, " +
                          std::to_string(kMaxQubits) + "]");
    }
    if (amplitudes_.size() != (Index{1} << n_qubits)) {
      throw ParameterError("amplitude vector length does not equal 2^n_qubits");
    }
  }

  int n_qubits() const { return n_qubits_; }
  Index dim() const { return amplitudes_.size(); }
  const Amplitudes& amplitudes() const { return amplitudes_; }
  Amplitudes& amplitudes() { return amplitudes_; }
  Scalar operator[](Index i) const { return amplitudes_[i]; }

  Real squared_norm() const { return amplitudes_.squaredNorm(); }
  void normalize() { amplitudes_ /= amplitudes_.norm(); }

 private:
  int n_qubits_;
  Amplitudes amplitudes_;
};

using State = StateVector<double>;
using ParameterVector = Eigen::VectorXd;

inline State new_zero_state(int n_qubits) { return State(n_qubits); }

namespace kernels {

template <typename Real>
using Matrix2c = Eigen::Matrix<std::complex<Real>, 2, 2>;

template <typename Real>
Matrix2c<Real> single_qubit_matrix(GateKind kind, Real angle) {
  using C = std::complex<Real>;
  const Real c = std::cos(angle / 2);
  const Real s = std::sin(angle / 2);
  Matrix2c<Real> m;
  switch (kind) {
    case GateKind::H: {
      const Real r = Real(1) / std::sqrt(Real(2));
      m << r, r, r, -r;
      break;
    }
    case GateKind::X:
    case GateKind::CNOT:
      m << 0, 1, 1, 0;
      break;
    case GateKind::Z:
      m << 1, 0, 0, -1;
      break;
    case GateKind::RX:
      m << c, C(0, -s), C(0, -s), c;
      break;
    case GateKind::RY:
      m << c, -s, s, c;
      break;
    case GateKind::RZ:
      m << C(c, -s), 0, 0, C(c, s);
      break;
    default:
      throw UnsupportedVariant("no 2x2 matrix for gate kind " + std::string(to_string(kind)));
  }
  return m;
}

/// d/d(angle) of single_qubit_matrix for the rotation kinds.
template <typename Real>
Matrix2c<Real> single_qubit_derivative(GateKind kind, Real angle) {
  using C = std::complex<Real>;
  const Real c = std::cos(angle / 2) / 2;
  const Real s = std::sin(angle / 2) / 2;
  Matrix2c<Real> m;
  switch (kind) {
    case GateKind::RX:
      m << -s, C(0, -c), C(0, -c), -s;
      break;
    case GateKind::RY:
      m << -s, -c, c, -s;
      break;
    case GateKind::RZ:
      m << C(-s, -c), 0, 0, C(-s, c);
      break;
    default:
      throw UnsupportedVariant("gate kind " + std::string(to_string(kind)) + " has no parameter");
  }
  return m;
}

// Index with a zero bit inserted at the position of `bit` (a power of two).
constexpr Index insert_zero(Index k, Index bit) { return ((k & ~(bit - 1)) << 1) | (k & (bit - 1)); }

template <typename Real>
void apply_matrix(Eigen::VectorX<std::complex<Real>>& amps, Index target, Index controls,
                  const Matrix2c<Real>& m) {
  const Index half = amps.size() / 2;
  for (Index k = 0; k < half; ++k) {
    const Index i = insert_zero(k, target);
    if ((i & controls) != controls) continue;
    const Index j = i | target;
    const auto a0 = amps[i];
    const auto a1 = amps[j];
    amps[i] = m(0, 0) * a0 + m(0, 1) * a1;
    amps[j] = m(1, 0) * a0 + m(1, 1) * a1;
  }
}

template <typename Real>
void apply_phase(Eigen::VectorX<std::complex<Real>>& amps, Index mask, std::complex<Real> phase) {
  for (Index i = 0; i < amps.size(); ++i) {
    if ((i & mask) == mask) amps[i] *= phase;
  }
}

template <typename Real>
void zero_outside(Eigen::VectorX<std::complex<Real>>& amps, Index mask) {
  for (Index i = 0; i < amps.size(); ++i) {
    if ((i & mask) != mask) amps[i] = 0;
  }
}

}  // namespace kernels

/// U|psi>, U^dagger|psi>, or (dU/dangle)|psi> for one primitive op.
enum class OpAction { Forward, Adjoint, Derivative };

template <typename Real>
void apply_op(Eigen::VectorX<std::complex<Real>>& amps, const PrimitiveOp& op, Real angle,
              OpAction action = OpAction::Forward) {
  using C = std::complex<Real>;
  if (op.kind == GateKind::CPhase) {
    const Index mask = op.target | op.partner | op.controls;
    switch (action) {
      case OpAction::Forward:
        kernels::apply_phase(amps, mask, std::polar(Real(1), angle));
        break;
      case OpAction::Adjoint:
        kernels::apply_phase(amps, mask, std::polar(Real(1), -angle));
        break;
      case OpAction::Derivative:
        kernels::zero_outside(amps, mask);
        kernels::apply_phase(amps, mask, C(0, 1) * std::polar(Real(1), angle));
        break;
    }
    return;
  }
  if (action == OpAction::Derivative) {
    kernels::zero_outside(amps, op.controls);
    kernels::apply_matrix(amps, op.target, op.controls,
                          kernels::single_qubit_derivative<Real>(op.kind, angle));
    return;
  }
  auto m = kernels::single_qubit_matrix<Real>(op.kind, angle);
  if (action == OpAction::Adjoint) m = m.adjoint().eval();
  kernels::apply_matrix(amps, op.target, op.controls, m);
}

template <typename Real>
Real op_angle(const PrimitiveOp& op, const Eigen::VectorX<Real>& values) {
  return op.slot ? values[*op.slot] : Real(0);
}

/// Applies `gate` in place; angles are read from `values` through the gate's slot.
template <typename Real>
void apply_gate(StateVector<Real>& state, const Gate& gate, const Eigen::VectorX<Real>& values) {
  for (const auto& op : flatten({gate}, state.n_qubits(), static_cast<int>(values.size()))) {
    apply_op(state.amplitudes(), op, op_angle(op, values));
  }
}

template <typename Real>
void apply_gates(StateVector<Real>& state, const GateList& gates,
                 const Eigen::VectorX<Real>& values) {
  for (const auto& op : flatten(gates, state.n_qubits(), static_cast<int>(values.size()))) {
    apply_op(state.amplitudes(), op, op_angle(op, values));
  }
}

template <typename Real>
Eigen::VectorX<Real> probabilities(const StateVector<Real>& state) {
  return state.amplitudes().cwiseAbs2();
}

/// Diagonal of Z on `qubit` as a +/-1 vector over the computational basis.
template <typename Real = double>
Eigen::VectorX<Real> z_diagonal(int n_qubits, int qubit) {
  const Index bit = qubit_bit(n_qubits, qubit);
  Eigen::VectorX<Real> d(Index{1} << n_qubits);
  for (Index i = 0; i < d.size(); ++i) d[i] = (i & bit) ? Real(-1) : Real(1);
  return d;
}

template <typename Real>
Real expectation_z(const StateVector<Real>& state, int qubit) {
  if (qubit < 0 || qubit >= state.n_qubits()) {
    throw IndexError("qubit " + std::to_string(qubit) + " out of range");
  }
  const Index bit = qubit_bit(state.n_qubits(), qubit);
  Real total = 0;
  const auto& a = state.amplitudes();
  for (Index i = 0; i < a.size(); ++i) {
    const Real p = std::norm(a[i]);
    total += (i & bit) ? -p : p;
  }
  return total;
}

template <typename Real>
struct Postselected {
  StateVector<Real> state;
  Real success_prob;
};

/// Projects `qubit` onto `outcome`, removes it from the register and
/// renormalizes. The returned probability is the pre-projection mass.
template <typename Real>
Postselected<Real> postselect(const StateVector<Real>& state, int qubit, int outcome) {
  const int n = state.n_qubits();
  if (qubit < 0 || qubit >= n) throw IndexError("qubit " + std::to_string(qubit) + " out of range");
  if (outcome != 0 && outcome != 1) throw ParameterError("outcome must be 0 or 1");
  const Index bit = qubit_bit(n, qubit);
  typename StateVector<Real>::Amplitudes kept(state.dim() / 2);
  for (Index k = 0; k < kept.size(); ++k) {
    Index i = kernels::insert_zero(k, bit);
    if (outcome == 1) i |= bit;
    kept[k] = state[i];
  }
  const Real mass = kept.squaredNorm();
  if (mass < Real(kDegenerateThreshold)) {
    throw DegeneratePostselection("post-selection annihilates the state", double(mass));
  }
  kept /= std::sqrt(mass);
  return {StateVector<Real>(n - 1, std::move(kept)), mass};
}

}  // namespace nuqml
