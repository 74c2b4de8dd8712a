#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

#include <json.hpp>

#include "nuqml/statevec.hpp"

namespace nuqml {

/// Ordered gate list over a fixed register with a flat slot layout: slots
/// [0, n_params) are trainable angles, [n_params, n_params + n_inputs) are
/// data-encoding inputs. When `postselect_ancilla` is set, qubit 0 is an
/// ancilla that is post-selected on |0> and qubits 1..n_qubits-1 are the
/// main register.
struct CircuitProgram {
  int n_qubits = 0;
  GateList gates;
  int n_params = 0;
  int n_inputs = 0;
  bool postselect_ancilla = false;

  int n_slots() const { return n_params + n_inputs; }
  int n_main() const { return postselect_ancilla ? n_qubits - 1 : n_qubits; }
  int gate_count() const { return primitive_count(gates); }

  /// Concatenates trainable parameters and inputs into the slot vector.
  ParameterVector bind(const Eigen::VectorXd& params, const Eigen::VectorXd& inputs) const;

  friend bool operator==(const CircuitProgram&, const CircuitProgram&) = default;
};

/// RY(x_i) on qubit i; all slots are inputs.
CircuitProgram build_angle_embedding(int n_qubits);

/// `n_blocks` repetitions of [RX on every qubit, CNOT(i, i+1) for i < N-1].
CircuitProgram build_variational_ansatz(int n_qubits, int n_blocks = 4);

enum class IqpTopology {
  Circular,  // ring plus the (N-1, 0) wrap gate when N > 2
  Ring,      // (i, i+1) pairs only
};

/// H^N . RZ(theta_i) . CPhase ring . H^N. Slots start at `slot_base`; the
/// program reports n_params = slot_base + (gates with parameters).
CircuitProgram build_iqp_block(int n_qubits, int slot_base = 0,
                               IqpTopology topology = IqpTopology::Circular);

int iqp_parameter_count(int n_qubits, IqpTopology topology = IqpTopology::Circular);

/// Reinterprets every trainable slot of `program` as a data input.
CircuitProgram as_inputs(CircuitProgram program);

/// `first` followed by `second` on the same register; slots are relaid out as
/// [first params, second params, first inputs, second inputs].
CircuitProgram sequence(const CircuitProgram& first, const CircuitProgram& second);

/// Single-ancilla LCU wrapper on N+1 qubits:
///   H(anc), prelude on main qubits, Controlled(anc){controlled}, H(anc)
/// with the ancilla post-selected on 0. The prelude (usually the data
/// embedding) runs unconditionally.
CircuitProgram build_lcu_wrapped(const CircuitProgram& controlled,
                                 const CircuitProgram& prelude = CircuitProgram{});

/// IQP data block (ring topology, 2N-1 inputs) followed by a trainable IQP
/// block, both inside the LCU controlled region.
CircuitProgram build_iqp_embedding_model(int n_qubits);

/// Bookkeeping tally for the LCU-wrapped 4-block ansatz: 2 ancilla Hadamards
/// + (9N - 4) + (N + N - 1) for the controlled rotations and CNOTs.
int lcu_gate_tally(int n_main);

enum class LayerVariant { NoLCU, LCU, IqpLayer, IqpEmbedding };

std::string_view to_string(LayerVariant variant);
LayerVariant layer_variant_from_string(std::string_view name);

struct QuantumLayerSpec {
  LayerVariant variant = LayerVariant::LCU;
  int n_qubits = 4;
  int n_blocks = 4;

  int n_params() const;
  int n_inputs() const;
  bool postselected() const { return variant != LayerVariant::NoLCU; }

  friend bool operator==(const QuantumLayerSpec&, const QuantumLayerSpec&) = default;
};

CircuitProgram build_layer(const QuantumLayerSpec& spec);

struct LayerOutput {
  Eigen::VectorXd expectations;  // <Z_i> over the main register
  double success_prob = 1.0;     // 1 for unitary programs
};

/// Full register state after running the program from |0...0>.
State run(const CircuitProgram& program, const ParameterVector& values);

/// Expectations of Z on every main qubit, post-selected when the program
/// carries an ancilla. Throws DegeneratePostselection below kDegenerateThreshold.
LayerOutput evaluate(const CircuitProgram& program, const ParameterVector& values);

LayerOutput forward_nonunitary(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                               const Eigen::VectorXd& inputs);
Eigen::VectorXd forward_unitary(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                                const Eigen::VectorXd& inputs);

/// Finite-shot estimate of `evaluate`: multinomial draws from the exact
/// distribution, discarding ancilla=1 shots on post-selected programs.
LayerOutput sample_expectations(const CircuitProgram& program, const ParameterVector& values,
                                int shots, std::mt19937_64& rng);

void to_json(nlohmann::json& j, const Gate& gate);
void from_json(const nlohmann::json& j, Gate& gate);
void to_json(nlohmann::json& j, const CircuitProgram& program);
void from_json(const nlohmann::json& j, CircuitProgram& program);
void to_json(nlohmann::json& j, const QuantumLayerSpec& spec);
void from_json(const nlohmann::json& j, QuantumLayerSpec& spec);

}  // namespace nuqml
