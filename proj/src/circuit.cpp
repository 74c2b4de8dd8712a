#include "nuqml/circuit.hpp"

#include <array>
#include <string>

namespace nuqml {

namespace {

template <typename QubitMap, typename SlotMap>
GateList remap(const GateList& gates, QubitMap&& qubit_map, SlotMap&& slot_map) {
  GateList out;
  out.reserve(gates.size());
  for (const auto& g : gates) {
    Gate copy = g;
    for (int& q : copy.qubits) q = qubit_map(q);
    if (copy.slot) copy.slot = slot_map(*copy.slot);
    if (g.kind == GateKind::Controlled) {
      copy.body = std::make_shared<const GateList>(remap(*g.body, qubit_map, slot_map));
    }
    out.push_back(std::move(copy));
  }
  return out;
}

// Slot permutation used when concatenating two programs' layouts.
struct SlotLayout {
  int first_params, second_params, first_inputs;
  int total_params() const { return first_params + second_params; }
};

void require_qubits(int n, int min, const char* what) {
  if (n < min || n > kMaxQubits) {
    throw CapacityError(std::string(what) + ": qubit count " + std::to_string(n) +
                        " outside [" + std::to_string(min) + ", " + std::to_string(kMaxQubits) +
                        "]");
  }
}

constexpr std::array<std::pair<LayerVariant, std::string_view>, 4> kVariantNames{{
    {LayerVariant::NoLCU, "NoLCU"},
    {LayerVariant::LCU, "LCU"},
    {LayerVariant::IqpLayer, "IqpLayer"},
    {LayerVariant::IqpEmbedding, "IqpEmbedding"},
}};

}  // namespace

ParameterVector CircuitProgram::bind(const Eigen::VectorXd& params,
                                     const Eigen::VectorXd& inputs) const {
  if (params.size() != n_params) {
    throw ParameterError("expected " + std::to_string(n_params) + " parameters, got " +
                         std::to_string(params.size()));
  }
  if (inputs.size() != n_inputs) {
    throw ParameterError("expected " + std::to_string(n_inputs) + " inputs, got " +
                         std::to_string(inputs.size()));
  }
  ParameterVector values(n_slots());
  values << params, inputs;
  return values;
}

CircuitProgram build_angle_embedding(int n_qubits) {
  require_qubits(n_qubits, 1, "angle embedding");
  CircuitProgram p{n_qubits, {}, 0, n_qubits, false};
  for (int q = 0; q < n_qubits; ++q) p.gates.push_back(Gate::ry(q, q));
  return p;
}

CircuitProgram build_variational_ansatz(int n_qubits, int n_blocks) {
  require_qubits(n_qubits, 2, "variational ansatz");
  if (n_blocks < 1) throw ConfigError("ansatz needs at least one block");
  CircuitProgram p{n_qubits, {}, n_qubits * n_blocks, 0, false};
  for (int b = 0; b < n_blocks; ++b) {
    for (int q = 0; q < n_qubits; ++q) p.gates.push_back(Gate::rx(q, b * n_qubits + q));
    for (int q = 0; q + 1 < n_qubits; ++q) p.gates.push_back(Gate::cnot(q, q + 1));
  }
  return p;
}

int iqp_parameter_count(int n_qubits, IqpTopology topology) {
  const bool wrap = topology == IqpTopology::Circular && n_qubits > 2;
  return n_qubits + (n_qubits - 1) + (wrap ? 1 : 0);
}

CircuitProgram build_iqp_block(int n_qubits, int slot_base, IqpTopology topology) {
  require_qubits(n_qubits, 1, "IQP block");
  if (slot_base < 0) throw ParameterError("negative slot base");
  CircuitProgram p{n_qubits, {}, slot_base + iqp_parameter_count(n_qubits, topology), 0, false};
  int slot = slot_base;
  for (int q = 0; q < n_qubits; ++q) p.gates.push_back(Gate::h(q));
  for (int q = 0; q < n_qubits; ++q) p.gates.push_back(Gate::rz(q, slot++));
  for (int q = 0; q + 1 < n_qubits; ++q) p.gates.push_back(Gate::cphase(q, q + 1, slot++));
  if (topology == IqpTopology::Circular && n_qubits > 2) {
    p.gates.push_back(Gate::cphase(n_qubits - 1, 0, slot++));
  }
  for (int q = 0; q < n_qubits; ++q) p.gates.push_back(Gate::h(q));
  return p;
}

CircuitProgram as_inputs(CircuitProgram program) {
  // Slot indices are unchanged: with zero trainables every slot is an input.
  program.n_inputs += program.n_params;
  program.n_params = 0;
  return program;
}

CircuitProgram sequence(const CircuitProgram& first, const CircuitProgram& second) {
  if (first.n_qubits != second.n_qubits) {
    throw IndexError("sequence: register sizes differ");
  }
  if (first.postselect_ancilla || second.postselect_ancilla) {
    throw UnsupportedVariant("sequence: cannot compose post-selected programs");
  }
  const SlotLayout layout{first.n_params, second.n_params, first.n_inputs};
  const auto keep = [](int q) { return q; };
  const auto map_first = [&](int s) {
    return s < layout.first_params ? s : layout.total_params() + (s - layout.first_params);
  };
  const auto map_second = [&](int s) {
    return s < layout.second_params
               ? layout.first_params + s
               : layout.total_params() + layout.first_inputs + (s - layout.second_params);
  };
  CircuitProgram out{first.n_qubits, remap(first.gates, keep, map_first),
                     first.n_params + second.n_params, first.n_inputs + second.n_inputs, false};
  auto tail = remap(second.gates, keep, map_second);
  out.gates.insert(out.gates.end(), tail.begin(), tail.end());
  return out;
}

CircuitProgram build_lcu_wrapped(const CircuitProgram& controlled, const CircuitProgram& prelude) {
  if (controlled.n_qubits < 1) throw CapacityError("LCU wrapper needs at least one main qubit");
  if (controlled.postselect_ancilla || prelude.postselect_ancilla) {
    throw UnsupportedVariant("LCU wrapper: operand is already post-selected");
  }
  CircuitProgram pre = prelude;
  if (pre.n_qubits == 0) pre.n_qubits = controlled.n_qubits;
  const CircuitProgram inner = sequence(pre, controlled);
  const int n_main = controlled.n_qubits;
  require_qubits(n_main + 1, 2, "LCU wrapper");

  // sequence() laid out prelude gates first; split them back apart.
  const auto prelude_len = static_cast<std::ptrdiff_t>(pre.gates.size());
  const auto shift = [](int q) { return q + 1; };
  const auto same = [](int s) { return s; };
  GateList pre_gates(inner.gates.begin(), inner.gates.begin() + prelude_len);
  GateList body(inner.gates.begin() + prelude_len, inner.gates.end());

  CircuitProgram out{n_main + 1, {}, inner.n_params, inner.n_inputs, true};
  out.gates.push_back(Gate::h(0));
  for (auto& g : remap(pre_gates, shift, same)) out.gates.push_back(std::move(g));
  out.gates.push_back(Gate::controlled(0, remap(body, shift, same)));
  out.gates.push_back(Gate::h(0));
  return out;
}

CircuitProgram build_iqp_embedding_model(int n_qubits) {
  require_qubits(n_qubits, 2, "IQP embedding");
  const auto data = as_inputs(build_iqp_block(n_qubits, 0, IqpTopology::Ring));
  const auto trainable = build_iqp_block(n_qubits, 0, IqpTopology::Circular);
  return build_lcu_wrapped(sequence(data, trainable));
}

int lcu_gate_tally(int n_main) {
  const int hadamards = 2;
  const int variational = 9 * n_main - 4;
  const int controlled = n_main + (n_main - 1);
  return hadamards + variational + controlled;
}

std::string_view to_string(LayerVariant variant) {
  for (const auto& [v, name] : kVariantNames) {
    if (v == variant) return name;
  }
  return "?";
}

LayerVariant layer_variant_from_string(std::string_view name) {
  for (const auto& [v, n] : kVariantNames) {
    if (n == name) return v;
  }
  throw ConfigError("unknown layer variant '" + std::string(name) + "'");
}

int QuantumLayerSpec::n_params() const {
  switch (variant) {
    case LayerVariant::NoLCU:
    case LayerVariant::LCU:
      return n_qubits * n_blocks;
    case LayerVariant::IqpLayer:
    case LayerVariant::IqpEmbedding:
      return iqp_parameter_count(n_qubits, IqpTopology::Circular);
  }
  return 0;
}

int QuantumLayerSpec::n_inputs() const {
  if (variant == LayerVariant::IqpEmbedding) {
    return iqp_parameter_count(n_qubits, IqpTopology::Ring);
  }
  return n_qubits;
}

CircuitProgram build_layer(const QuantumLayerSpec& spec) {
  switch (spec.variant) {
    case LayerVariant::NoLCU:
      return sequence(build_angle_embedding(spec.n_qubits),
                      build_variational_ansatz(spec.n_qubits, spec.n_blocks));
    case LayerVariant::LCU:
      return build_lcu_wrapped(build_variational_ansatz(spec.n_qubits, spec.n_blocks),
                               build_angle_embedding(spec.n_qubits));
    case LayerVariant::IqpLayer:
      return build_lcu_wrapped(build_iqp_block(spec.n_qubits),
                               build_angle_embedding(spec.n_qubits));
    case LayerVariant::IqpEmbedding:
      return build_iqp_embedding_model(spec.n_qubits);
  }
  throw UnsupportedVariant("unknown layer variant");
}

State run(const CircuitProgram& program, const ParameterVector& values) {
  if (values.size() != program.n_slots()) {
    throw ParameterError("slot vector length " + std::to_string(values.size()) +
                         " does not match program (" + std::to_string(program.n_slots()) + ")");
  }
  State state(program.n_qubits);
  apply_gates(state, program.gates, values);
  return state;
}

LayerOutput evaluate(const CircuitProgram& program, const ParameterVector& values) {
  const State full = run(program, values);
  LayerOutput out;
  if (program.postselect_ancilla) {
    const auto post = postselect(full, 0, 0);
    out.success_prob = post.success_prob;
    out.expectations.resize(program.n_main());
    for (int q = 0; q < program.n_main(); ++q) out.expectations[q] = expectation_z(post.state, q);
  } else {
    out.expectations.resize(program.n_qubits);
    for (int q = 0; q < program.n_qubits; ++q) out.expectations[q] = expectation_z(full, q);
  }
  return out;
}

LayerOutput forward_nonunitary(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                               const Eigen::VectorXd& inputs) {
  if (!spec.postselected()) {
    throw UnsupportedVariant("forward_nonunitary on unitary variant " +
                             std::string(to_string(spec.variant)));
  }
  const auto program = build_layer(spec);
  return evaluate(program, program.bind(params, inputs));
}

Eigen::VectorXd forward_unitary(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                                const Eigen::VectorXd& inputs) {
  if (spec.postselected()) {
    throw UnsupportedVariant("forward_unitary on post-selected variant " +
                             std::string(to_string(spec.variant)));
  }
  const auto program = build_layer(spec);
  return evaluate(program, program.bind(params, inputs)).expectations;
}

LayerOutput sample_expectations(const CircuitProgram& program, const ParameterVector& values,
                                int shots, std::mt19937_64& rng) {
  if (shots < 1) throw ParameterError("shot count must be positive");
  const State full = run(program, values);
  const Eigen::VectorXd p = probabilities(full);
  std::discrete_distribution<Index> draw(p.data(), p.data() + p.size());

  const int n_main = program.n_main();
  const Index ancilla = program.postselect_ancilla ? qubit_bit(program.n_qubits, 0) : 0;
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(n_main);
  int accepted = 0;
  for (int s = 0; s < shots; ++s) {
    const Index outcome = draw(rng);
    if (outcome & ancilla) continue;
    ++accepted;
    for (int q = 0; q < n_main; ++q) {
      const int wire = program.postselect_ancilla ? q + 1 : q;
      sums[q] += (outcome & qubit_bit(program.n_qubits, wire)) ? -1.0 : 1.0;
    }
  }
  if (accepted == 0) throw DegeneratePostselection("no shot passed post-selection", 0.0);
  return {sums / accepted, double(accepted) / shots};
}

void to_json(nlohmann::json& j, const Gate& gate) {
  j = nlohmann::json{{"kind", to_string(gate.kind)}, {"qubits", gate.qubits}};
  if (gate.slot) j["slot"] = *gate.slot;
  if (gate.body) j["body"] = *gate.body;
}

void from_json(const nlohmann::json& j, Gate& gate) {
  gate.kind = gate_kind_from_string(j.at("kind").get<std::string>());
  gate.qubits = j.at("qubits").get<std::vector<int>>();
  gate.slot = j.contains("slot") ? std::optional<int>(j.at("slot").get<int>()) : std::nullopt;
  gate.body = j.contains("body") ? std::make_shared<const GateList>(j.at("body").get<GateList>())
                                 : nullptr;
}

void to_json(nlohmann::json& j, const CircuitProgram& program) {
  j = nlohmann::json{{"n_qubits", program.n_qubits},
                     {"n_params", program.n_params},
                     {"n_inputs", program.n_inputs},
                     {"postselect_ancilla", program.postselect_ancilla},
                     {"gate_count", program.gate_count()},
                     {"gates", program.gates}};
}

void from_json(const nlohmann::json& j, CircuitProgram& program) {
  program.n_qubits = j.at("n_qubits").get<int>();
  program.n_params = j.at("n_params").get<int>();
  program.n_inputs = j.at("n_inputs").get<int>();
  program.postselect_ancilla = j.value("postselect_ancilla", false);
  program.gates = j.at("gates").get<GateList>();
  for (const auto& g : program.gates) validate_gate(g, program.n_qubits, program.n_slots());
}

void to_json(nlohmann::json& j, const QuantumLayerSpec& spec) {
  j = nlohmann::json{{"variant", to_string(spec.variant)},
                     {"n_qubits", spec.n_qubits},
                     {"n_blocks", spec.n_blocks}};
}

void from_json(const nlohmann::json& j, QuantumLayerSpec& spec) {
  spec.variant = layer_variant_from_string(j.at("variant").get<std::string>());
  spec.n_qubits = j.at("n_qubits").get<int>();
  spec.n_blocks = j.value("n_blocks", 4);
}

}  // namespace nuqml
