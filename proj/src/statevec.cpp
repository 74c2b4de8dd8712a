#include "nuqml/statevec.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace nuqml {

namespace {

constexpr std::array<std::pair<GateKind, std::string_view>, 9> kGateNames{{
    {GateKind::H, "H"},
    {GateKind::X, "X"},
    {GateKind::Z, "Z"},
    {GateKind::RX, "RX"},
    {GateKind::RY, "RY"},
    {GateKind::RZ, "RZ"},
    {GateKind::CNOT, "CNOT"},
    {GateKind::CPhase, "CPhase"},
    {GateKind::Controlled, "Controlled"},
}};

std::size_t arity(GateKind kind) {
  switch (kind) {
    case GateKind::CNOT:
    case GateKind::CPhase:
      return 2;
    default:
      return 1;
  }
}

void flatten_into(const GateList& gates, int n_qubits, int n_slots, Index controls,
                  std::vector<PrimitiveOp>& out) {
  for (const auto& gate : gates) {
    validate_gate(gate, n_qubits, n_slots);
    const auto bit = [&](int q) { return qubit_bit(n_qubits, q); };
    PrimitiveOp op;
    op.kind = gate.kind;
    op.slot = gate.slot;
    op.controls = controls;
    switch (gate.kind) {
      case GateKind::Controlled:
        if ((controls & bit(gate.qubits[0])) != 0) {
          throw IndexError("nested control reuses qubit " + std::to_string(gate.qubits[0]));
        }
        flatten_into(*gate.body, n_qubits, n_slots, controls | bit(gate.qubits[0]), out);
        continue;
      case GateKind::CNOT:
        op.controls |= bit(gate.qubits[0]);
        op.target = bit(gate.qubits[1]);
        break;
      case GateKind::CPhase:
        op.target = bit(gate.qubits[0]);
        op.partner = bit(gate.qubits[1]);
        break;
      default:
        op.target = bit(gate.qubits[0]);
        break;
    }
    if (((op.target | op.partner) & controls) != 0) {
      throw IndexError("controlled body acts on its own control qubit");
    }
    out.push_back(op);
  }
}

}  // namespace

std::string_view to_string(GateKind kind) {
  for (const auto& [k, name] : kGateNames) {
    if (k == kind) return name;
  }
  return "?";
}

GateKind gate_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kGateNames) {
    if (n == name) return k;
  }
  throw FormatError("unknown gate kind '" + std::string(name) + "'");
}

bool operator==(const Gate& a, const Gate& b) {
  if (a.kind != b.kind || a.qubits != b.qubits || a.slot != b.slot) return false;
  if (!a.body || !b.body) return a.body == b.body;
  return *a.body == *b.body;
}

int primitive_count(const GateList& gates) {
  int count = 0;
  for (const auto& g : gates) {
    count += g.kind == GateKind::Controlled ? primitive_count(*g.body) : 1;
  }
  return count;
}

void validate_gate(const Gate& gate, int n_qubits, int n_slots) {
  if (gate.qubits.size() != arity(gate.kind)) {
    throw IndexError(std::string(to_string(gate.kind)) + " expects " +
                     std::to_string(arity(gate.kind)) + " qubit index(es)");
  }
  for (int q : gate.qubits) {
    if (q < 0 || q >= n_qubits) {
      throw IndexError("qubit index " + std::to_string(q) + " out of range for " +
                       std::to_string(n_qubits) + " qubits");
    }
  }
  if (gate.qubits.size() == 2 && gate.qubits[0] == gate.qubits[1]) {
    throw IndexError("two-qubit gate targets must be distinct");
  }
  if (is_parametric(gate.kind)) {
    if (!gate.slot) throw ParameterError(std::string(to_string(gate.kind)) + " needs a slot");
    if (*gate.slot < 0 || *gate.slot >= n_slots) {
      throw ParameterError("slot " + std::to_string(*gate.slot) + " unresolved (" +
                           std::to_string(n_slots) + " values bound)");
    }
  } else if (gate.slot) {
    throw ParameterError(std::string(to_string(gate.kind)) + " takes no parameter");
  }
  if (gate.kind == GateKind::Controlled && !gate.body) {
    throw ParameterError("controlled gate without a body");
  }
}

std::vector<PrimitiveOp> flatten(const GateList& gates, int n_qubits, int n_slots) {
  std::vector<PrimitiveOp> ops;
  ops.reserve(gates.size());
  flatten_into(gates, n_qubits, n_slots, 0, ops);
  return ops;
}

}  // namespace nuqml
