#include "nuqml/fisher.hpp"

#include <cmath>

namespace nuqml {

StateJacobian state_jacobian(const CircuitProgram& program, const ParameterVector& values) {
  if (values.size() != program.n_slots()) throw ParameterError("slot vector length mismatch");
  const auto ops = flatten(program.gates, program.n_qubits, program.n_slots());
  const int n_params = program.n_params;

  State psi(program.n_qubits);
  std::vector<State::Amplitudes> tangents(std::size_t(n_params),
                                          State::Amplitudes::Zero(psi.dim()));
  State::Amplitudes scratch;
  for (const auto& op : ops) {
    const double angle = op_angle(op, values);
    const bool trainable = op.slot && *op.slot < n_params;
    if (trainable) {
      scratch = psi.amplitudes();
      apply_op(scratch, op, angle, OpAction::Derivative);
    }
    for (auto& t : tangents) apply_op(t, op, angle);
    apply_op(psi.amplitudes(), op, angle);
    if (trainable) tangents[std::size_t(*op.slot)] += scratch;
  }

  StateJacobian out;
  const Index live = program.postselect_ancilla ? psi.dim() / 2 : psi.dim();
  out.state = psi.amplitudes().head(live);
  out.derivatives.resize(live, n_params);
  for (int i = 0; i < n_params; ++i) out.derivatives.col(i) = tangents[std::size_t(i)].head(live);

  if (program.postselect_ancilla) {
    const double mass = out.state.squaredNorm();
    if (mass < kDegenerateThreshold) {
      throw DegeneratePostselection("QFI on an annihilated post-selected state", mass);
    }
    const double norm = std::sqrt(mass);
    // d(phi/|phi|) = dphi/|phi| - phi Re<phi|dphi> / |phi|^3
    const Eigen::RowVectorXd overlap = (out.state.adjoint() * out.derivatives).real();
    out.derivatives = out.derivatives / norm -
                      out.state * overlap.cast<std::complex<double>>() / (mass * norm);
    out.state /= norm;
  }
  return out;
}

QfiResult qfi_from_state(const StateJacobian& jacobian) {
  const Eigen::MatrixXcd& d = jacobian.derivatives;
  const Eigen::VectorXcd overlap = d.adjoint() * jacobian.state;  // <d_i psi|psi>
  const Eigen::MatrixXd f = 4.0 * (d.adjoint() * d - overlap * overlap.adjoint()).real();
  QfiResult out;
  out.matrix = 0.5 * (f + f.transpose());
  out.trace = out.matrix.trace();
  return out;
}

QfiResult qfi_matrix(const CircuitProgram& program, const ParameterVector& values) {
  return qfi_from_state(state_jacobian(program, values));
}

QfiResult qfi_matrix(const QuantumLayerSpec& spec, const Eigen::VectorXd& params,
                     const Eigen::VectorXd& inputs) {
  const auto program = build_layer(spec);
  return qfi_matrix(program, program.bind(params, inputs));
}

double effective_dimension(const QfiResult& qfi) { return qfi.matrix.trace(); }

double fisher_efficiency(long long n_classical, long long n_quantum) {
  if (n_classical == 0) throw ParameterError("fisher efficiency: classical parameter count is zero");
  return double(n_classical - n_quantum) / double(n_classical) * 100.0;
}

double fisher_efficiency_perf(double acc_lcu, double acc_nolcu, double acc_classical) {
  if (acc_classical == 0.0) throw ParameterError("fisher efficiency: classical baseline is zero");
  return (acc_lcu - acc_nolcu) / acc_classical * 100.0;
}

EfficiencyReport make_efficiency_report(long long n_classical, long long n_quantum,
                                        double acc_lcu, double acc_nolcu, double acc_classical) {
  return {fisher_efficiency(n_classical, n_quantum),
          fisher_efficiency_perf(acc_lcu, acc_nolcu, acc_classical),
          n_classical,
          n_quantum,
          acc_lcu,
          acc_nolcu,
          acc_classical};
}

void to_json(nlohmann::json& j, const EfficiencyReport& r) {
  j = nlohmann::json{{"eta_param", r.eta_param},     {"eta_perf", r.eta_perf},
                     {"n_classical", r.n_classical}, {"n_quantum", r.n_quantum},
                     {"acc_lcu", r.acc_lcu},         {"acc_nolcu", r.acc_nolcu},
                     {"acc_classical", r.acc_classical}};
}

void from_json(const nlohmann::json& j, EfficiencyReport& r) {
  j.at("eta_param").get_to(r.eta_param);
  j.at("eta_perf").get_to(r.eta_perf);
  j.at("n_classical").get_to(r.n_classical);
  j.at("n_quantum").get_to(r.n_quantum);
  j.at("acc_lcu").get_to(r.acc_lcu);
  j.at("acc_nolcu").get_to(r.acc_nolcu);
  j.at("acc_classical").get_to(r.acc_classical);
}

}  // namespace nuqml
