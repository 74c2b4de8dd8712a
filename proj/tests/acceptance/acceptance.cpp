#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "dense_oracle.hpp"
#include "nuqml/circuit.hpp"
#include "nuqml/fisher.hpp"
#include "nuqml/grad.hpp"
#include "nuqml/harness.hpp"
#include "nuqml/hybrid.hpp"
#include "nuqml/lcu.hpp"
#include "nuqml/stats.hpp"
#include "stats_oracle.hpp"

namespace nuqml::acceptance {
namespace {

namespace fs = std::filesystem;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr LayerVariant kVariants[] = {LayerVariant::NoLCU, LayerVariant::LCU,
                                      LayerVariant::IqpLayer, LayerVariant::IqpEmbedding};

// Collects failed checks; the first few end up in the detail line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok && failures_.size() < 4) failures_.push_back(what);
    failed_ += !ok;
  }
  bool ok() const { return failed_ == 0; }
  std::string failures() const {
    std::string out = std::to_string(failed_) + "/" + std::to_string(total_) + " checks failed";
    for (const auto& f : failures_) out += "; " + f;
    return out;
  }

 private:
  int total_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

std::string sci(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << v;
  return s.str();
}

double max_abs(const MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome lcu_wrapper() {
  std::mt19937_64 rng(101);
  double worst_infidelity = 0, worst_prob = 0;
  int draws = 0;
  for (int n = 1; n <= 3; ++n) {
    const auto w = n >= 2 ? build_variational_ansatz(n, 4)
                          : CircuitProgram{1, {Gate::rx(0, 0), Gate::ry(0, 1), Gate::rz(0, 2)},
                                           3, 0, false};
    const auto embedding = build_angle_embedding(n);
    const auto program = build_lcu_wrapped(w, embedding);
    for (int k = 0; k < 50; ++k, ++draws) {
      const VectorXd theta = oracle::random_angles(w.n_params, rng);
      const VectorXd x = oracle::random_angles(n, rng);
      const VectorXcd psi = oracle::program_unitary(embedding, x) * oracle::basis_zero(n);
      const VectorXcd phi = psi + oracle::program_unitary(w, theta) * psi;
      const auto post = postselect(run(program, program.bind(theta, x)), 0, 0);
      worst_infidelity = std::max(
          worst_infidelity, 1.0 - oracle::fidelity(post.state.amplitudes(), phi.normalized()));
      worst_prob = std::max(worst_prob, std::abs(post.success_prob - phi.squaredNorm() / 4.0));
    }
  }
  return {worst_infidelity < 1e-9 && worst_prob < 1e-12,
          std::to_string(draws) + " draws, max 1-F " + sci(worst_infidelity) + ", max |dp| " +
              sci(worst_prob)};
}

Outcome general_lcu() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> coef(0.05, 3.0);
  double worst = 0, worst_prob = 0;
  for (int k : {1, 2, 4}) {
    for (int n = 1; n <= 2; ++n) {
      for (int trial = 0; trial < 10; ++trial) {
        LcuDecomposition d;
        const Index dim = Index{1} << n;
        for (int i = 0; i < k; ++i) {
          d.coefficients.push_back(coef(rng));
          d.unitaries.push_back(oracle::random_unitary(dim, rng));
        }
        const VectorXcd psi = oracle::random_state(dim, rng);
        VectorXcd sum = VectorXcd::Zero(dim);
        double total = 0;
        for (int i = 0; i < k; ++i) {
          sum += d.coefficients[i] * d.unitaries[i] * psi;
          total += d.coefficients[i];
        }
        const auto out = lcu_apply_general(d, State(n, psi));
        worst = std::max(worst, max_abs((out.state.amplitudes() - sum.normalized()).cwiseAbs()));
        worst_prob = std::max(worst_prob, std::abs(out.success_prob - (sum / total).squaredNorm()));
      }
    }
  }
  double worst_simplified = 0;
  for (int n = 1; n <= 2; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto w = n == 2 ? build_variational_ansatz(2, 4)
                            : CircuitProgram{1, {Gate::rx(0, 0), Gate::rz(0, 1)}, 2, 0, false};
      const VectorXd theta = oracle::random_angles(w.n_params, rng);
      const VectorXd x = oracle::random_angles(n, rng);
      const auto program = build_lcu_wrapped(w, build_angle_embedding(n));
      const auto simplified = postselect(run(program, program.bind(theta, x)), 0, 0);
      const auto general = lcu_apply_general(
          {{1.0, 1.0}, {MatrixXcd::Identity(Index{1} << n, Index{1} << n),
                        oracle::program_unitary(w, theta)}},
          run(build_angle_embedding(n), x));
      worst_simplified = std::max(
          {worst_simplified,
           max_abs((general.state.amplitudes() - simplified.state.amplitudes()).cwiseAbs()),
           std::abs(general.success_prob - simplified.success_prob)});
    }
  }
  return {worst < 1e-9 && worst_prob < 1e-12 && worst_simplified < 1e-12,
          "max amp err " + sci(worst) + ", max |dp| " + sci(worst_prob) +
              ", K=2 vs wrapper " + sci(worst_simplified)};
}

Outcome structural_counts() {
  Checks c;
  for (int n = 2; n <= 12; ++n) {
    const std::string at = " at N=" + std::to_string(n);
    const auto nolcu = build_layer({LayerVariant::NoLCU, n, 4});
    const auto lcu = build_layer({LayerVariant::LCU, n, 4});
    c.expect(build_variational_ansatz(n, 4).n_params == 4 * n, "ansatz params" + at);
    c.expect(nolcu.n_params == 4 * n && lcu.n_params == 4 * n, "layer params" + at);
    c.expect(nolcu.gate_count() == 9 * n - 4, "NoLCU gate count" + at);
    c.expect(lcu.gate_count() == nolcu.gate_count() + 2, "LCU primitive count" + at);
    const int tally = lcu_gate_tally(n);
    c.expect(tally == 2 + (9 * n - 4) + (n + n - 1), "LCU tally terms" + at);
    c.expect(std::abs(tally - (11 * n - 2)) <= 1, "LCU tally vs 11N-2" + at);
    const int iqp = n > 2 ? 2 * n : 2 * n - 1;
    c.expect(iqp_parameter_count(n) == iqp, "IQP parameter count" + at);
    c.expect(build_iqp_block(n).n_params == iqp, "IQP block params" + at);
    c.expect(QuantumLayerSpec{LayerVariant::IqpLayer, n, 4}.n_params() == iqp, "IqpLayer params" + at);
    c.expect(QuantumLayerSpec{LayerVariant::IqpEmbedding, n, 4}.n_inputs() == 2 * n - 1,
             "IqpEmbedding inputs" + at);
    c.expect(build_iqp_embedding_model(n).n_inputs == 2 * n - 1, "IQP embedding model inputs" + at);
  }
  return {c.ok(), c.ok() ? "N=2..12, LCU tally 2+(9N-4)+(2N-1) = 11N-3" : c.failures()};
}

// Dense-matrix expectations of the main register, independent of the simulator.
VectorXd dense_expectations(const CircuitProgram& p, const VectorXd& values) {
  const auto out = oracle::dense_output(p, values);
  return oracle::z_expectations(out.state, p.n_main());
}

MatrixXd dense_jacobian_fd(const CircuitProgram& p, const VectorXd& values, double h) {
  MatrixXd jac(p.n_main(), p.n_slots());
  for (int k = 0; k < p.n_slots(); ++k) {
    VectorXd up = values, down = values;
    up[k] += h;
    down[k] -= h;
    jac.col(k) = (dense_expectations(p, up) - dense_expectations(p, down)) / (2 * h);
  }
  return jac;
}

double hybrid_fd_error(const HybridModel& model, const MatrixXd& x, const Targets& t, LossKind loss) {
  const auto lg = loss_and_grad(model, x, t, loss);
  const VectorXd p0 = pack_parameters(model);
  VectorXd fd(p0.size());
  const double h = 1e-5;
  HybridModel m = model;
  for (Index k = 0; k < p0.size(); ++k) {
    VectorXd p = p0;
    p[k] += h;
    unpack_parameters(m, p);
    const double up = loss_value(forward(m, x).outputs, t, loss);
    p[k] -= 2 * h;
    unpack_parameters(m, p);
    fd[k] = (up - loss_value(forward(m, x).outputs, t, loss)) / (2 * h);
  }
  return max_abs(lg.gradient - fd);
}

Outcome gradients() {
  std::mt19937_64 rng(303);
  double worst_layer = 0, worst_shift = 0, worst_hybrid = 0;
  for (auto variant : kVariants) {
    for (int n = 2; n <= 4; ++n) {
      const auto program = build_layer({variant, n, 4});
      for (int draw = 0; draw < 20; ++draw) {
        const VectorXd values = oracle::random_angles(program.n_slots(), rng);
        const auto rev = grad_reverse(program, values);
        MatrixXd joined(rev.d_params.rows(), program.n_slots());
        joined << rev.d_params, rev.d_inputs;
        worst_layer = std::max(worst_layer, max_abs(joined - dense_jacobian_fd(program, values, 1e-5)));
        if (!program.postselect_ancilla) {
          for (int s = 0; s < program.n_params; ++s) {
            worst_shift = std::max(
                worst_shift, max_abs(grad_parameter_shift(program, values, s) - rev.d_params.col(s)));
          }
        }
      }
    }
  }
  // The bare IQP block is the other unitary circuit in the model zoo.
  for (int n = 2; n <= 4; ++n) {
    const auto block = build_iqp_block(n);
    for (int draw = 0; draw < 20; ++draw) {
      const VectorXd values = oracle::random_angles(block.n_slots(), rng);
      const auto rev = grad_reverse(block, values);
      for (int s = 0; s < block.n_params; ++s) {
        worst_shift = std::max(worst_shift,
                               max_abs(grad_parameter_shift(block, values, s) - rev.d_params.col(s)));
      }
    }
  }
  std::vector<std::optional<QuantumLayerSpec>> specs{std::nullopt};
  for (auto variant : kVariants) {
    for (int n = 2; n <= 4; ++n) specs.push_back(QuantumLayerSpec{variant, n, 4});
  }
  for (const auto& spec : specs) {
    for (int draw = 0; draw < (spec ? 2 : 20); ++draw) {
      ModelShape shape;
      shape.input_dim = 3;
      shape.extractor_hidden = {5};
      shape.quantum = spec;
      shape.feature_width = 4;
      shape.head_hidden = 6;
      shape.n_outputs = 3;
      auto model = init_model(shape, rng());
      // Zero biases can park a ReLU exactly on its kink; move off it.
      std::uniform_real_distribution<double> jitter(-0.2, 0.2);
      VectorXd p = pack_parameters(model);
      for (auto& v : p) v += jitter(rng);
      unpack_parameters(model, p);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      const MatrixXd x = MatrixXd::NullaryExpr(3, 4, [&] { return unit(rng); });
      const MatrixXd y = MatrixXd::NullaryExpr(3, 4, [&] { return unit(rng); });
      worst_hybrid = std::max(
          {worst_hybrid,
           hybrid_fd_error(model, x, Targets{Eigen::Vector4i(0, 2, 1, 2), {}}, LossKind::CrossEntropy),
           hybrid_fd_error(model, x, Targets{{}, y}, LossKind::Mse)});
    }
  }
  return {worst_layer < 1e-4 && worst_hybrid < 1e-4 && worst_shift < 1e-9,
          "layer rev-FD " + sci(worst_layer) + ", model rev-FD " + sci(worst_hybrid) +
              ", shift-rev " + sci(worst_shift)};
}

Outcome qfi() {
  Checks c;
  const CircuitProgram ry{1, {Gate::ry(0, 0)}, 1, 0, false};
  double worst_ry = 0;
  for (double t : {0.0, 0.3, 1.1, 2.5, 4.4}) {
    worst_ry = std::max(worst_ry, std::abs(qfi_matrix(ry, VectorXd::Constant(1, t)).matrix(0, 0) - 1.0));
  }
  c.expect(worst_ry < 1e-10, "RY QFI off by " + sci(worst_ry));

  std::mt19937_64 rng(404);
  double worst_rel = 0, worst_asym = 0, min_eig = 0;
  auto check_instance = [&](const CircuitProgram& program, const VectorXd& values, bool with_oracle) {
    const auto q = qfi_matrix(program, values);
    worst_asym = std::max(worst_asym, max_abs(q.matrix - q.matrix.transpose()));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(q.matrix);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff() / std::max(1.0, max_abs(q.matrix)));
    if (with_oracle) {
      const MatrixXd ref = oracle::qfi_fidelity(program, values, 1e-3);
      worst_rel = std::max(worst_rel, max_abs(q.matrix - ref) / std::max(1.0, max_abs(ref)));
    }
  };
  for (auto variant : kVariants) {
    for (int n = 2; n <= 3; ++n) {
      const auto program = build_layer({variant, n, 2});
      for (int draw = 0; draw < 5; ++draw) {
        check_instance(program, oracle::random_angles(program.n_slots(), rng), true);
      }
    }
    const auto wide = build_layer({variant, 5, 4});
    check_instance(wide, oracle::random_angles(wide.n_slots(), rng), false);
  }
  c.expect(worst_rel < 1e-4, "oracle rel err " + sci(worst_rel));
  c.expect(worst_asym < 1e-9, "asymmetry " + sci(worst_asym));
  c.expect(min_eig > -1e-9, "min eigenvalue " + sci(min_eig));
  return {c.ok(), c.ok() ? "RY err " + sci(worst_ry) + ", oracle rel " + sci(worst_rel) +
                               ", asym " + sci(worst_asym) + ", min eig " + sci(min_eig)
                         : c.failures()};
}

Outcome efficiency() {
  Checks c;
  c.expect(fisher_efficiency(100, 80) == 20.0, "(100, 80) -> 20");
  c.expect(fisher_efficiency(80, 100) == -25.0, "(80, 100) -> -25");
  c.expect(fisher_efficiency(64, 64) == 0.0, "(64, 64) -> 0");
  struct Row {
    double lcu, nolcu, classical;
  };
  double worst = 0;
  for (const Row& r : {Row{61.71, 61.39, 62.10}, Row{62.02, 61.56, 62.10}, Row{62.65, 61.91, 62.10}}) {
    const double expected = (r.lcu - r.nolcu) / r.classical * 100.0;
    worst = std::max(worst, std::abs(fisher_efficiency_perf(r.lcu, r.nolcu, r.classical) - expected));
    const auto report = make_efficiency_report(100, 80, r.lcu, r.nolcu, r.classical);
    c.expect(report.eta_param == 20.0 && report.eta_perf == fisher_efficiency_perf(r.lcu, r.nolcu, r.classical),
             "efficiency report fields");
  }
  c.expect(worst < 1e-12, "perf formula err " + sci(worst));
  return {c.ok(), c.ok() ? "(100,80) -> 20 exact, perf formula err " + sci(worst) : c.failures()};
}

Outcome statistics() {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> size(2, 20);
  std::uniform_real_distribution<double> loc(-5.0, 5.0), scale(0.01, 5.0);
  auto rel = [](double x, const oracle::Big& ref) {
    const double r = static_cast<double>(ref);
    return std::abs(x - r) / std::max(std::abs(r), 1e-300);
  };
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::normal_distribution<double> ga(loc(rng), scale(rng)), gb(loc(rng), scale(rng));
    std::vector<double> a(size(rng)), b(size(rng));
    for (auto& v : a) v = ga(rng);
    for (auto& v : b) v = gb(rng);
    const auto w = welch_t_test(a, b);
    const auto ref = oracle::welch_high_precision(a, b);
    worst = std::max({worst, rel(w.t, ref.t), rel(w.df, ref.df), rel(w.p, ref.p)});
  }
  const double bessel = sample_std(std::vector{1.0, 2.0, 3.0, 4.0});
  const double bessel_err = std::abs(bessel - std::sqrt(5.0 / 3.0));
  const double vr = variance_reduction(0.43, 0.63);
  const bool pass = worst < 1e-9 && bessel_err < 1e-15 && std::abs(vr - 0.317) < 1e-3;
  return {pass, "100 pairs, max rel err " + sci(worst) + ", 1-0.43/0.63 = " + std::to_string(vr)};
}

ExperimentConfig contrast_config(const fs::path& out, int workers) {
  ExperimentConfig c;
  c.dataset.kind = DatasetKind::Shells;
  c.dataset.dim = 8;
  c.dataset.n_train = 1000;
  c.dataset.n_test = 400;
  c.variants = {LayerVariant::LCU, LayerVariant::NoLCU};
  c.classical_baseline = true;
  c.n_blocks = 4;
  c.qubit_scales = {4};
  c.runs_per_config = 5;
  c.train.max_epochs = 150;
  c.train.patience = 20;
  c.output_dir = out;
  c.workers = workers;
  c.save_checkpoints = false;
  return c;
}

Outcome contrast(const fs::path& dir, int workers) {
  fs::remove_all(dir);
  const auto config = contrast_config(dir, workers);
  const auto sweep = run_sweep(config);
  Checks c;
  std::map<std::string, std::vector<double>> acc;
  for (const auto& r : sweep.records) {
    c.expect(r.ok(), r.cell_id + " failed: " + r.error);
    const bool finite = std::isfinite(r.test_metric) && std::isfinite(r.mean_success_prob) &&
                        std::ranges::all_of(r.history, [](const EpochRecord& e) {
                          return std::isfinite(e.train_loss) && std::isfinite(e.val_loss);
                        });
    c.expect(finite, r.cell_id + " has non-finite values");
    c.expect(r.mean_success_prob > 0.0 && r.mean_success_prob <= 1.0,
             r.cell_id + " success_prob " + std::to_string(r.mean_success_prob));
    acc[r.variant].push_back(r.test_metric);
  }
  c.expect(sweep.records.size() == 15, "expected 15 records");
  for (const char* v : {"LCU", "NoLCU"}) {
    for (double a : acc[v]) c.expect(a >= 85.0, std::string(v) + " accuracy " + std::to_string(a));
  }
  const auto summary = summarize(sweep.records);
  emit_reports(summary, sweep.records, dir / "report", config);
  const auto lcu = std::ranges::find(summary.cells, std::string("LCU"), &CellSummary::variant);
  c.expect(lcu != summary.cells.end() && lcu->comparison.has_value(), "LCU comparison missing");
  if (lcu != summary.cells.end() && lcu->comparison) {
    const auto& cmp = *lcu->comparison;
    c.expect(cmp.p_value >= 0.0 && cmp.p_value <= 1.0, "p-value out of range");
    c.expect(!std::isnan(cmp.variance_reduction), "variance reduction NaN");
    c.expect(std::isfinite(lcu->std), "std not finite");
  }
  c.expect(summary.efficiency.size() == 1, "efficiency row missing");
  if (!summary.efficiency.empty()) {
    c.expect(std::isfinite(summary.efficiency[0].report.eta_param) &&
                 std::isfinite(summary.efficiency[0].report.eta_perf),
             "efficiency not finite");
  }
  for (const char* f : {"summary.csv", "efficiency.csv", "report.json"}) {
    c.expect(fs::exists(dir / "report" / f), std::string(f) + " not written");
  }
  c.expect(read_summary(dir / "report" / "report.json") == summary, "report.json round trip");
  if (!c.ok()) return {false, c.failures()};

  std::ostringstream d;
  d.precision(4);
  for (const auto& cell : summary.cells) {
    d << cell.variant << " " << cell.mean << "+-" << cell.std << " ";
  }
  const auto& cmp = *lcu->comparison;
  d << "| p " << cmp.p_value << ", VR " << cmp.variance_reduction << ", eta_param "
    << summary.efficiency[0].report.eta_param << ", eta_perf " << summary.efficiency[0].report.eta_perf;
  return {true, d.str()};
}

ExperimentConfig determinism_config(const fs::path& out) {
  ExperimentConfig c;
  c.dataset.kind = DatasetKind::Shells;
  c.dataset.dim = 6;
  c.dataset.n_train = 200;
  c.dataset.n_test = 80;
  c.variants = {LayerVariant::LCU, LayerVariant::NoLCU, LayerVariant::IqpLayer,
                LayerVariant::IqpEmbedding};
  c.classical_baseline = true;
  c.n_blocks = 2;
  c.qubit_scales = {2, 3};
  c.runs_per_config = 2;
  c.extractor_hidden = {8};
  c.head_hidden = 16;
  c.train.max_epochs = 3;
  c.output_dir = out;
  c.save_checkpoints = false;
  return c;
}

std::vector<std::string> canonical(const std::vector<RunRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) out.push_back(canonical_record(r));
  std::ranges::sort(out);
  return out;
}

Outcome determinism(const fs::path& root, int workers) {
  const auto a = root / "first", b = root / "second", c = root / "interrupted";
  for (const auto& d : {a, b, c}) fs::remove_all(d);
  auto config = determinism_config(a);
  config.workers = workers;
  const auto first = run_sweep(config);
  config.output_dir = b;
  config.workers = 1;
  const auto second = run_sweep(config);

  Checks k;
  const auto reference = canonical(first.records);
  k.expect(reference.size() == 20, "expected 20 records, got " + std::to_string(reference.size()));
  k.expect(std::ranges::all_of(first.records, &RunRecord::ok), "a cell failed");
  k.expect(canonical(second.records) == reference, "repeated sweep differs");
  k.expect(canonical(read_records(a / "records.jsonl")) == reference, "records.jsonl differs from memory");

  config.output_dir = c;
  config.workers = workers;
  const auto part = run_sweep(config, {.max_new_cells = 7});
  k.expect(part.trained == 7, "interrupted sweep trained " + std::to_string(part.trained));
  {
    std::ofstream torn(c / "records.jsonl", std::ios::app);
    torn << R"({"cell_id": "IqpLayer-N3-s1", "status": "o)";
  }
  const auto resumed = run_sweep(config, {.resume = true});
  k.expect(resumed.trained == 13, "resume trained " + std::to_string(resumed.trained));
  k.expect(canonical(resumed.records) == reference, "resumed sweep differs");
  k.expect(canonical(read_records(c / "records.jsonl")) == reference, "resumed records.jsonl differs");
  k.expect(summarize(resumed.records) == summarize(first.records), "summaries differ");
  const auto idle = run_sweep(config, {.resume = true});
  k.expect(idle.trained == 0, "completed sweep retrained cells");
  if (!k.ok()) return {false, k.failures()};
  for (const auto& d : {a, b, c}) fs::remove_all(d);
  return {true, "20 records identical across reruns, worker counts and a torn-write resume"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> body;
};

}  // namespace

std::vector<CriterionResult> run(const Options& options, std::ostream& out) {
  const fs::path work =
      options.work_dir.empty() ? fs::temp_directory_path() / "nuqml_acceptance" : options.work_dir;
  const int workers = options.workers;
  const std::vector<Criterion> criteria{
      {1, "LCU wrapper equals normalize((I+W)psi)", 10, lcu_wrapper},
      {2, "general LCU", 10, general_lcu},
      {3, "structural counts", 1, structural_counts},
      {4, "gradients", 120, gradients},
      {5, "quantum Fisher information", 60, qfi},
      {6, "Fisher efficiency formulas", 1, efficiency},
      {7, "Welch statistics", 10, statistics},
      {8, "shells contrast experiment", 1800, [&] { return contrast(work / "contrast", workers); }},
      {9, "determinism and resume", 300, [&] { return determinism(work / "determinism", workers); }},
  };
  std::vector<CriterionResult> results;
  for (const auto& c : criteria) {
    if (!options.only.empty() && std::ranges::find(options.only, c.id) == options.only.end()) continue;
    CriterionResult r{c.id, c.name, false, "", 0.0, c.budget_s};
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto o = c.body();
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.budget_s) {
      r.pass = false;
      r.detail += " (over time budget)";
    }
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2f s / %.0f s", r.seconds, r.budget_s);
    out << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << " ("
        << timing << ")" << std::endl;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace nuqml::acceptance
