// Command-line front end: sweeps, statistics over stored records, QFI of
// checkpoints and the acceptance suite.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "acceptance.hpp"
#include "nuqml/errors.hpp"
#include "nuqml/fisher.hpp"
#include "nuqml/harness.hpp"

namespace fs = std::filesystem;
using namespace nuqml;

namespace {

int cmd_run(const fs::path& config_path, bool resume, int workers) {
  ExperimentConfig config = load_config(config_path);
  apply_env_overrides(config);
  if (workers > 0) config.workers = workers;
  const auto sweep = run_sweep(config, {.resume = resume});
  int failed = 0;
  for (const auto& r : sweep.records) failed += !r.ok();
  std::cerr << "trained " << sweep.trained << " cells, " << sweep.records.size() << " records, "
            << failed << " failed\n";
  const auto summary = summarize(sweep.records);
  emit_reports(summary, sweep.records, config.output_dir, config);
  std::cout << summary_csv(summary);
  return failed ? 1 : 0;
}

int cmd_stats(const fs::path& input, const fs::path& out) {
  const fs::path records_path = fs::is_directory(input) ? input / "records.jsonl" : input;
  const auto records = read_records(records_path);
  const auto summary = summarize(records);
  emit_reports(summary, records, out);
  std::cout << summary_csv(summary) << efficiency_csv(summary);
  return 0;
}

int cmd_qfi(const fs::path& checkpoint_path, const std::string& at) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  if (!ck.model.has_quantum()) {
    throw UnsupportedVariant("checkpoint holds a classical model; QFI needs a quantum layer");
  }
  const Eigen::VectorXd& theta = at == "init" ? ck.theta_init : ck.model.theta;
  const auto& program = ck.model.program;
  const Index p = program.n_params;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(p, p);
  nlohmann::json probes = nlohmann::json::array();
  for (Index j = 0; j < ck.probe_inputs.cols(); ++j) {
    const auto q = qfi_matrix(program, program.bind(theta, ck.probe_inputs.col(j)));
    mean += q.matrix;
    probes.push_back({{"probe", j}, {"trace", q.trace}});
  }
  if (ck.probe_inputs.cols() > 0) mean /= static_cast<double>(ck.probe_inputs.cols());
  nlohmann::json matrix = nlohmann::json::array();
  for (Index i = 0; i < p; ++i) {
    matrix.push_back(std::vector<double>(mean.row(i).begin(), mean.row(i).end()));
  }
  const nlohmann::json out{{"checkpoint", checkpoint_path.string()},
                           {"at", at},
                           {"n_params", p},
                           {"probes", probes},
                           {"mean_trace", mean.trace()},
                           {"mean_matrix", matrix}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_verify(const acceptance::Options& options) {
  const auto results = acceptance::run(options, std::cout);
  int passed = 0;
  for (const auto& r : results) passed += r.pass;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nuqml: non-unitary quantum layers for hybrid models"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a sweep and write reports into its output directory");
  fs::path config_path;
  bool resume = false;
  int workers = 0;
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_flag("--resume", resume, "Continue a sweep whose output directory already has records");
  run->add_option("--workers", workers, "Worker threads (overrides config and NUQML_WORKERS)");

  auto* stats = app.add_subcommand("stats", "Summarize records.jsonl into CSV and JSON reports");
  fs::path input, out;
  stats->add_option("--input", input, "Sweep directory or records.jsonl")->required()->check(CLI::ExistingPath);
  stats->add_option("--out", out, "Report directory")->required();

  auto* qfi = app.add_subcommand("qfi", "QFI of a checkpoint's quantum layer over its probe inputs");
  fs::path checkpoint;
  std::string at = "final";
  qfi->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  qfi->add_option("--at", at, "Quantum angles to use")->check(CLI::IsMember({"init", "final"}));

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  acceptance::Options verify_options;
  verify->add_option("--work-dir", verify_options.work_dir, "Directory for sweep outputs");
  verify->add_option("--workers", verify_options.workers, "Worker threads for sweeps");
  verify->add_option("--only", verify_options.only, "Criterion ids to run");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, resume, workers);
    if (*stats) return cmd_stats(input, out);
    if (*qfi) return cmd_qfi(checkpoint, at);
    if (*verify) return cmd_verify(verify_options);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
