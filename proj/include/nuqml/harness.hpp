#pragma once

// Sweep orchestration over (variant, qubit count, seed) cells, per-run
// records, cross-run statistics and report files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nuqml/dataset.hpp"
#include "nuqml/fisher.hpp"
#include "nuqml/hybrid.hpp"

namespace nuqml {

inline constexpr std::string_view kClassicalVariant = "Classical";
inline constexpr std::string_view kVersion = "1.0.0";

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<LayerVariant> variants{LayerVariant::LCU, LayerVariant::NoLCU};
  bool classical_baseline = true;
  int n_blocks = 4;
  std::vector<int> qubit_scales{4};
  int runs_per_config = 10;
  std::uint64_t base_seed = 0;
  std::vector<int> extractor_hidden{32};
  int head_hidden = 128;
  TrainConfig train;
  std::filesystem::path output_dir = "results";
  int workers = 0;          // 0 = hardware concurrency
  int probe_samples = 4;    // test samples whose quantum inputs go into checkpoints
  bool save_checkpoints = true;
  int shots = 0;            // > 0 evaluates the test metric from finite-shot estimates

  /// Variant labels in sweep order, the classical baseline last.
  std::vector<std::string> variant_labels() const;
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

void to_json(nlohmann::json& j, const ExperimentConfig& config);
void from_json(const nlohmann::json& j, ExperimentConfig& config);

ExperimentConfig load_config(const std::filesystem::path& path);

/// NUQML_OUTPUT_DIR and NUQML_WORKERS, when set, replace the config values.
void apply_env_overrides(ExperimentConfig& config);

struct RunRecord {
  std::string cell_id;    // "<variant>-N<q>-s<seed>"
  std::string config_id;  // "<variant>-N<q>"
  std::uint64_t seed = 0;
  std::string variant;
  int qubits = 0;
  std::string status = "ok";  // ok | error
  std::string error;
  double test_metric = 0.0;   // accuracy % or MAE
  double best_val_metric = 0.0;
  int epochs_trained = 0;
  int best_epoch = 0;
  double mean_success_prob = 1.0;  // over the test set; 1 for unitary and classical models
  int degenerate_samples = 0;
  long long n_params = 0;
  long long n_quantum_params = 0;
  double wall_time_s = 0.0;
  std::vector<EpochRecord> history;

  bool ok() const { return status == "ok"; }
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

void to_json(nlohmann::json& j, const RunRecord& record);
void from_json(const nlohmann::json& j, RunRecord& record);

/// Record JSON with the wall-time field removed, for determinism comparisons.
std::string canonical_record(const RunRecord& record);

std::string cell_id(std::string_view variant, int qubits, std::uint64_t seed);

/// Parses records.jsonl. The last record for a cell id wins; a torn final
/// line (interrupted write) is ignored, any other malformed line is a FormatError.
std::vector<RunRecord> read_records(const std::filesystem::path& path);

struct SweepOptions {
  bool resume = false;
  int max_new_cells = -1;  // stop after this many trainings (< 0: no limit)
  int workers = 0;         // overrides config.workers when > 0
};

struct SweepResult {
  std::vector<RunRecord> records;  // every cell known after this call, in sweep order
  int trained = 0;                 // cells trained by this call
};

/// Trains every pending cell and appends each record to
/// output_dir/records.jsonl as soon as it finishes. Without `resume`, an
/// output directory that already holds records is a ConfigError.
SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& options = {});

/// Trains and evaluates a single cell on pre-loaded data.
RunRecord run_cell(const ExperimentConfig& config, const DataSplits& data,
                   const std::string& variant, int qubits, std::uint64_t seed);

struct Comparison {
  std::string counterpart;
  double improvement = 0.0;  // mean - counterpart mean
  double welch_t = 0.0;
  double welch_df = 0.0;
  double p_value = 1.0;
  double variance_reduction = 0.0;  // 1 - std / counterpart std

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct CellSummary {
  std::string variant;
  int qubits = 0;
  int n_runs = 0;
  double mean = 0.0;
  double std = 0.0;
  double mean_success_prob = 1.0;
  long long n_params = 0;
  long long n_quantum_params = 0;
  std::optional<Comparison> comparison;  // absent when the counterpart cell is missing

  friend bool operator==(const CellSummary&, const CellSummary&) = default;
};

struct EfficiencyRow {
  int qubits = 0;
  EfficiencyReport report;
  friend bool operator==(const EfficiencyRow&, const EfficiencyRow&) = default;
};

struct StatsSummary {
  std::vector<CellSummary> cells;
  std::vector<EfficiencyRow> efficiency;
  friend bool operator==(const StatsSummary&, const StatsSummary&) = default;
};

/// Counterpart used for the comparison columns: LCU vs NoLCU, IQP variants vs
/// the classical baseline. Empty when the variant has none.
std::string counterpart_of(std::string_view variant);

/// Aggregates successful runs per (variant, qubits). Throws InsufficientSamples
/// naming the first cell with fewer than two completed runs.
StatsSummary summarize(const std::vector<RunRecord>& records);

void to_json(nlohmann::json& j, const Comparison& c);
void from_json(const nlohmann::json& j, Comparison& c);
void to_json(nlohmann::json& j, const CellSummary& c);
void from_json(const nlohmann::json& j, CellSummary& c);
void to_json(nlohmann::json& j, const EfficiencyRow& r);
void from_json(const nlohmann::json& j, EfficiencyRow& r);
void to_json(nlohmann::json& j, const StatsSummary& s);
void from_json(const nlohmann::json& j, StatsSummary& s);

/// CSV of the cell table, one row per cell.
std::string summary_csv(const StatsSummary& summary);
std::string efficiency_csv(const StatsSummary& summary);

/// Writes summary.csv, efficiency.csv and report.json (summary plus every run
/// record and the config, when given) into `out_dir`.
void emit_reports(const StatsSummary& summary, const std::vector<RunRecord>& records,
                  const std::filesystem::path& out_dir,
                  const std::optional<ExperimentConfig>& config = std::nullopt);

/// Parses the "summary" member of a report.json document.
StatsSummary read_summary(const std::filesystem::path& report_json);

}  // namespace nuqml
