#include "nuqml/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "nuqml/errors.hpp"
#include "nuqml/stats.hpp"

namespace nuqml {

namespace fs = std::filesystem;

std::vector<std::string> ExperimentConfig::variant_labels() const {
  std::vector<std::string> out;
  for (auto v : variants) out.emplace_back(to_string(v));
  if (classical_baseline) out.emplace_back(kClassicalVariant);
  return out;
}

void ExperimentConfig::validate() const {
  if (variants.empty() && !classical_baseline) throw ConfigError("no variants to run");
  if (runs_per_config < 2) throw ConfigError("runs_per_config must be >= 2");
  if (n_blocks < 1) throw ConfigError("n_blocks must be >= 1");
  if (qubit_scales.empty()) throw ConfigError("qubit_scales is empty");
  for (int q : qubit_scales) {
    if (q < 2 || q > kMaxQubits - 1) {
      throw ConfigError("qubit scale " + std::to_string(q) + " outside [2, " +
                        std::to_string(kMaxQubits - 1) + "]");
    }
  }
  if (workers < 0 || probe_samples < 0 || shots < 0) {
    throw ConfigError("workers, probe_samples and shots must be non-negative");
  }
  if (head_hidden < 0) throw ConfigError("head_hidden must be non-negative");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  std::vector<std::string> variants;
  for (auto v : c.variants) variants.emplace_back(to_string(v));
  j = nlohmann::json{{"dataset", c.dataset},
                     {"variants", variants},
                     {"classical_baseline", c.classical_baseline},
                     {"n_blocks", c.n_blocks},
                     {"qubit_scales", c.qubit_scales},
                     {"runs_per_config", c.runs_per_config},
                     {"base_seed", c.base_seed},
                     {"extractor_hidden", c.extractor_hidden},
                     {"head_hidden", c.head_hidden},
                     {"train", c.train},
                     {"output_dir", c.output_dir.string()},
                     {"workers", c.workers},
                     {"probe_samples", c.probe_samples},
                     {"save_checkpoints", c.save_checkpoints},
                     {"shots", c.shots}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  const ExperimentConfig d;
  c.dataset = j.value("dataset", nlohmann::json::object()).get<DatasetSpec>();
  c.variants.clear();
  if (j.contains("variants")) {
    for (const auto& name : j.at("variants")) {
      c.variants.push_back(layer_variant_from_string(name.get<std::string>()));
    }
  } else {
    c.variants = d.variants;
  }
  c.classical_baseline = j.value("classical_baseline", d.classical_baseline);
  c.n_blocks = j.value("n_blocks", d.n_blocks);
  c.qubit_scales = j.value("qubit_scales", d.qubit_scales);
  c.runs_per_config = j.value("runs_per_config", d.runs_per_config);
  c.base_seed = j.value("base_seed", d.base_seed);
  c.extractor_hidden = j.value("extractor_hidden", d.extractor_hidden);
  c.head_hidden = j.value("head_hidden", d.head_hidden);
  c.train = j.value("train", nlohmann::json::object()).get<TrainConfig>();
  if (!j.contains("train") || !j.at("train").contains("loss")) {
    c.train.loss = c.dataset.classification() ? LossKind::CrossEntropy : LossKind::Mse;
  }
  c.output_dir = j.value("output_dir", d.output_dir.string());
  c.workers = j.value("workers", d.workers);
  c.probe_samples = j.value("probe_samples", d.probe_samples);
  c.save_checkpoints = j.value("save_checkpoints", d.save_checkpoints);
  c.shots = j.value("shots", d.shots);
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  try {
    ExperimentConfig c = nlohmann::json::parse(in).get<ExperimentConfig>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_env_overrides(ExperimentConfig& config) {
  if (const char* dir = std::getenv("NUQML_OUTPUT_DIR"); dir && *dir) config.output_dir = dir;
  if (const char* w = std::getenv("NUQML_WORKERS"); w && *w) {
    int value = 0;
    const std::string_view s(w);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || value < 0) {
      throw ConfigError("NUQML_WORKERS must be a non-negative integer, got '" + std::string(s) + "'");
    }
    config.workers = value;
  }
}

std::string cell_id(std::string_view variant, int qubits, std::uint64_t seed) {
  return std::string(variant) + "-N" + std::to_string(qubits) + "-s" + std::to_string(seed);
}

void to_json(nlohmann::json& j, const RunRecord& r) {
  j = nlohmann::json{{"cell_id", r.cell_id},
                     {"config_id", r.config_id},
                     {"seed", r.seed},
                     {"variant", r.variant},
                     {"qubits", r.qubits},
                     {"status", r.status},
                     {"error", r.error},
                     {"test_metric", r.test_metric},
                     {"best_val_metric", r.best_val_metric},
                     {"epochs_trained", r.epochs_trained},
                     {"best_epoch", r.best_epoch},
                     {"mean_success_prob", r.mean_success_prob},
                     {"degenerate_samples", r.degenerate_samples},
                     {"n_params", r.n_params},
                     {"n_quantum_params", r.n_quantum_params},
                     {"wall_time_s", r.wall_time_s},
                     {"history", r.history}};
}

void from_json(const nlohmann::json& j, RunRecord& r) {
  r.cell_id = j.at("cell_id").get<std::string>();
  r.config_id = j.at("config_id").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.variant = j.at("variant").get<std::string>();
  r.qubits = j.at("qubits").get<int>();
  r.status = j.at("status").get<std::string>();
  r.error = j.at("error").get<std::string>();
  r.test_metric = j.at("test_metric").get<double>();
  r.best_val_metric = j.at("best_val_metric").get<double>();
  r.epochs_trained = j.at("epochs_trained").get<int>();
  r.best_epoch = j.at("best_epoch").get<int>();
  r.mean_success_prob = j.at("mean_success_prob").get<double>();
  r.degenerate_samples = j.at("degenerate_samples").get<int>();
  r.n_params = j.at("n_params").get<long long>();
  r.n_quantum_params = j.at("n_quantum_params").get<long long>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  r.history = j.at("history").get<std::vector<EpochRecord>>();
}

std::string canonical_record(const RunRecord& record) {
  nlohmann::json j = record;
  j.erase("wall_time_s");
  return j.dump();
}

std::vector<RunRecord> read_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  std::vector<RunRecord> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    RunRecord r;
    try {
      r = nlohmann::json::parse(lines[k]).get<RunRecord>();
    } catch (const nlohmann::json::exception& e) {
      if (k + 1 == lines.size()) break;
      throw FormatError(path.string() + ":" + std::to_string(k + 1) + ": " + e.what());
    }
    if (auto it = index.find(r.cell_id); it != index.end()) {
      out[it->second] = std::move(r);
    } else {
      index.emplace(r.cell_id, out.size());
      out.push_back(std::move(r));
    }
  }
  return out;
}

RunRecord run_cell(const ExperimentConfig& config, const DataSplits& data,
                   const std::string& variant, int qubits, std::uint64_t seed) {
  RunRecord rec;
  rec.cell_id = cell_id(variant, qubits, seed);
  rec.config_id = variant + "-N" + std::to_string(qubits);
  rec.seed = seed;
  rec.variant = variant;
  rec.qubits = qubits;
  const auto start = std::chrono::steady_clock::now();
  try {
    ModelShape shape;
    shape.input_dim = static_cast<int>(data.train.features.rows());
    shape.extractor_hidden = config.extractor_hidden;
    shape.head_hidden = config.head_hidden;
    shape.n_outputs = data.train.is_classification() ? data.train.n_classes
                                                     : static_cast<int>(data.train.targets.rows());
    if (variant == kClassicalVariant) {
      shape.feature_width = qubits;
    } else {
      shape.quantum = QuantumLayerSpec{layer_variant_from_string(variant), qubits, config.n_blocks};
    }
    const HybridModel initial = init_model(shape, seed);
    TrainConfig tc = config.train;
    tc.seed = seed;
    const auto result = train(initial, data.train, data.val, tc);

    const auto out = config.shots > 0 && result.model.has_quantum()
                         ? forward_sampled(result.model, data.test.features, config.shots, seed)
                         : forward(result.model, data.test.features);
    rec.test_metric = output_metric(out.outputs, data.test);
    if (!std::isfinite(rec.test_metric)) throw NumericalError("non-finite test metric");
    rec.best_val_metric = result.best_metric;
    rec.epochs_trained = static_cast<int>(result.history.size());
    rec.best_epoch = result.best_epoch;
    rec.mean_success_prob = out.success_prob.mean();
    rec.degenerate_samples = out.degenerate_samples;
    for (const auto& e : result.history) rec.degenerate_samples += e.degenerate_samples;
    rec.n_params = result.model.parameter_count();
    rec.n_quantum_params = result.model.quantum_parameter_count();
    rec.history = result.history;

    if (config.save_checkpoints) {
      const Index probes = std::min<Index>(config.probe_samples, data.test.size());
      Checkpoint ck{result.model, initial.theta,
                    extract_features(result.model, data.test.features.leftCols(probes)), seed,
                    result.best_epoch};
      fs::create_directories(config.output_dir / "checkpoints");
      save_checkpoint(config.output_dir / "checkpoints" / (rec.cell_id + ".json"), ck);
    }
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.error = e.what();
  }
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

namespace {

struct Cell {
  std::string variant;
  int qubits;
  std::uint64_t seed;
  std::string id;
};

std::vector<Cell> sweep_cells(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  for (int q : config.qubit_scales) {
    for (const auto& v : config.variant_labels()) {
      for (int r = 0; r < config.runs_per_config; ++r) {
        const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(r);
        cells.push_back({v, q, seed, cell_id(v, q, seed)});
      }
    }
  }
  return cells;
}

// Fields that do not change what a sweep computes.
ExperimentConfig comparable(ExperimentConfig c) {
  c.output_dir.clear();
  c.workers = 0;
  return c;
}

// Drops a torn final line so new records start on a fresh line.
void repair_tail(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  if (content.empty() || content.back() == '\n') return;
  const auto keep = content.find_last_of('\n');
  fs::resize_file(path, keep == std::string::npos ? 0 : keep + 1);
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
  config.validate();
  const fs::path& out = config.output_dir;
  const fs::path records_path = out / "records.jsonl";
  const fs::path config_path = out / "config.json";
  try {
    fs::create_directories(out);
  } catch (const fs::filesystem_error& e) {
    throw IoError("cannot create output directory " + out.string() + ": " + e.what());
  }

  std::vector<RunRecord> existing;
  if (fs::exists(records_path)) existing = read_records(records_path);
  if (!existing.empty() && !options.resume) {
    throw ConfigError(out.string() + " already holds run records; resume the sweep or pick another output_dir");
  }
  if (options.resume && fs::exists(config_path)) {
    if (comparable(load_config(config_path)) != comparable(config)) {
      throw ConfigError("config differs from the one recorded in " + config_path.string());
    }
  }
  {
    std::ofstream cfg(config_path);
    if (!cfg) throw IoError("cannot write " + config_path.string());
    cfg << nlohmann::json(config).dump(2) << '\n';
  }
  if (fs::exists(records_path)) repair_tail(records_path);

  std::map<std::string, RunRecord> done;
  for (auto& r : existing) done.emplace(r.cell_id, std::move(r));

  const auto cells = sweep_cells(config);
  std::vector<const Cell*> pending;
  for (const auto& c : cells) {
    const auto it = done.find(c.id);
    if (it == done.end() || !it->second.ok()) pending.push_back(&c);
  }
  if (options.max_new_cells >= 0 && static_cast<int>(pending.size()) > options.max_new_cells) {
    pending.resize(options.max_new_cells);
  }

  SweepResult result;
  if (!pending.empty()) {
    const DataSplits data = load_dataset(config.dataset);
    std::ofstream sink(records_path, std::ios::app);
    if (!sink) throw IoError("cannot append to " + records_path.string());

    std::mutex writer;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k; (k = next++) < pending.size();) {
        const Cell& c = *pending[k];
        RunRecord rec = run_cell(config, data, c.variant, c.qubits, c.seed);
        const std::lock_guard lock(writer);
        sink << nlohmann::json(rec).dump() << '\n';
        sink.flush();
        done[rec.cell_id] = std::move(rec);
      }
    };
    int n_workers = options.workers > 0 ? options.workers : config.workers;
    if (n_workers <= 0) n_workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    n_workers = std::min<int>(n_workers, static_cast<int>(pending.size()));
    {
      std::vector<std::jthread> pool;
      for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
      worker();
    }
    if (!sink) throw IoError("failed writing " + records_path.string());
    result.trained = static_cast<int>(pending.size());
  }

  for (const auto& c : cells) {
    if (auto it = done.find(c.id); it != done.end()) result.records.push_back(it->second);
  }
  return result;
}

std::string counterpart_of(std::string_view variant) {
  if (variant == to_string(LayerVariant::LCU)) return std::string(to_string(LayerVariant::NoLCU));
  if (variant == to_string(LayerVariant::IqpLayer) ||
      variant == to_string(LayerVariant::IqpEmbedding)) {
    return std::string(kClassicalVariant);
  }
  return {};
}

namespace {

int variant_rank(std::string_view v) {
  constexpr std::string_view order[] = {"LCU", "NoLCU", "IqpLayer", "IqpEmbedding", "Classical"};
  for (int k = 0; k < 5; ++k) {
    if (order[k] == v) return k;
  }
  return 5;
}

}  // namespace

StatsSummary summarize(const std::vector<RunRecord>& records) {
  std::map<std::pair<int, std::string>, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    auto& g = groups[{r.qubits, r.variant}];
    if (r.ok()) g.push_back(&r);
  }
  std::vector<std::pair<int, std::string>> keys;
  for (const auto& [k, g] : groups) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : variant_rank(a.second) < variant_rank(b.second);
  });

  std::map<std::pair<int, std::string>, std::vector<double>> metrics;
  StatsSummary s;
  for (const auto& key : keys) {
    const auto& g = groups.at(key);
    if (g.size() < 2) {
      throw InsufficientSamples("cell " + key.second + "-N" + std::to_string(key.first) + " has " +
                                std::to_string(g.size()) + " completed run(s), need >= 2");
    }
    auto& xs = metrics[key];
    double success = 0.0;
    for (const auto* r : g) {
      xs.push_back(r->test_metric);
      success += r->mean_success_prob;
    }
    CellSummary c;
    c.variant = key.second;
    c.qubits = key.first;
    c.n_runs = static_cast<int>(g.size());
    c.mean = mean(xs);
    c.std = sample_std(xs);
    c.mean_success_prob = success / static_cast<double>(g.size());
    c.n_params = g.front()->n_params;
    c.n_quantum_params = g.front()->n_quantum_params;
    s.cells.push_back(c);
  }

  auto find = [&](int q, std::string_view v) -> const CellSummary* {
    for (const auto& c : s.cells) {
      if (c.qubits == q && c.variant == v) return &c;
    }
    return nullptr;
  };
  for (auto& c : s.cells) {
    const std::string other = counterpart_of(c.variant);
    const CellSummary* base = other.empty() ? nullptr : find(c.qubits, other);
    if (!base) continue;
    const auto w = welch_t_test(metrics.at({c.qubits, c.variant}), metrics.at({c.qubits, other}));
    Comparison cmp{other, c.mean - base->mean, w.t, w.df, w.p, 0.0};
    cmp.variance_reduction = base->std > 0.0 ? variance_reduction(c.std, base->std)
                             : c.std == 0.0  ? 0.0
                                             : -std::numeric_limits<double>::infinity();
    c.comparison = cmp;
  }
  for (const auto& c : s.cells) {
    if (c.variant != to_string(LayerVariant::LCU)) continue;
    const auto* nolcu = find(c.qubits, to_string(LayerVariant::NoLCU));
    const auto* classical = find(c.qubits, kClassicalVariant);
    if (!nolcu || !classical || classical->mean == 0.0 || classical->n_params == 0) continue;
    s.efficiency.push_back({c.qubits, make_efficiency_report(classical->n_params, c.n_params, c.mean,
                                                             nolcu->mean, classical->mean)});
  }
  return s;
}

namespace {

// JSON has no infinities; they are stored as strings.
nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

double number_from(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw FormatError("expected a number, got '" + s + "'");
}

std::string fmt(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void to_json(nlohmann::json& j, const Comparison& c) {
  j = nlohmann::json{{"counterpart", c.counterpart},     {"improvement", c.improvement},
                     {"welch_t", number(c.welch_t)},      {"welch_df", c.welch_df},
                     {"p_value", c.p_value},              {"variance_reduction", number(c.variance_reduction)}};
}

void from_json(const nlohmann::json& j, Comparison& c) {
  c.counterpart = j.at("counterpart").get<std::string>();
  c.improvement = j.at("improvement").get<double>();
  c.welch_t = number_from(j.at("welch_t"));
  c.welch_df = j.at("welch_df").get<double>();
  c.p_value = j.at("p_value").get<double>();
  c.variance_reduction = number_from(j.at("variance_reduction"));
}

void to_json(nlohmann::json& j, const CellSummary& c) {
  j = nlohmann::json{{"variant", c.variant},
                     {"qubits", c.qubits},
                     {"n_runs", c.n_runs},
                     {"mean", c.mean},
                     {"std", c.std},
                     {"mean_success_prob", c.mean_success_prob},
                     {"n_params", c.n_params},
                     {"n_quantum_params", c.n_quantum_params},
                     {"comparison", nullptr}};
  if (c.comparison) j["comparison"] = *c.comparison;
}

void from_json(const nlohmann::json& j, CellSummary& c) {
  c.variant = j.at("variant").get<std::string>();
  c.qubits = j.at("qubits").get<int>();
  c.n_runs = j.at("n_runs").get<int>();
  c.mean = j.at("mean").get<double>();
  c.std = j.at("std").get<double>();
  c.mean_success_prob = j.at("mean_success_prob").get<double>();
  c.n_params = j.at("n_params").get<long long>();
  c.n_quantum_params = j.at("n_quantum_params").get<long long>();
  c.comparison.reset();
  if (!j.at("comparison").is_null()) c.comparison = j.at("comparison").get<Comparison>();
}

void to_json(nlohmann::json& j, const EfficiencyRow& r) {
  j = nlohmann::json{{"qubits", r.qubits}, {"report", r.report}};
}

void from_json(const nlohmann::json& j, EfficiencyRow& r) {
  r.qubits = j.at("qubits").get<int>();
  r.report = j.at("report").get<EfficiencyReport>();
}

void to_json(nlohmann::json& j, const StatsSummary& s) {
  j = nlohmann::json{{"cells", s.cells}, {"efficiency", s.efficiency}};
}

void from_json(const nlohmann::json& j, StatsSummary& s) {
  s.cells = j.at("cells").get<std::vector<CellSummary>>();
  s.efficiency = j.at("efficiency").get<std::vector<EfficiencyRow>>();
}

std::string summary_csv(const StatsSummary& summary) {
  std::ostringstream out;
  out << "variant,qubits,n_runs,mean,std,mean_success_prob,n_params,n_quantum_params,"
         "counterpart,improvement,welch_t,welch_df,p_value,variance_reduction\n";
  for (const auto& c : summary.cells) {
    out << c.variant << ',' << c.qubits << ',' << c.n_runs << ',' << fmt(c.mean) << ','
        << fmt(c.std) << ',' << fmt(c.mean_success_prob) << ',' << c.n_params << ','
        << c.n_quantum_params << ',';
    if (c.comparison) {
      const auto& k = *c.comparison;
      out << k.counterpart << ',' << fmt(k.improvement) << ',' << fmt(k.welch_t) << ','
          << fmt(k.welch_df) << ',' << fmt(k.p_value) << ',' << fmt(k.variance_reduction);
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string efficiency_csv(const StatsSummary& summary) {
  std::ostringstream out;
  out << "qubits,n_classical,n_quantum,acc_lcu,acc_nolcu,acc_classical,eta_param,eta_perf\n";
  for (const auto& row : summary.efficiency) {
    const auto& r = row.report;
    out << row.qubits << ',' << r.n_classical << ',' << r.n_quantum << ',' << fmt(r.acc_lcu) << ','
        << fmt(r.acc_nolcu) << ',' << fmt(r.acc_classical) << ',' << fmt(r.eta_param) << ','
        << fmt(r.eta_perf) << '\n';
  }
  return out.str();
}

void emit_reports(const StatsSummary& summary, const std::vector<RunRecord>& records,
                  const fs::path& out_dir, const std::optional<ExperimentConfig>& config) {
  if (summary.cells.empty()) throw ConfigError("nothing to report: summary is empty");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "summary.csv", summary_csv(summary));
  write_file(out_dir / "efficiency.csv", efficiency_csv(summary));
  nlohmann::json report{{"version", kVersion}, {"summary", summary}, {"records", records}};
  if (config) report["config"] = *config;
  write_file(out_dir / "report.json", report.dump(1) + "\n");
}

StatsSummary read_summary(const fs::path& report_json) {
  std::ifstream in(report_json);
  if (!in) throw IoError("cannot read " + report_json.string());
  try {
    return nlohmann::json::parse(in).at("summary").get<StatsSummary>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(report_json.string() + ": " + e.what());
  }
}

}  // namespace nuqml
