#pragma once

// Desk-scale hybrid network: dense feature extractor -> quantum layer ->
// dense classifier head, trained with Adam and early stopping.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nuqml/circuit.hpp"

namespace nuqml {

enum class Activation { Relu, None };

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::None;

  Index in() const { return weights.cols(); }
  Index out() const { return weights.rows(); }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

enum class LossKind { CrossEntropy, Mse };

std::string_view to_string(LossKind loss);
LossKind loss_kind_from_string(std::string_view name);

/// Architecture of a hybrid model. Without a quantum layer the extractor
/// projects to `feature_width` values that feed the head directly.
struct ModelShape {
  int input_dim = 0;
  std::vector<int> extractor_hidden{32};
  std::optional<QuantumLayerSpec> quantum;
  int feature_width = 4;
  int head_hidden = 128;
  int n_outputs = 2;

  /// Width of the extractor output (quantum inputs, or classical features).
  int extractor_output() const;
  /// Width of the head input (quantum expectations, or classical features).
  int head_input() const;
};

struct HybridModel {
  ModelShape shape;
  std::vector<DenseLayer> extractor;
  CircuitProgram program;  // empty when shape.quantum is unset
  Eigen::VectorXd theta;   // trainable quantum angles
  std::vector<DenseLayer> head;

  bool has_quantum() const { return shape.quantum.has_value(); }
  Index parameter_count() const;
  Index quantum_parameter_count() const { return theta.size(); }
};

/// Xavier-uniform classical weights in +/- sqrt(6 / (n_in + n_out)), zero
/// biases, quantum angles uniform in [0, 2 pi]. Deterministic in `seed`.
HybridModel init_model(const ModelShape& shape, std::uint64_t seed);

/// Flat parameter vector: extractor (W column-major, then b), theta, head.
Eigen::VectorXd pack_parameters(const HybridModel& model);
void unpack_parameters(HybridModel& model, const Eigen::VectorXd& flat);

struct ForwardResult {
  Eigen::MatrixXd outputs;        // n_outputs x batch
  Eigen::VectorXd success_prob;   // per sample; 1 for unitary / classical
  int degenerate_samples = 0;     // post-selection failures replaced by zero expectations
};

/// `features` holds one sample per column.
ForwardResult forward(const HybridModel& model, const Eigen::MatrixXd& features);

/// Like `forward`, with every quantum expectation estimated from `shots`
/// measurement samples.
ForwardResult forward_sampled(const HybridModel& model, const Eigen::MatrixXd& features, int shots,
                              std::uint64_t seed);

/// Quantum-layer inputs (extractor outputs) for each sample column.
Eigen::MatrixXd extract_features(const HybridModel& model, const Eigen::MatrixXd& features);

/// Supervision for one batch: class indices for cross-entropy, target columns for MSE.
struct Targets {
  Eigen::VectorXi labels;
  Eigen::MatrixXd values;
};

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // same layout as pack_parameters
  Eigen::VectorXd success_prob;
  int degenerate_samples = 0;
};

/// Cross-entropy clamps probabilities at 1e-12.
inline constexpr double kProbabilityFloor = 1e-12;

/// Mean-reduced loss and its gradient with respect to every model parameter,
/// the quantum layer differentiated by reverse mode through post-selection.
LossGradient loss_and_grad(const HybridModel& model, const Eigen::MatrixXd& features,
                           const Targets& targets, LossKind loss);

double loss_value(const Eigen::MatrixXd& outputs, const Targets& targets, LossKind loss);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int max_epochs = 30;
  int patience = 5;
  LossKind loss = LossKind::CrossEntropy;
  std::uint64_t seed = 42;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long long step = 0;
};

/// Bias-corrected Adam update without weight decay.
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               const TrainConfig& config);

struct Dataset {
  Eigen::MatrixXd features;  // dim x n
  Eigen::VectorXi labels;    // classification
  Eigen::MatrixXd targets;   // regression, out x n
  int n_classes = 0;         // 0 for regression

  Index size() const { return features.cols(); }
  bool is_classification() const { return n_classes > 0; }
  Dataset subset(const std::vector<Index>& indices) const;
  Targets targets_for(const std::vector<Index>& indices) const;
};

/// Accuracy in percent for classification, mean absolute error otherwise.
double evaluate_metric(const HybridModel& model, const Dataset& data);
double output_metric(const Eigen::MatrixXd& outputs, const Dataset& data);

/// Stops once the monitored metric has failed to improve for `patience`
/// consecutive epochs (at the first non-improving epoch when patience is 0).
class EarlyStopping {
 public:
  EarlyStopping(int patience, bool maximize) : patience_(patience), maximize_(maximize) {}

  /// Records one epoch; returns true when this epoch is the new best.
  bool update(double metric);
  bool should_stop() const { return stale_ > 0 && stale_ >= std::max(patience_, 1); }
  int best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_; }

 private:
  int patience_;
  bool maximize_;
  int epoch_ = -1;
  int best_epoch_ = -1;
  int stale_ = 0;
  double best_ = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;
  double mean_success_prob = 1.0;
  int degenerate_samples = 0;
  std::uint64_t shuffle_seed = 0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  HybridModel model;  // best-validation checkpoint
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_metric = 0.0;
};

TrainResult train(HybridModel model, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& config);

void to_json(nlohmann::json& j, const DenseLayer& layer);
void from_json(const nlohmann::json& j, DenseLayer& layer);
void to_json(nlohmann::json& j, const ModelShape& shape);
void from_json(const nlohmann::json& j, ModelShape& shape);
void to_json(nlohmann::json& j, const HybridModel& model);
void from_json(const nlohmann::json& j, HybridModel& model);
void to_json(nlohmann::json& j, const TrainConfig& config);
void from_json(const nlohmann::json& j, TrainConfig& config);
void to_json(nlohmann::json& j, const EpochRecord& record);
void from_json(const nlohmann::json& j, EpochRecord& record);

/// Versioned JSON container for a trained model.
struct Checkpoint {
  static constexpr int kVersion = 1;
  HybridModel model;
  Eigen::VectorXd theta_init;     // quantum angles at initialization
  Eigen::MatrixXd probe_inputs;   // quantum-layer inputs for a few test samples
  std::uint64_t seed = 0;
  int epoch = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace nuqml
