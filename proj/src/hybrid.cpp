#include "nuqml/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "nuqml/errors.hpp"
#include "nuqml/grad.hpp"

namespace nuqml {

std::string_view to_string(LossKind loss) {
  return loss == LossKind::CrossEntropy ? "cross_entropy" : "mse";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "cross_entropy") return LossKind::CrossEntropy;
  if (name == "mse") return LossKind::Mse;
  throw ConfigError("unknown loss kind: " + std::string(name));
}

int ModelShape::extractor_output() const {
  return quantum ? quantum->n_inputs() : feature_width;
}

int ModelShape::head_input() const { return quantum ? quantum->n_qubits : feature_width; }

Index HybridModel::parameter_count() const {
  Index total = theta.size();
  for (const auto* layers : {&extractor, &head}) {
    for (const auto& l : *layers) total += l.weights.size() + l.bias.size();
  }
  return total;
}

namespace {

DenseLayer xavier_layer(int in, int out, Activation act, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out), act};
  for (Index k = 0; k < layer.weights.size(); ++k) layer.weights.data()[k] = dist(rng);
  return layer;
}

void check_shape(const ModelShape& shape) {
  if (shape.input_dim < 1 || shape.n_outputs < 1) {
    throw ConfigError("model needs positive input and output widths");
  }
  if (!shape.quantum && shape.feature_width < 1) {
    throw ConfigError("classical feature width must be positive");
  }
  for (int h : shape.extractor_hidden) {
    if (h < 1) throw ConfigError("hidden widths must be positive");
  }
}

Eigen::MatrixXd apply_layer(const DenseLayer& layer, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = (layer.weights * x).colwise() + layer.bias;
  if (layer.activation == Activation::Relu) z = z.cwiseMax(0.0);
  return z;
}

// Activations a_0 = x, a_1, ..., a_L of a layer stack.
std::vector<Eigen::MatrixXd> run_stack(const std::vector<DenseLayer>& layers,
                                       const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> acts{x};
  acts.reserve(layers.size() + 1);
  for (const auto& l : layers) acts.push_back(apply_layer(l, acts.back()));
  return acts;
}

// Accumulates parameter gradients into `grads` and returns d loss / d a_0.
Eigen::MatrixXd backprop_stack(const std::vector<DenseLayer>& layers,
                               const std::vector<Eigen::MatrixXd>& acts, Eigen::MatrixXd upstream,
                               std::vector<DenseLayer>& grads) {
  for (std::size_t k = layers.size(); k-- > 0;) {
    if (layers[k].activation == Activation::Relu) {
      upstream = upstream.cwiseProduct((acts[k + 1].array() > 0.0).cast<double>().matrix());
    }
    grads[k].weights = upstream * acts[k].transpose();
    grads[k].bias = upstream.rowwise().sum();
    upstream = layers[k].weights.transpose() * upstream;
  }
  return upstream;
}

struct QuantumPass {
  Eigen::MatrixXd expectations;
  Eigen::VectorXd success_prob;
  std::vector<bool> degenerate;
  int n_degenerate = 0;
};

// shots == 0 evaluates exact expectations.
QuantumPass run_quantum(const HybridModel& model, const Eigen::MatrixXd& inputs, int shots = 0,
                        std::uint64_t seed = 0) {
  const Index batch = inputs.cols();
  std::mt19937_64 rng(seed);
  QuantumPass pass{Eigen::MatrixXd::Zero(model.shape.quantum->n_qubits, batch),
                   Eigen::VectorXd::Ones(batch), std::vector<bool>(batch, false), 0};
  for (Index j = 0; j < batch; ++j) {
    try {
      const auto values = model.program.bind(model.theta, inputs.col(j));
      const auto out = shots > 0 ? sample_expectations(model.program, values, shots, rng)
                                 : evaluate(model.program, values);
      pass.expectations.col(j) = out.expectations;
      pass.success_prob[j] = out.success_prob;
    } catch (const DegeneratePostselection& e) {
      pass.success_prob[j] = e.success_prob();
      pass.degenerate[j] = true;
      ++pass.n_degenerate;
    }
  }
  return pass;
}

struct Trace {
  std::vector<Eigen::MatrixXd> extractor;
  QuantumPass quantum;
  std::vector<Eigen::MatrixXd> head;
};

Trace trace_forward(const HybridModel& model, const Eigen::MatrixXd& features, int shots = 0,
                    std::uint64_t seed = 0) {
  if (features.rows() != model.shape.input_dim) {
    throw ParameterError("feature dimension " + std::to_string(features.rows()) +
                         " does not match model input " + std::to_string(model.shape.input_dim));
  }
  Trace t;
  t.extractor = run_stack(model.extractor, features);
  const Eigen::MatrixXd* head_in = &t.extractor.back();
  if (model.has_quantum()) {
    t.quantum = run_quantum(model, t.extractor.back(), shots, seed);
    head_in = &t.quantum.expectations;
  } else {
    t.quantum.success_prob = Eigen::VectorXd::Ones(features.cols());
  }
  t.head = run_stack(model.head, *head_in);
  return t;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

void check_targets(const Eigen::MatrixXd& outputs, const Targets& targets, LossKind loss) {
  if (loss == LossKind::CrossEntropy) {
    if (targets.labels.size() != outputs.cols()) throw ParameterError("label count mismatch");
    for (int y : targets.labels) {
      if (y < 0 || y >= outputs.rows()) throw ParameterError("label out of range");
    }
  } else if (targets.values.rows() != outputs.rows() || targets.values.cols() != outputs.cols()) {
    throw ParameterError("regression target shape mismatch");
  }
}

// Loss and d loss / d outputs.
std::pair<double, Eigen::MatrixXd> loss_with_gradient(const Eigen::MatrixXd& outputs,
                                                      const Targets& targets, LossKind loss) {
  check_targets(outputs, targets, loss);
  const Index batch = outputs.cols();
  if (batch == 0) throw ParameterError("empty batch");
  Eigen::MatrixXd d(outputs.rows(), batch);
  double total = 0.0;
  if (loss == LossKind::CrossEntropy) {
    for (Index j = 0; j < batch; ++j) {
      const Eigen::VectorXd p = softmax(outputs.col(j));
      const int y = targets.labels[j];
      total -= std::log(std::max(p[y], kProbabilityFloor));
      if (p[y] > kProbabilityFloor) {
        d.col(j) = p;
        d(y, j) -= 1.0;
      } else {
        d.col(j).setZero();
      }
    }
    return {total / batch, d / batch};
  }
  const Eigen::MatrixXd diff = outputs - targets.values;
  const double n = static_cast<double>(diff.size());
  return {diff.squaredNorm() / n, 2.0 * diff / n};
}

HybridModel zero_like(const HybridModel& model) {
  HybridModel g = model;
  for (auto* layers : {&g.extractor, &g.head}) {
    for (auto& l : *layers) {
      l.weights.setZero();
      l.bias.setZero();
    }
  }
  g.theta.setZero();
  return g;
}

template <class Model, class Visit>
void visit_blocks(Model& model, Visit&& visit) {
  for (auto& l : model.extractor) {
    visit(l.weights.data(), l.weights.size());
    visit(l.bias.data(), l.bias.size());
  }
  visit(model.theta.data(), model.theta.size());
  for (auto& l : model.head) {
    visit(l.weights.data(), l.weights.size());
    visit(l.bias.data(), l.bias.size());
  }
}

Eigen::MatrixXd json_to_matrix(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const Index r = static_cast<Index>(rows.size());
  const Index c = r ? static_cast<Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i) {
    if (static_cast<Index>(rows[i].size()) != c) throw FormatError("ragged matrix");
    for (Index k = 0; k < c; ++k) m(i, k) = rows[i][k];
  }
  return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto j = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    j.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return j;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd json_to_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

HybridModel init_model(const ModelShape& shape, std::uint64_t seed) {
  check_shape(shape);
  std::mt19937_64 rng(seed);
  HybridModel model;
  model.shape = shape;

  int width = shape.input_dim;
  for (int h : shape.extractor_hidden) {
    model.extractor.push_back(xavier_layer(width, h, Activation::Relu, rng));
    width = h;
  }
  model.extractor.push_back(xavier_layer(width, shape.extractor_output(), Activation::None, rng));

  if (shape.quantum) {
    model.program = build_layer(*shape.quantum);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    model.theta.resize(model.program.n_params);
    for (auto& t : model.theta) t = angle(rng);
  } else {
    model.theta.resize(0);
  }

  width = shape.head_input();
  if (shape.head_hidden > 0) {
    model.head.push_back(xavier_layer(width, shape.head_hidden, Activation::Relu, rng));
    width = shape.head_hidden;
  }
  model.head.push_back(xavier_layer(width, shape.n_outputs, Activation::None, rng));
  return model;
}

Eigen::VectorXd pack_parameters(const HybridModel& model) {
  Eigen::VectorXd flat(model.parameter_count());
  Index at = 0;
  visit_blocks(model, [&](const double* p, Index n) {
    flat.segment(at, n) = Eigen::Map<const Eigen::VectorXd>(p, n);
    at += n;
  });
  return flat;
}

void unpack_parameters(HybridModel& model, const Eigen::VectorXd& flat) {
  if (flat.size() != model.parameter_count()) {
    throw ParameterError("flat parameter vector has " + std::to_string(flat.size()) +
                         " entries, model has " + std::to_string(model.parameter_count()));
  }
  Index at = 0;
  visit_blocks(model, [&](double* p, Index n) {
    Eigen::Map<Eigen::VectorXd>(p, n) = flat.segment(at, n);
    at += n;
  });
}

ForwardResult forward(const HybridModel& model, const Eigen::MatrixXd& features) {
  Trace t = trace_forward(model, features);
  return {std::move(t.head.back()), std::move(t.quantum.success_prob), t.quantum.n_degenerate};
}

ForwardResult forward_sampled(const HybridModel& model, const Eigen::MatrixXd& features, int shots,
                              std::uint64_t seed) {
  if (shots < 1) throw ParameterError("shot count must be positive");
  Trace t = trace_forward(model, features, shots, seed);
  return {std::move(t.head.back()), std::move(t.quantum.success_prob), t.quantum.n_degenerate};
}

Eigen::MatrixXd extract_features(const HybridModel& model, const Eigen::MatrixXd& features) {
  if (features.rows() != model.shape.input_dim) throw ParameterError("feature dimension mismatch");
  return run_stack(model.extractor, features).back();
}

double loss_value(const Eigen::MatrixXd& outputs, const Targets& targets, LossKind loss) {
  return loss_with_gradient(outputs, targets, loss).first;
}

LossGradient loss_and_grad(const HybridModel& model, const Eigen::MatrixXd& features,
                           const Targets& targets, LossKind loss) {
  const Trace t = trace_forward(model, features);
  auto [value, d_out] = loss_with_gradient(t.head.back(), targets, loss);
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-finite loss " << value << " on a batch of " << features.cols() << " ("
        << t.quantum.n_degenerate << " degenerate post-selections, output range ["
        << t.head.back().minCoeff() << ", " << t.head.back().maxCoeff() << "])";
    throw NumericalError(msg.str());
  }

  HybridModel g = zero_like(model);
  Eigen::MatrixXd d_features = backprop_stack(model.head, t.head, std::move(d_out), g.head);
  if (model.has_quantum()) {
    const Eigen::MatrixXd& q_in = t.extractor.back();
    Eigen::MatrixXd d_q_in = Eigen::MatrixXd::Zero(q_in.rows(), q_in.cols());
    const int n_params = model.program.n_params;
    for (Index j = 0; j < q_in.cols(); ++j) {
      if (t.quantum.degenerate[j]) continue;
      const auto vjp = vector_jacobian_product(
          model.program, model.program.bind(model.theta, q_in.col(j)), d_features.col(j));
      g.theta += vjp.slot_gradient.head(n_params);
      d_q_in.col(j) = vjp.slot_gradient.tail(q_in.rows());
    }
    d_features = std::move(d_q_in);
  }
  backprop_stack(model.extractor, t.extractor, std::move(d_features), g.extractor);

  LossGradient out{value, pack_parameters(g), t.quantum.success_prob, t.quantum.n_degenerate};
  if (!out.gradient.allFinite()) throw NumericalError("non-finite gradient");
  return out;
}

void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               const TrainConfig& config) {
  if (grads.size() != params.size()) throw ParameterError("gradient size mismatch");
  if (state.step == 0) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
  } else if (state.m.size() != params.size()) {
    throw ParameterError("optimizer state size mismatch");
  }
  ++state.step;
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * grads;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  params.array() -= config.learning_rate * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + config.epsilon);
}

Dataset Dataset::subset(const std::vector<Index>& indices) const {
  Dataset out;
  out.n_classes = n_classes;
  out.features.resize(features.rows(), static_cast<Index>(indices.size()));
  if (is_classification()) out.labels.resize(out.features.cols());
  if (targets.size()) out.targets.resize(targets.rows(), out.features.cols());
  for (Index k = 0; k < out.features.cols(); ++k) {
    const Index i = indices[k];
    out.features.col(k) = features.col(i);
    if (is_classification()) out.labels[k] = labels[i];
    if (targets.size()) out.targets.col(k) = targets.col(i);
  }
  return out;
}

Targets Dataset::targets_for(const std::vector<Index>& indices) const {
  Targets t;
  if (is_classification()) {
    t.labels.resize(static_cast<Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) t.labels[k] = labels[indices[k]];
  } else {
    t.values.resize(targets.rows(), static_cast<Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) t.values.col(k) = targets.col(indices[k]);
  }
  return t;
}

namespace {

Targets all_targets(const Dataset& data) {
  return data.is_classification() ? Targets{data.labels, {}} : Targets{{}, data.targets};
}

}  // namespace

double output_metric(const Eigen::MatrixXd& outputs, const Dataset& data) {
  if (data.is_classification()) {
    Index correct = 0;
    for (Index j = 0; j < outputs.cols(); ++j) {
      Index best = 0;
      outputs.col(j).maxCoeff(&best);
      correct += best == data.labels[j];
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(outputs.cols());
  }
  return (outputs - data.targets).cwiseAbs().mean();
}

double evaluate_metric(const HybridModel& model, const Dataset& data) {
  if (data.size() == 0) throw ConfigError("cannot evaluate on an empty dataset");
  return output_metric(forward(model, data.features).outputs, data);
}

bool EarlyStopping::update(double metric) {
  ++epoch_;
  const bool improved =
      best_epoch_ < 0 || (maximize_ ? metric > best_ : metric < best_);
  if (improved) {
    best_ = metric;
    best_epoch_ = epoch_;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return improved;
}

TrainResult train(HybridModel model, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& config) {
  if (train_set.size() == 0 || val_set.size() == 0) throw ConfigError("empty train or validation set");
  if (config.batch_size < 1 || config.max_epochs < 1 || config.patience < 0) {
    throw ConfigError("batch_size and max_epochs must be positive, patience non-negative");
  }
  const bool classify = config.loss == LossKind::CrossEntropy;
  if (classify != train_set.is_classification()) {
    throw ConfigError("loss kind does not match the dataset task");
  }

  std::mt19937_64 stream(config.seed);
  AdamState adam;
  Eigen::VectorXd params = pack_parameters(model);
  EarlyStopping stopper(config.patience, classify);
  TrainResult result{model, {}, 0, 0.0};

  std::vector<Index> order(static_cast<std::size_t>(train_set.size()));
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.shuffle_seed = stream();
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 shuffle_rng(rec.shuffle_seed);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0, success_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::vector<Index> idx(order.begin() + start,
                                   order.begin() + std::min(order.size(), start + config.batch_size));
      Eigen::MatrixXd x(train_set.features.rows(), static_cast<Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) x.col(k) = train_set.features.col(idx[k]);
      const auto lg = loss_and_grad(model, x, train_set.targets_for(idx), config.loss);
      loss_sum += lg.loss * static_cast<double>(idx.size());
      success_sum += lg.success_prob.sum();
      rec.degenerate_samples += lg.degenerate_samples;
      adam_step(adam, params, lg.gradient, config);
      unpack_parameters(model, params);
    }
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.mean_success_prob = success_sum / static_cast<double>(order.size());

    const auto val = forward(model, val_set.features);
    rec.val_loss = loss_value(val.outputs, all_targets(val_set), config.loss);
    rec.val_metric = output_metric(val.outputs, val_set);
    if (!std::isfinite(rec.val_loss)) throw NumericalError("non-finite validation loss");
    result.history.push_back(rec);

    if (stopper.update(classify ? rec.val_metric : rec.val_loss)) {
      result.model = model;
      result.best_epoch = epoch;
      result.best_metric = rec.val_metric;
    }
    if (stopper.should_stop()) break;
  }
  return result;
}

void to_json(nlohmann::json& j, const DenseLayer& layer) {
  j = nlohmann::json{{"weights", matrix_to_json(layer.weights)},
                     {"bias", vector_to_json(layer.bias)},
                     {"activation", layer.activation == Activation::Relu ? "relu" : "none"}};
}

void from_json(const nlohmann::json& j, DenseLayer& layer) {
  layer.weights = json_to_matrix(j.at("weights"));
  layer.bias = json_to_vector(j.at("bias"));
  const auto act = j.at("activation").get<std::string>();
  if (act != "relu" && act != "none") throw FormatError("unknown activation: " + act);
  layer.activation = act == "relu" ? Activation::Relu : Activation::None;
  if (layer.bias.size() != layer.weights.rows()) throw FormatError("bias/weights shape mismatch");
}

void to_json(nlohmann::json& j, const ModelShape& shape) {
  j = nlohmann::json{{"input_dim", shape.input_dim},
                     {"extractor_hidden", shape.extractor_hidden},
                     {"quantum", nullptr},
                     {"feature_width", shape.feature_width},
                     {"head_hidden", shape.head_hidden},
                     {"n_outputs", shape.n_outputs}};
  if (shape.quantum) j["quantum"] = *shape.quantum;
}

void from_json(const nlohmann::json& j, ModelShape& shape) {
  shape.input_dim = j.at("input_dim").get<int>();
  shape.extractor_hidden = j.at("extractor_hidden").get<std::vector<int>>();
  shape.quantum.reset();
  if (!j.at("quantum").is_null()) shape.quantum = j.at("quantum").get<QuantumLayerSpec>();
  shape.feature_width = j.at("feature_width").get<int>();
  shape.head_hidden = j.at("head_hidden").get<int>();
  shape.n_outputs = j.at("n_outputs").get<int>();
}

void to_json(nlohmann::json& j, const HybridModel& model) {
  j = nlohmann::json{{"shape", model.shape},
                     {"extractor", model.extractor},
                     {"theta", vector_to_json(model.theta)},
                     {"head", model.head}};
}

void from_json(const nlohmann::json& j, HybridModel& model) {
  model.shape = j.at("shape").get<ModelShape>();
  model.extractor = j.at("extractor").get<std::vector<DenseLayer>>();
  model.theta = json_to_vector(j.at("theta"));
  model.head = j.at("head").get<std::vector<DenseLayer>>();
  model.program = model.shape.quantum ? build_layer(*model.shape.quantum) : CircuitProgram{};
  if (model.theta.size() != model.program.n_params) {
    throw FormatError("quantum parameter count does not match the layer spec");
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate}, {"beta1", c.beta1},
                     {"beta2", c.beta2},                 {"epsilon", c.epsilon},
                     {"batch_size", c.batch_size},       {"max_epochs", c.max_epochs},
                     {"patience", c.patience},           {"loss", to_string(c.loss)},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  const TrainConfig d;
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.epsilon = j.value("epsilon", d.epsilon);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.max_epochs = j.value("max_epochs", d.max_epochs);
  c.patience = j.value("patience", d.patience);
  c.loss = loss_kind_from_string(j.value("loss", std::string(to_string(d.loss))));
  c.seed = j.value("seed", d.seed);
}

void to_json(nlohmann::json& j, const EpochRecord& r) {
  j = nlohmann::json{{"epoch", r.epoch},
                     {"train_loss", r.train_loss},
                     {"val_loss", r.val_loss},
                     {"val_metric", r.val_metric},
                     {"mean_success_prob", r.mean_success_prob},
                     {"degenerate_samples", r.degenerate_samples},
                     {"shuffle_seed", r.shuffle_seed}};
}

void from_json(const nlohmann::json& j, EpochRecord& r) {
  r.epoch = j.at("epoch").get<int>();
  r.train_loss = j.at("train_loss").get<double>();
  r.val_loss = j.at("val_loss").get<double>();
  r.val_metric = j.at("val_metric").get<double>();
  r.mean_success_prob = j.at("mean_success_prob").get<double>();
  r.degenerate_samples = j.at("degenerate_samples").get<int>();
  r.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const nlohmann::json j{{"format", "nuqml-checkpoint"},
                         {"version", Checkpoint::kVersion},
                         {"seed", ckpt.seed},
                         {"epoch", ckpt.epoch},
                         {"model", ckpt.model},
                         {"theta_init", vector_to_json(ckpt.theta_init)},
                         {"probe_inputs", matrix_to_json(ckpt.probe_inputs)}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "nuqml-checkpoint") throw FormatError("not a checkpoint file");
  if (j.at("version").get<int>() != Checkpoint::kVersion) {
    throw FormatError("unsupported checkpoint version " + j.at("version").dump());
  }
  Checkpoint c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.epoch = j.at("epoch").get<int>();
  c.model = j.at("model").get<HybridModel>();
  c.theta_init = json_to_vector(j.at("theta_init"));
  c.probe_inputs = json_to_matrix(j.at("probe_inputs"));
  return c;
}

}  // namespace nuqml
