#include "nuqml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <cstdio>
#include <iterator>
#include <numeric>
#include <tuple>
#include <random>

#include "nuqml/errors.hpp"

namespace nuqml {

IdxArray parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("IDX: file shorter than its magic number");
  const std::uint32_t magic =
      (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
      (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
  if (magic != 0x00000801 && magic != 0x00000803) {
    char hex[11];
    std::snprintf(hex, sizeof hex, "0x%08x", magic);
    throw FormatError(std::string("IDX: unsupported magic number ") + hex);
  }
  const std::size_t rank = bytes[3];
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header) throw FormatError("IDX: truncated dimension header");

  IdxArray out;
  std::size_t count = 1;
  for (std::size_t d = 0; d < rank; ++d) {
    const auto* p = bytes.data() + 4 + 4 * d;
    const std::uint32_t dim = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
                              (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
    out.dims.push_back(dim);
    count *= dim;
  }
  if (bytes.size() - header < count) {
    throw FormatError("IDX: payload has " + std::to_string(bytes.size() - header) +
                      " bytes, dims declare " + std::to_string(count));
  }
  out.data.assign(bytes.begin() + header, bytes.begin() + header + count);
  return out;
}

IdxArray read_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return parse_idx(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Dataset idx_dataset(const IdxArray& images, const IdxArray& labels, Index limit) {
  if (images.dims.size() != 3) throw FormatError("IDX images must be 3-dimensional");
  if (labels.dims.size() != 1) throw FormatError("IDX labels must be 1-dimensional");
  if (images.dims[0] != labels.dims[0]) {
    throw FormatError("IDX: " + std::to_string(images.dims[0]) + " images but " +
                      std::to_string(labels.dims[0]) + " labels");
  }
  Index n = images.dims[0];
  if (limit > 0) n = std::min(n, limit);
  const Index width = Index{images.dims[1]} * images.dims[2];

  Dataset d;
  d.features.resize(width, n);
  d.labels.resize(n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < width; ++i) d.features(i, j) = images.data[j * width + i] / 255.0;
    d.labels[j] = labels.data[j];
  }
  d.n_classes = n ? d.labels.maxCoeff() + 1 : 0;
  return d;
}

Dataset synthetic_blobs(int classes, int dim, int n, std::uint64_t seed, double spread) {
  if (classes < 2 || dim < 1 || n < 1) throw ConfigError("blobs need >= 2 classes, dim >= 1, n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(-5.0, 5.0);
  std::normal_distribution<double> noise(0.0, spread);
  const Eigen::MatrixXd centers = Eigen::MatrixXd::NullaryExpr(dim, classes, [&] { return center(rng); });
  Dataset d;
  d.n_classes = classes;
  d.features.resize(dim, n);
  d.labels.resize(n);
  for (int j = 0; j < n; ++j) {
    d.labels[j] = j % classes;
    for (int i = 0; i < dim; ++i) d.features(i, j) = centers(i, j % classes) + noise(rng);
  }
  return d;
}

Dataset synthetic_shells(int dim, int n, std::uint64_t seed, double noise) {
  if (dim < 2 || n < 1) throw ConfigError("shells need dim >= 2 and n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset d;
  d.n_classes = 2;
  d.features.resize(dim, n);
  d.labels.resize(n);
  for (int j = 0; j < n; ++j) {
    const int y = j % 2;
    Eigen::VectorXd dir = Eigen::VectorXd::NullaryExpr(dim, [&] { return gauss(rng); });
    dir.normalize();
    d.features.col(j) = (1.0 + y + noise * gauss(rng)) * dir;
    d.labels[j] = y;
  }
  return d;
}

Dataset synthetic_regression(int dim, int n, std::uint64_t seed, double noise) {
  if (dim < 1 || n < 1) throw ConfigError("regression needs dim >= 1 and n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(dim, [&] { return gauss(rng); }) / std::sqrt(dim);
  const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(dim, [&] { return gauss(rng); }) / std::sqrt(dim);
  Dataset d;
  d.features.resize(dim, n);
  d.targets.resize(1, n);
  for (int j = 0; j < n; ++j) {
    d.features.col(j) = Eigen::VectorXd::NullaryExpr(dim, [&] { return gauss(rng); });
    const auto x = d.features.col(j);
    d.targets(0, j) = std::sin(w.dot(x)) + 0.5 * std::cos(v.dot(x)) + noise * gauss(rng);
  }
  return d;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Dataset read_csv(const std::filesystem::path& path, const std::string& label_column,
                 bool classification) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty CSV");
  const auto header = split_fields(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw FormatError(path.string() + ": no column named '" + label_column + "'");
  }
  const std::size_t label_at = label_it - header.begin();
  const std::size_t width = header.size() - 1;

  std::vector<double> features, labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw FormatError(path.string() + ":" + std::to_string(row) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    for (std::size_t k = 0; k < fields.size(); ++k) {
      double value = 0;
      const auto f = fields[k];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(value)) {
        throw FormatError(path.string() + ":" + std::to_string(row) + ": bad number '" +
                          std::string(f) + "'");
      }
      (k == label_at ? labels : features).push_back(value);
    }
  }
  const Index n = static_cast<Index>(labels.size());
  if (n == 0) throw FormatError(path.string() + ": no data rows");

  Dataset d;
  d.features = Eigen::Map<const Eigen::MatrixXd>(features.data(), static_cast<Index>(width), n);
  if (classification) {
    d.labels.resize(n);
    for (Index j = 0; j < n; ++j) {
      if (labels[j] < 0 || labels[j] != std::floor(labels[j])) {
        throw FormatError(path.string() + ": class labels must be non-negative integers");
      }
      d.labels[j] = static_cast<int>(labels[j]);
    }
    d.n_classes = d.labels.maxCoeff() + 1;
  } else {
    d.targets = Eigen::Map<const Eigen::RowVectorXd>(labels.data(), n);
  }
  return d;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.features.rows() != b.features.rows() || a.is_classification() != b.is_classification()) {
    throw ConfigError("cannot concatenate datasets of different shape or task");
  }
  Dataset d;
  d.n_classes = std::max(a.n_classes, b.n_classes);
  d.features.resize(a.features.rows(), a.size() + b.size());
  d.features << a.features, b.features;
  if (d.is_classification()) {
    d.labels.resize(a.size() + b.size());
    d.labels << a.labels, b.labels;
  } else {
    d.targets.resize(a.targets.rows(), a.size() + b.size());
    d.targets << a.targets, b.targets;
  }
  return d;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Index>> groups(data.is_classification() ? data.n_classes : 1);
  for (Index j = 0; j < data.size(); ++j) {
    groups[data.is_classification() ? data.labels[j] : 0].push_back(j);
  }
  std::vector<Index> keep, held;
  for (auto& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    const auto n_held = static_cast<std::size_t>(std::llround(fraction * g.size()));
    held.insert(held.end(), g.begin(), g.begin() + n_held);
    keep.insert(keep.end(), g.begin() + n_held, g.end());
  }
  std::sort(keep.begin(), keep.end());
  std::sort(held.begin(), held.end());
  return {data.subset(keep), data.subset(held)};
}

void minmax_normalize(Dataset& fit, std::vector<Dataset*> others) {
  if (fit.size() == 0) throw ConfigError("cannot normalize an empty dataset");
  const Eigen::VectorXd lo = fit.features.rowwise().minCoeff();
  const Eigen::VectorXd range = fit.features.rowwise().maxCoeff() - lo;
  const Eigen::VectorXd scale = range.unaryExpr([](double r) { return r > 0 ? 1.0 / r : 0.0; });
  auto apply = [&](Dataset& d) {
    d.features = ((d.features.colwise() - lo).array().colwise() * scale.array()).min(1.0).max(0.0);
  };
  apply(fit);
  for (auto* d : others) apply(*d);
}

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Blobs: return "synthetic_blobs";
    case DatasetKind::Shells: return "synthetic_shells";
    case DatasetKind::Regression: return "synthetic_regression";
    case DatasetKind::MnistSubset: return "mnist_subset";
    case DatasetKind::Csv: return "csv";
  }
  return "?";
}

DatasetKind dataset_kind_from_string(std::string_view name) {
  for (auto k : {DatasetKind::Blobs, DatasetKind::Shells, DatasetKind::Regression,
                 DatasetKind::MnistSubset, DatasetKind::Csv}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown dataset kind: " + std::string(name));
}

DataSplits load_dataset(const DatasetSpec& spec) {
  Dataset train_all, test;
  switch (spec.kind) {
    case DatasetKind::Blobs:
    case DatasetKind::Shells:
    case DatasetKind::Regression: {
      const int n = spec.n_train + spec.n_test;
      Dataset all = spec.kind == DatasetKind::Blobs
                        ? synthetic_blobs(spec.classes, spec.dim, n, spec.seed, spec.noise)
                    : spec.kind == DatasetKind::Shells
                        ? synthetic_shells(spec.dim, n, spec.seed, spec.noise)
                        : synthetic_regression(spec.dim, n, spec.seed, spec.noise);
      std::vector<Index> head(spec.n_train), tail(spec.n_test);
      std::iota(head.begin(), head.end(), Index{0});
      std::iota(tail.begin(), tail.end(), Index{spec.n_train});
      train_all = all.subset(head);
      test = all.subset(tail);
      break;
    }
    case DatasetKind::MnistSubset:
      train_all = idx_dataset(read_idx(spec.train_images), read_idx(spec.train_labels), spec.n_train);
      test = idx_dataset(read_idx(spec.test_images), read_idx(spec.test_labels), spec.n_test);
      train_all.n_classes = test.n_classes = std::max(train_all.n_classes, test.n_classes);
      break;
    case DatasetKind::Csv:
      train_all = read_csv(spec.csv_train, spec.label_column, spec.classification());
      if (spec.csv_test.empty()) {
        std::tie(train_all, test) = split(train_all, spec.test_fraction, spec.seed ^ 0x7e57);
      } else {
        test = read_csv(spec.csv_test, spec.label_column, spec.classification());
        train_all.n_classes = test.n_classes = std::max(train_all.n_classes, test.n_classes);
      }
      break;
  }
  auto [train, val] = split(train_all, spec.val_fraction, spec.seed);
  if (train.size() == 0 || val.size() == 0 || test.size() == 0) {
    throw ConfigError("dataset split left an empty train, validation or test set");
  }
  minmax_normalize(train, {&val, &test});
  return {std::move(train), std::move(val), std::move(test)};
}

void to_json(nlohmann::json& j, const DatasetSpec& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)},
                     {"dim", s.dim},
                     {"classes", s.classes},
                     {"n_train", s.n_train},
                     {"n_test", s.n_test},
                     {"noise", s.noise},
                     {"seed", s.seed},
                     {"val_fraction", s.val_fraction},
                     {"train_images", s.train_images.string()},
                     {"train_labels", s.train_labels.string()},
                     {"test_images", s.test_images.string()},
                     {"test_labels", s.test_labels.string()},
                     {"csv_train", s.csv_train.string()},
                     {"csv_test", s.csv_test.string()},
                     {"label_column", s.label_column},
                     {"test_fraction", s.test_fraction}};
}

void from_json(const nlohmann::json& j, DatasetSpec& s) {
  const DatasetSpec d;
  s.kind = dataset_kind_from_string(j.value("kind", std::string(to_string(d.kind))));
  s.dim = j.value("dim", d.dim);
  s.classes = j.value("classes", d.classes);
  s.n_train = j.value("n_train", s.kind == DatasetKind::MnistSubset ? 2000 : d.n_train);
  s.n_test = j.value("n_test", s.kind == DatasetKind::MnistSubset ? 500 : d.n_test);
  s.noise = j.value("noise", s.kind == DatasetKind::Blobs ? 1.0 : d.noise);
  s.seed = j.value("seed", d.seed);
  s.val_fraction = j.value("val_fraction", d.val_fraction);
  s.train_images = j.value("train_images", std::string());
  s.train_labels = j.value("train_labels", std::string());
  s.test_images = j.value("test_images", std::string());
  s.test_labels = j.value("test_labels", std::string());
  s.csv_train = j.value("csv_train", std::string());
  s.csv_test = j.value("csv_test", std::string());
  s.label_column = j.value("label_column", d.label_column);
  s.test_fraction = j.value("test_fraction", d.test_fraction);
}

}  // namespace nuqml
