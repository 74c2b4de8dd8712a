#pragma once

// Dataset ingestion: IDX files, CSV, and seeded synthetic generators.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nuqml/hybrid.hpp"

namespace nuqml {

/// Unsigned-byte IDX array (MNIST distribution format).
struct IdxArray {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

/// Accepts magic 0x00000801 (labels) and 0x00000803 (images). Any other
/// magic, or a payload shorter than the declared dims, is a FormatError.
IdxArray parse_idx(std::span<const std::uint8_t> bytes);
IdxArray read_idx(const std::filesystem::path& path);

/// Images flattened to columns and scaled by 1/255. At most `limit` samples
/// are kept (0 keeps all).
Dataset idx_dataset(const IdxArray& images, const IdxArray& labels, Index limit = 0);

/// Gaussian clusters around seeded centers; class j % classes, so counts are
/// balanced to within one.
Dataset synthetic_blobs(int classes, int dim, int n, std::uint64_t seed, double spread = 1.0);

/// Two concentric noisy spherical shells (radius 1 and 2) in `dim` dimensions.
Dataset synthetic_shells(int dim, int n, std::uint64_t seed, double noise = 0.1);

/// y = sin(w . x) + 0.5 cos(v . x) + noise, one target row.
Dataset synthetic_regression(int dim, int n, std::uint64_t seed, double noise = 0.05);

/// Header row required. `label_column` names the class column (classification)
/// or target column (regression); every other column is a feature.
Dataset read_csv(const std::filesystem::path& path, const std::string& label_column,
                 bool classification);

/// Concatenates the samples of `a` and `b` (same feature width and task).
Dataset concat(const Dataset& a, const Dataset& b);

/// Stratified for classification. Returns (larger part, `fraction` part).
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed);

/// Min-max scales every feature row of `fit` into [0, 1] and applies the same
/// map to `others`, clamping to [0, 1]. Constant features map to 0.
void minmax_normalize(Dataset& fit, std::vector<Dataset*> others);

enum class DatasetKind { Blobs, Shells, Regression, MnistSubset, Csv };

std::string_view to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::Shells;
  int dim = 8;
  int classes = 2;
  int n_train = 1000;
  int n_test = 400;
  double noise = 0.1;
  std::uint64_t seed = 7;
  double val_fraction = 0.2;
  // mnist_subset
  std::filesystem::path train_images, train_labels, test_images, test_labels;
  // csv: train file, optional test file (otherwise split off by test_fraction)
  std::filesystem::path csv_train, csv_test;
  std::string label_column = "label";
  double test_fraction = 0.2;

  bool classification() const { return kind != DatasetKind::Regression; }
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct DataSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Normalized train / validation / test sets. Deterministic in spec.seed.
DataSplits load_dataset(const DatasetSpec& spec);

void to_json(nlohmann::json& j, const DatasetSpec& spec);
void from_json(const nlohmann::json& j, DatasetSpec& spec);

}  // namespace nuqml
