#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "revdetect/feature_matrix.hpp"

namespace revdetect {

/// Per-column z-score parameters. Constant columns keep mean 0 / std 1 so
/// they pass through unscaled.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> constant;

  void apply(std::span<const double> in, std::span<double> out) const;
  FeatureMatrix apply(const FeatureMatrix& m) const;
};

/// Population mean/std per column; warns about zero-variance columns.
Standardizer fit_standardizer(const FeatureMatrix& train);

struct LogisticOptions {
  double l2 = 1.0;         // penalty l2/(2n) * |w|^2 on the mean log-loss
  int epochs = 1000;
  double step = 0.1;       // halved whenever an update would increase the loss
  int patience = 50;       // validation early-stopping window
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0;
  double l2 = 1.0;
  int epochs_run = 0;
  double final_loss = 0;
  std::vector<double> loss_history;  // training objective per accepted epoch
  std::uint64_t seed = 0;

  double decision(std::span<const double> x) const;
  double probability(std::span<const double> x) const;
};

/// Full-batch gradient descent on standardized features. When `val` is given
/// the parameters with the lowest validation log-loss are kept.
LogisticModel train_logistic(const FeatureMatrix& train, const LogisticOptions& opts,
                             const FeatureMatrix* val = nullptr);

double sigmoid(double z);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;     // x[feature] <= threshold
  int right = -1;
  double prob1 = 0;  // leaves: fraction of class 1
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double probability(std::span<const double> x) const;
  int depth() const;
};

enum class MaxFeatures { Sqrt, Log2, All };

struct ForestOptions {
  int n_trees = 100;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  int threads = 1;  // trees are seeded independently: results do not depend on this
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  double probability(std::span<const double> x) const;
};

/// Bagged CART trees (Gini) grown to purity.
ForestModel train_forest(const FeatureMatrix& train, const ForestOptions& opts);

std::size_t max_features_count(MaxFeatures rule, std::size_t n_cols);

enum class ModelType { Logistic, Forest };

/// A trained detector bound to its feature schema. Logistic models carry the
/// standardizer fitted on their training rows; forests consume raw features.
struct Model {
  std::vector<std::string> schema;
  std::optional<Standardizer> standardizer;
  std::variant<LogisticModel, ForestModel> params;
  std::uint64_t seed = 0;
  nlohmann::json provenance = nlohmann::json::object();

  ModelType type() const;
  /// Class-1 probability for a raw (unstandardized) row in schema order.
  double probability(std::span<const double> raw) const;
};

Model fit_logistic_model(const FeatureMatrix& train, const LogisticOptions& opts,
                         const FeatureMatrix* val = nullptr);
Model fit_forest_model(const FeatureMatrix& train, const ForestOptions& opts);

struct Predictions {
  std::vector<double> probability;
  std::vector<int> label;  // probability >= 0.5
};

/// Throws when the matrix schema differs from the model's (names and order).
Predictions predict(const Model& model, const FeatureMatrix& rows);
void check_schema(const std::vector<std::string>& expected, const std::vector<std::string>& actual);

/// Positive class is 1 (generated).
struct EvalReport {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;

  std::size_t total() const { return tp + fp + tn + fn; }
};

EvalReport evaluate(std::span<const int> predicted, std::span<const int> truth);
nlohmann::json to_json(const EvalReport& r);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const Model& m);
Model model_from_json(const nlohmann::json& j);
void save_model(const Model& m, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace revdetect
