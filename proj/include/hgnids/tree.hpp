#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hgnids/features.hpp"

namespace hgnids {

enum class ModelKind { RandomForest, GradientBoosted };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct TreeParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  std::size_t min_leaf = 1;
  double learning_rate = 0.1;      // GB only
  std::size_t feature_subsample = 0;  // RF only; 0 means round(sqrt(d))
  double l2 = 1.0;                 // GB leaf regularisation
  std::uint64_t seed = 0;

  static TreeParams random_forest(std::uint64_t seed = 0) { return {100, 12, 1, 0.1, 0, 1.0, seed}; }
  static TreeParams gradient_boosted(std::uint64_t seed = 0) {
    return {200, 6, 20, 0.1, 0, 1.0, seed};
  }
  static TreeParams defaults(ModelKind kind, std::uint64_t seed = 0) {
    return kind == ModelKind::RandomForest ? random_forest(seed) : gradient_boosted(seed);
  }
  bool operator==(const TreeParams&) const = default;
};

/// Rows with x[feature] <= threshold go left. Leaves have feature == -1.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double leaf_value(std::span<const double> x) const;
  bool operator==(const DecisionTree&) const = default;
};

/// RF: mean leaf class fraction. GB: logistic of the summed leaf scores.
class TreeModel {
 public:
  TreeModel() = default;
  TreeModel(ModelKind kind, FeatureMode mode, std::size_t width, TreeParams params,
            std::vector<DecisionTree> trees);

  ModelKind kind() const { return kind_; }
  FeatureMode mode() const { return mode_; }
  std::size_t width() const { return width_; }
  const TreeParams& params() const { return params_; }
  std::span<const DecisionTree> trees() const { return trees_; }

  double predict_proba(std::span<const double> x) const;
  double predict_proba(const FeatureVector& row) const;

  /// Self-describing text; doubles are written as hex floats so the
  /// round trip is bit-exact.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static TreeModel load(std::istream& in);
  static TreeModel load(const std::filesystem::path& path);
  std::string serialize() const;

  bool operator==(const TreeModel&) const = default;

 private:
  ModelKind kind_ = ModelKind::RandomForest;
  FeatureMode mode_ = FeatureMode::NRF;
  std::size_t width_ = 0;
  TreeParams params_;
  std::vector<DecisionTree> trees_;
};

/// Needs at least two rows of one feature mode and both labels.
TreeModel train(std::span<const FeatureVector> rows, ModelKind kind, const TreeParams& params);

struct EvalReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fnp = 0.0;

  /// Derived metrics with 0 for any zero denominator.
  static EvalReport from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
  std::size_t total() const { return tp + fp + tn + fn; }
  /// Recomputes the metrics from the counts and compares within tol.
  bool consistent(double tol = 1e-12) const;
  EvalReport& operator+=(const EvalReport& other);
  bool operator==(const EvalReport&) const = default;
};

EvalReport evaluate_labels(std::span<const BinaryLabel> truth, std::span<const BinaryLabel> predicted);

/// ATTACK iff predict_proba >= threshold.
EvalReport evaluate(const TreeModel& model, std::span<const FeatureVector> rows,
                    double threshold = 0.5);

}  // namespace hgnids
