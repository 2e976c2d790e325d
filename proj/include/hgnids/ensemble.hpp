#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hgnids/features.hpp"
#include "hgnids/tree.hpp"

namespace hgnids {

inline constexpr std::size_t kSlots = 3;

struct SlotSpec {
  FeatureMode role;
  ModelKind kind;
  bool operator==(const SlotSpec&) const = default;
};

using SlotLayout = std::array<SlotSpec, kSlots>;

/// NRF -> random forest, HGI and HGA -> gradient boosting.
inline constexpr SlotLayout kStandardLayout = {{{FeatureMode::NRF, ModelKind::RandomForest},
                                                {FeatureMode::HGI, ModelKind::GradientBoosted},
                                                {FeatureMode::HGA, ModelKind::GradientBoosted}}};

/// Three identical raw-feature forests.
inline constexpr SlotLayout kBaselineLayout = {{{FeatureMode::NRF, ModelKind::RandomForest},
                                                {FeatureMode::NRF, ModelKind::RandomForest},
                                                {FeatureMode::NRF, ModelKind::RandomForest}}};

enum class UpdateRule { Static, FTW, UALL };

std::string_view to_string(UpdateRule rule);
UpdateRule parse_update_rule(std::string_view text);

struct EnsembleParams {
  TreeParams rf = TreeParams::random_forest();
  TreeParams gb = TreeParams::gradient_boosted();

  TreeParams for_kind(ModelKind kind, std::uint64_t seed) const {
    TreeParams p = kind == ModelKind::RandomForest ? rf : gb;
    p.seed = seed;
    return p;
  }
};

struct Member {
  SlotSpec spec;
  TreeModel model;
  unsigned version = 1;
  std::optional<EvalReport> last_eval;
};

struct Verdict {
  BinaryLabel label = BinaryLabel::Normal;
  std::array<double, kSlots> scores{};
};

struct EnsembleEvaluation {
  EvalReport ensemble;
  std::array<EvalReport, kSlots> members;
};

class EnsembleState {
 public:
  EnsembleState() = default;
  explicit EnsembleState(std::array<Member, kSlots> members);

  /// Trains every slot on the same records; slot i uses derive_seed(seed, i).
  static EnsembleState train(std::span<const FlowRecord> records, const EncodingContext& ctx,
                             const SlotLayout& layout, const EnsembleParams& params, std::uint64_t seed);

  const std::array<Member, kSlots>& members() const { return members_; }
  std::array<Member, kSlots>& members() { return members_; }

  /// ATTACK iff any member scores >= 0.5.
  Verdict classify(const FlowRecord& rec, const EncodingContext& ctx) const;

  EnsembleEvaluation evaluate(std::span<const FlowRecord> records, const EncodingContext& ctx) const;

  /// "v1;v2;v3"
  std::string versions() const;
  bool has_role(FeatureMode role) const;

  /// model_<i>.txt per slot plus ensemble.json (roles, kinds, versions,
  /// last metrics).
  void save(const std::filesystem::path& dir) const;
  static EnsembleState load(const std::filesystem::path& dir);

 private:
  std::array<Member, kSlots> members_;
};

EvalReport evaluate_ensemble(const EnsembleState& state, std::span<const FlowRecord> records,
                             const EncodingContext& ctx);

/// FTW: index of the lowest-F1 slot (lowest index on ties) if the candidate
/// beats it strictly, else nullopt.
std::optional<std::size_t> ftw_decision(const std::array<double, kSlots>& incumbent_f1, double candidate_f1);

/// UALL: replace all slots unless some incumbent beats the best new model.
bool uall_replaces(const std::array<double, kSlots>& incumbent_f1,
                   const std::array<double, kSlots>& candidate_f1);

struct UpdateLog {
  UpdateRule rule = UpdateRule::Static;
  bool deferred = false;
  std::vector<std::size_t> replaced;
  std::array<double, kSlots> incumbent_f1{};
  std::vector<double> candidate_f1;
  std::string message;
};

struct RetrainOutcome {
  EnsembleState state;
  UpdateLog log;
};

struct RetrainOptions {
  EnsembleParams params;
  /// The role/kind FTW retrains as its single candidate.
  SlotSpec ftw_candidate{FeatureMode::HGI, ModelKind::GradientBoosted};
  std::uint64_t seed = 0;
};

/// Applies one retraining request. A single-class training set defers the
/// request and leaves the state untouched.
RetrainOutcome retrain_request(const EnsembleState& state, UpdateRule rule,
                               std::span<const FlowRecord> train_set, std::span<const FlowRecord> holdout,
                               const EncodingContext& ctx, const RetrainOptions& options);

}  // namespace hgnids
