#include "hgnids/ensemble.hpp"

#include <algorithm>
#include <fstream>

#include "hgnids/error.hpp"
#include "hgnids/rng.hpp"
#include "hgnids/text.hpp"
#include "json.hpp"

namespace hgnids {

std::string_view to_string(UpdateRule rule) {
  switch (rule) {
    case UpdateRule::Static: return "STATIC";
    case UpdateRule::FTW: return "FTW";
    case UpdateRule::UALL: return "UALL";
  }
  return "UNKNOWN";
}

UpdateRule parse_update_rule(std::string_view text) {
  const std::string t = text::to_lower(text::trim(text));
  if (t == "static") return UpdateRule::Static;
  if (t == "ftw" || t == "forgo-the-worst") return UpdateRule::FTW;
  if (t == "uall" || t == "update-all") return UpdateRule::UALL;
  throw UsageError("unknown update rule '" + std::string(text) + "' (expected STATIC, FTW or UALL)");
}

namespace {

bool has_both_classes(std::span<const FlowRecord> records) {
  bool attack = false, normal = false;
  for (const auto& r : records) {
    (r.label.is_attack() ? attack : normal) = true;
    if (attack && normal) return true;
  }
  return false;
}

TreeModel fit_slot(const SlotSpec& spec, std::span<const FlowRecord> records, const EncodingContext& ctx,
                   const EnsembleParams& params, std::uint64_t seed) {
  const auto rows = build_matrix(records, spec.role, ctx);
  return train(rows, spec.kind, params.for_kind(spec.kind, seed));
}

EvalReport score_model(const TreeModel& model, std::span<const FlowRecord> records, const EncodingContext& ctx) {
  return evaluate(model, build_matrix(records, model.mode(), ctx));
}

}  // namespace

EnsembleState::EnsembleState(std::array<Member, kSlots> members) : members_(std::move(members)) {
  for (const auto& m : members_) {
    if (m.model.mode() != m.spec.role || m.model.kind() != m.spec.kind) {
      throw InvariantError("ensemble slot model does not match its role");
    }
  }
}

EnsembleState EnsembleState::train(std::span<const FlowRecord> records, const EncodingContext& ctx,
                                   const SlotLayout& layout, const EnsembleParams& params,
                                   std::uint64_t seed) {
  std::array<Member, kSlots> members;
  for (std::size_t i = 0; i < kSlots; ++i) {
    members[i].spec = layout[i];
    members[i].model = fit_slot(layout[i], records, ctx, params, derive_seed(seed, i));
  }
  return EnsembleState(std::move(members));
}

Verdict EnsembleState::classify(const FlowRecord& rec, const EncodingContext& ctx) const {
  Verdict v;
  for (std::size_t i = 0; i < kSlots; ++i) {
    const auto& m = members_[i];
    v.scores[i] = m.model.predict_proba(encode(rec, m.spec.role, ctx));
    if (v.scores[i] >= 0.5) v.label = BinaryLabel::Attack;
  }
  return v;
}

EnsembleEvaluation EnsembleState::evaluate(std::span<const FlowRecord> records, const EncodingContext& ctx) const {
  if (records.empty()) throw DataError("ensemble evaluation: no records");
  std::vector<BinaryLabel> truth;
  std::vector<BinaryLabel> ens;
  std::array<std::vector<BinaryLabel>, kSlots> member;
  truth.reserve(records.size());
  for (const auto& r : records) {
    const Verdict v = classify(r, ctx);
    truth.push_back(binary_label(r.label));
    ens.push_back(v.label);
    for (std::size_t i = 0; i < kSlots; ++i) {
      member[i].push_back(v.scores[i] >= 0.5 ? BinaryLabel::Attack : BinaryLabel::Normal);
    }
  }
  EnsembleEvaluation out;
  out.ensemble = evaluate_labels(truth, ens);
  for (std::size_t i = 0; i < kSlots; ++i) out.members[i] = evaluate_labels(truth, member[i]);
  return out;
}

std::string EnsembleState::versions() const {
  std::string s;
  for (std::size_t i = 0; i < kSlots; ++i) {
    if (i) s += ';';
    s += std::to_string(members_[i].version);
  }
  return s;
}

bool EnsembleState::has_role(FeatureMode role) const {
  return std::any_of(members_.begin(), members_.end(), [role](const Member& m) { return m.spec.role == role; });
}

void EnsembleState::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json j;
  j["format"] = "hgnids-ensemble";
  j["version"] = 1;
  auto& slots = j["slots"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < kSlots; ++i) {
    const auto& m = members_[i];
    const std::string file = "model_" + std::to_string(i) + ".txt";
    m.model.save(dir / file);
    nlohmann::ordered_json s;
    s["slot"] = i;
    s["role"] = to_string(m.spec.role);
    s["kind"] = to_string(m.spec.kind);
    s["version"] = m.version;
    s["model_file"] = file;
    if (m.last_eval) {
      const auto& e = *m.last_eval;
      s["last_eval"] = {{"tp", e.tp}, {"fp", e.fp}, {"tn", e.tn}, {"fn", e.fn}, {"f1", e.f1}};
    }
    slots.push_back(std::move(s));
  }
  std::ofstream out(dir / "ensemble.json", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "ensemble.json").string());
  out << j.dump(2) << '\n';
}

EnsembleState EnsembleState::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "ensemble.json", std::ios::binary);
  if (!in) throw DataError("cannot read " + (dir / "ensemble.json").string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.at("format") != "hgnids-ensemble" || j.at("version") != 1) throw DataError("unsupported ensemble manifest");
    const auto& slots = j.at("slots");
    if (!slots.is_array() || slots.size() != kSlots) throw DataError("ensemble manifest must list 3 slots");
    std::array<Member, kSlots> members;
    for (std::size_t i = 0; i < kSlots; ++i) {
      const auto& s = slots[i];
      auto& m = members[i];
      m.spec.role = parse_feature_mode(s.at("role").get<std::string>());
      m.spec.kind = parse_model_kind(s.at("kind").get<std::string>());
      m.version = s.at("version").get<unsigned>();
      m.model = TreeModel::load(dir / s.at("model_file").get<std::string>());
      if (s.contains("last_eval")) {
        const auto& e = s["last_eval"];
        m.last_eval = EvalReport::from_counts(e.at("tp"), e.at("fp"), e.at("tn"), e.at("fn"));
      }
    }
    return EnsembleState(std::move(members));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("ensemble manifest: ") + e.what());
  } catch (const InvariantError& e) {
    throw DataError(std::string("ensemble manifest: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("ensemble manifest: ") + e.what());
  }
}

EvalReport evaluate_ensemble(const EnsembleState& state, std::span<const FlowRecord> records,
                             const EncodingContext& ctx) {
  return state.evaluate(records, ctx).ensemble;
}

std::optional<std::size_t> ftw_decision(const std::array<double, kSlots>& incumbent_f1, double candidate_f1) {
  std::size_t worst = 0;
  for (std::size_t i = 1; i < kSlots; ++i) {
    if (incumbent_f1[i] < incumbent_f1[worst]) worst = i;
  }
  if (candidate_f1 > incumbent_f1[worst]) return worst;
  return std::nullopt;
}

bool uall_replaces(const std::array<double, kSlots>& incumbent_f1, const std::array<double, kSlots>& candidate_f1) {
  const double best_new = *std::max_element(candidate_f1.begin(), candidate_f1.end());
  return std::none_of(incumbent_f1.begin(), incumbent_f1.end(), [best_new](double f) { return f > best_new; });
}

RetrainOutcome retrain_request(const EnsembleState& state, UpdateRule rule,
                               std::span<const FlowRecord> train_set, std::span<const FlowRecord> holdout,
                               const EncodingContext& ctx, const RetrainOptions& options) {
  RetrainOutcome out{state, {}};
  out.log.rule = rule;
  if (rule == UpdateRule::Static) {
    out.log.message = "static rule: no change";
    return out;
  }
  if (!has_both_classes(train_set)) {
    out.log.deferred = true;
    out.log.message = "deferred: training set has a single class";
    return out;
  }
  if (holdout.empty()) throw DataError("retrain request: empty holdout");

  auto& members = out.state.members();
  for (std::size_t i = 0; i < kSlots; ++i) {
    members[i].last_eval = score_model(members[i].model, holdout, ctx);
    out.log.incumbent_f1[i] = members[i].last_eval->f1;
  }

  if (rule == UpdateRule::FTW) {
    Member cand;
    cand.spec = options.ftw_candidate;
    cand.model = fit_slot(cand.spec, train_set, ctx, options.params, options.seed);
    cand.last_eval = score_model(cand.model, holdout, ctx);
    out.log.candidate_f1 = {cand.last_eval->f1};
    if (const auto slot = ftw_decision(out.log.incumbent_f1, cand.last_eval->f1)) {
      cand.version = members[*slot].version + 1;
      members[*slot] = std::move(cand);
      out.log.replaced = {*slot};
      out.log.message = "replaced slot " + std::to_string(*slot);
    } else {
      out.log.message = "candidate did not beat the worst slot";
    }
    return out;
  }

  std::array<Member, kSlots> fresh;
  std::array<double, kSlots> fresh_f1{};
  for (std::size_t i = 0; i < kSlots; ++i) {
    fresh[i].spec = members[i].spec;
    fresh[i].model = fit_slot(fresh[i].spec, train_set, ctx, options.params, derive_seed(options.seed, i));
    fresh[i].last_eval = score_model(fresh[i].model, holdout, ctx);
    fresh_f1[i] = fresh[i].last_eval->f1;
    fresh[i].version = members[i].version + 1;
  }
  out.log.candidate_f1.assign(fresh_f1.begin(), fresh_f1.end());
  if (uall_replaces(out.log.incumbent_f1, fresh_f1)) {
    members = std::move(fresh);
    out.log.replaced = {0, 1, 2};
    out.log.message = "replaced all slots";
  } else {
    out.log.message = "incumbents retained";
  }
  return out;
}

}  // namespace hgnids
