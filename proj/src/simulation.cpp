#include "hgnids/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hgnids/error.hpp"
#include "hgnids/rng.hpp"
#include "hgnids/text.hpp"

namespace hgnids {

namespace {

struct CaseRow {
  std::size_t pairs;
  UpdateRule rule;
  bool adv;
  bool production;
};

constexpr std::array<CaseRow, 6> kCases = {{
    {1, UpdateRule::Static, false, false},
    {16, UpdateRule::Static, false, false},
    {16, UpdateRule::FTW, false, false},
    {16, UpdateRule::FTW, true, false},
    {16, UpdateRule::UALL, true, false},
    {16, UpdateRule::UALL, true, true},
}};

// Seed streams.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kRemapStream = 2;
constexpr std::uint64_t kInitialStream = 3;
constexpr std::uint64_t kBatchStream = 0x1000;
constexpr std::uint64_t kRetrainStream = 0x2000;
constexpr std::uint64_t kMixStream = 0x3000;

std::string snapshot_label(const EnsembleState& state) {
  std::string v = state.versions();
  std::replace(v.begin(), v.end(), ';', '-');
  return "v" + v;
}

std::vector<FlowRecord> pick(std::span<const FlowRecord> all, std::span<const std::size_t> idx) {
  std::vector<FlowRecord> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

std::vector<BinaryLabel> labels_of(std::span<const FlowRecord> recs) {
  std::vector<BinaryLabel> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back(binary_label(r.label));
  return out;
}

class Simulator {
 public:
  Simulator(const SimConfig& cfg, const Dataset& data, std::span<const AdversarialExample> adv)
      : cfg_(cfg) {
    cfg_.validate();
    if (data.empty()) throw DataError("simulation: no research data");
    const auto labels = labels_of(data.records);
    const auto [tr, te] = stratified_split_indices(labels, 0.8, derive_seed(cfg_.seed, kSplitStream));
    train_ = pick(data.records, tr);
    const auto test = pick(data.records, te);

    for (const auto& r : train_) {
      if (r.label.is_attack()) {
        known_hackers_.insert({r.src_ip, r.dst_ip});
      } else {
        base_pool_.push_back(r);
      }
    }
    Dataset test_scans;
    for (const auto& r : test) {
      (r.label.is_attack() ? test_scans.records : benign_pool_).push_back(r);
    }
    if (cfg_.batch.attack_frac > 0.0 && test_scans.empty()) throw DataError("simulation: no attack records to stream");
    if (cfg_.batch.attack_frac < 1.0 && benign_pool_.empty()) throw DataError("simulation: no benign records to stream");
    if (!test_scans.empty()) {
      scan_pool_ = cfg_.n_pairs > 1 ? remap_ip_pairs(test_scans, cfg_.n_pairs, derive_seed(cfg_.seed, kRemapStream)).records
                                    : test_scans.records;
    }
    if (cfg_.include_adv) {
      for (const auto& e : adv) adv_pool_.push_back(e.record);
    }

    layout_ = cfg_.baseline ? kBaselineLayout : kStandardLayout;
    retrain_opts_.params = cfg_.params;
    retrain_opts_.ftw_candidate = cfg_.baseline ? SlotSpec{FeatureMode::NRF, ModelKind::RandomForest}
                                                : SlotSpec{FeatureMode::HGI, ModelKind::GradientBoosted};
    builder_.add_all(train_);
  }

  SimResult run() {
    SimResult res;
    // Offline training on labeled research data sees the full profiles.
    EncodingContext train_ctx;
    train_ctx.profiles = ProfileTable::from_records(train_);
    train_ctx.hackers = known_hackers_;
    if (cfg_.full_dataset) train_ctx.weights = kNonHackerWeights;
    state_ = EnsembleState::train(train_, train_ctx, layout_, cfg_.params, derive_seed(cfg_.seed, kInitialStream));
    res.artifacts.ensembles.emplace_back(snapshot_label(state_), state_);

    full_profiles_ = train_ctx.profiles;
    ctx_ = train_ctx;
    if (cfg_.production_mode) {
      detector_.emplace(cfg_.detector_window);
      refresh_production_ctx();
    }

    std::size_t counter = 0;
    std::size_t events = 0;
    const unsigned threshold = cfg_.threshold();
    for (std::size_t epoch = 0; epoch < cfg_.n_epochs; ++epoch) {
      for (std::size_t c = 0; c < cfg_.n_computers; ++c) {
        const std::size_t b = epoch * cfg_.n_computers + c;
        const auto batch = make_batch(b);
        const EnsembleEvaluation ev = evaluate(batch);
        builder_.add_all(batch);

        if (cfg_.production_mode) {
          auto flags = detector_->observe(batch);
          if (!flags.empty()) {
            res.artifacts.flags.insert(res.artifacts.flags.end(), flags.begin(), flags.end());
            refresh_production_ctx();
          }
        }

        counter += ev.ensemble.fn;
        if (counter > threshold) {
          counter = 0;
          RetrainEvent event;
          event.index = events++;
          event.epoch = epoch;
          event.computer = c;
          event.evaded_total = evaded_.size();
          retrain(event, res);
          res.artifacts.events.push_back(std::move(event));
        }

        ScorecardRow row;
        row.epoch = epoch;
        row.computer = c;
        row.report = ev.ensemble;
        row.retrain_events = events;
        row.versions = state_.versions();
        res.scorecard.rows.push_back(std::move(row));
        res.artifacts.member_reports.push_back(ev.members);
      }
    }
    res.artifacts.detected_total = detected_;
    res.artifacts.evaded_total = evaded_.size();
    return res;
  }

 private:
  std::vector<FlowRecord> make_batch(std::size_t b) {
    Rng rng(derive_seed(cfg_.seed, kBatchStream + b));
    const std::size_t size = cfg_.batch.batch_size;
    const auto n_attack = static_cast<std::size_t>(std::llround(static_cast<double>(size) * cfg_.batch.attack_frac));
    const std::size_t n_adv =
        adv_pool_.empty() ? 0 : static_cast<std::size_t>(std::llround(static_cast<double>(n_attack) * cfg_.adv_fraction));
    std::vector<FlowRecord> batch;
    batch.reserve(size);
    for (std::size_t i = 0; i < n_attack - n_adv; ++i) batch.push_back(scan_pool_[rng.index(scan_pool_.size())]);
    for (std::size_t i = 0; i < n_adv; ++i) batch.push_back(adv_pool_[rng.index(adv_pool_.size())]);
    for (std::size_t i = n_attack; i < size; ++i) batch.push_back(benign_pool_[rng.index(benign_pool_.size())]);
    rng.shuffle(std::span<FlowRecord>(batch));
    return batch;
  }

  EnsembleEvaluation evaluate(std::span<const FlowRecord> batch) {
    std::vector<BinaryLabel> truth, ens;
    std::array<std::vector<BinaryLabel>, kSlots> member;
    for (const auto& r : batch) {
      const Verdict v = state_.classify(r, ctx_);
      truth.push_back(binary_label(r.label));
      ens.push_back(v.label);
      for (std::size_t i = 0; i < kSlots; ++i) {
        member[i].push_back(v.scores[i] >= 0.5 ? BinaryLabel::Attack : BinaryLabel::Normal);
      }
      if (r.label.is_attack()) {
        if (v.label == BinaryLabel::Attack) {
          ++detected_;
        } else {
          evaded_.push_back(r);
        }
      }
    }
    EnsembleEvaluation ev;
    ev.ensemble = evaluate_labels(truth, ens);
    for (std::size_t i = 0; i < kSlots; ++i) ev.members[i] = evaluate_labels(truth, member[i]);
    return ev;
  }

  void rebuild_profiles() {
    full_profiles_ = ProfileTable::from_hypergraph(builder_.build());
  }

  void refresh_production_ctx() {
    std::set<std::string> ips;
    for (const auto& [src, dst] : detector_->flagged()) {
      ips.insert(src);
      ips.insert(dst);
    }
    ctx_.profiles = full_profiles_.restricted_to(ips);
    ctx_.hackers = detector_->flagged();
  }

  void retrain(RetrainEvent& event, SimResult& res) {
    if (cfg_.rule != UpdateRule::Static) {
      rebuild_profiles();
      if (cfg_.production_mode) {
        refresh_production_ctx();
      } else {
        ctx_.profiles = full_profiles_;
      }
    }

    // Evaded attacks, as many benign records, and a stratified ballast.
    Rng rng(derive_seed(cfg_.seed, kMixStream + event.index));
    std::vector<FlowRecord> mix = evaded_;
    std::vector<std::size_t> benign_idx(base_pool_.size());
    std::iota(benign_idx.begin(), benign_idx.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(benign_idx));
    for (std::size_t i = 0; i < evaded_.size() && !base_pool_.empty(); ++i) {
      mix.push_back(base_pool_[benign_idx[i % benign_idx.size()]]);
    }
    if (cfg_.ballast > 0) {
      if (cfg_.ballast >= train_.size()) {
        mix.insert(mix.end(), train_.begin(), train_.end());
      } else {
        const double frac = static_cast<double>(cfg_.ballast) / static_cast<double>(train_.size());
        const auto [keep, rest] = stratified_split_indices(labels_of(train_), frac, rng.next());
        for (auto i : keep) mix.push_back(train_[i]);
      }
    }
    const auto [tr, ho] = stratified_split_indices(labels_of(mix), 0.8, rng.next());
    const auto train_set = pick(mix, tr);
    const auto holdout = pick(mix, ho);
    event.train_size = train_set.size();
    event.holdout_size = holdout.size();

    retrain_opts_.seed = derive_seed(cfg_.seed, kRetrainStream + event.index);
    RetrainOutcome out = retrain_request(state_, cfg_.rule, train_set, holdout, ctx_, retrain_opts_);
    const bool changed = !out.log.replaced.empty();
    state_ = std::move(out.state);
    event.log = std::move(out.log);
    event.versions_after = state_.versions();
    if (changed) res.artifacts.ensembles.emplace_back(snapshot_label(state_), state_);
  }

  SimConfig cfg_;
  std::vector<FlowRecord> train_;
  std::vector<FlowRecord> base_pool_;
  std::vector<FlowRecord> benign_pool_;
  std::vector<FlowRecord> scan_pool_;
  std::vector<FlowRecord> adv_pool_;
  KnownHackerSet known_hackers_;
  SlotLayout layout_{};
  RetrainOptions retrain_opts_;
  HypergraphBuilder builder_;
  ProfileTable full_profiles_;
  EncodingContext ctx_;
  EnsembleState state_;
  std::optional<ScanDetector> detector_;
  std::vector<FlowRecord> evaded_;
  std::size_t detected_ = 0;
};

void write_report_row(std::ostream& out, const EvalReport& r) {
  out << r.tp << ',' << r.fp << ',' << r.tn << ',' << r.fn << ',' << text::format_double(r.fnp) << ','
      << text::format_double(r.accuracy) << ',' << text::format_double(r.precision) << ','
      << text::format_double(r.recall) << ',' << text::format_double(r.f1);
}

}  // namespace

SimConfig SimConfig::for_case(int case_id) {
  if (case_id < 1 || case_id > 6) throw UsageError("case must be between 1 and 6");
  const CaseRow& row = kCases[static_cast<std::size_t>(case_id - 1)];
  SimConfig cfg;
  cfg.case_id = case_id;
  cfg.n_pairs = row.pairs;
  cfg.rule = row.rule;
  cfg.include_adv = row.adv;
  cfg.production_mode = row.production;
  return cfg;
}

void SimConfig::apply_full_scale() {
  n_computers = 10;
  n_epochs = 30;
  batch.batch_size = 8900;
}

void SimConfig::validate() const {
  if (case_id < 1 || case_id > 6) throw UsageError("case must be between 1 and 6");
  const CaseRow& row = kCases[static_cast<std::size_t>(case_id - 1)];
  const std::string c = "case " + std::to_string(case_id);
  if (n_pairs != row.pairs) throw UsageError(c + " uses " + std::to_string(row.pairs) + " IP pair(s)");
  if (rule != row.rule) throw UsageError(c + " uses the " + std::string(to_string(row.rule)) + " update rule");
  if (include_adv != row.adv) throw UsageError(c + (row.adv ? " includes" : " excludes") + " adversarial examples");
  if (production_mode != row.production) {
    throw UsageError(c + (row.production ? " runs" : " does not run") + " in production mode");
  }
  if (thresholds.empty()) throw UsageError("at least one threshold is required");
  for (unsigned t : thresholds) {
    if (t < 1) throw UsageError("thresholds must be positive");
  }
  if (n_computers < 1 || n_epochs < 1) throw UsageError("need at least one computer and one epoch");
  if (batch.batch_size < 1) throw UsageError("batch size must be positive");
  if (!(batch.attack_frac >= 0.0 && batch.attack_frac <= 1.0)) throw UsageError("attack fraction must lie in [0, 1]");
  if (!(adv_fraction >= 0.0 && adv_fraction <= 1.0)) throw UsageError("adversarial fraction must lie in [0, 1]");
  if (detector_window < 1) throw UsageError("detector window must be positive");
}

std::string SimConfig::to_text() const {
  std::ostringstream os;
  std::vector<std::string> th;
  for (unsigned t : thresholds) th.push_back(std::to_string(t));
  os << "case = " << case_id << '\n'
     << "computers = " << n_computers << '\n'
     << "epochs = " << n_epochs << '\n'
     << "thresholds = " << text::join(th, ",") << '\n'
     << "rule = " << to_string(rule) << '\n'
     << "adversarial = " << (include_adv ? "true" : "false") << '\n'
     << "production = " << (production_mode ? "true" : "false") << '\n'
     << "pairs = " << n_pairs << '\n'
     << "batch-size = " << batch.batch_size << '\n'
     << "attack-frac = " << text::format_double(batch.attack_frac) << '\n'
     << "adv-fraction = " << text::format_double(adv_fraction) << '\n'
     << "ballast = " << ballast << '\n'
     << "detector-window = " << detector_window << '\n'
     << "baseline = " << (baseline ? "true" : "false") << '\n'
     << "full-dataset = " << (full_dataset ? "true" : "false") << '\n'
     << "rf-trees = " << params.rf.n_trees << '\n'
     << "rf-depth = " << params.rf.max_depth << '\n'
     << "gb-trees = " << params.gb.n_trees << '\n'
     << "gb-depth = " << params.gb.max_depth << '\n'
     << "gb-learning-rate = " << text::format_double(params.gb.learning_rate) << '\n'
     << "gb-min-leaf = " << params.gb.min_leaf << '\n'
     << "seed = " << seed << '\n';
  return os.str();
}

void Scorecard::write_csv(std::ostream& out) const {
  out << "epoch,computer,tp,fp,tn,fn,fnp,accuracy,precision,recall,f1,retrain_events,ensemble_versions\n";
  for (const auto& r : rows) {
    out << r.epoch + 1 << ',' << r.computer + 1 << ',';
    write_report_row(out, r.report);
    out << ',' << r.retrain_events << ',' << r.versions << '\n';
  }
}

EvalReport Scorecard::epoch_total(std::size_t epoch) const {
  EvalReport total;
  for (const auto& r : rows) {
    if (r.epoch == epoch) total += r.report;
  }
  return total;
}

std::size_t Scorecard::epochs() const {
  std::size_t n = 0;
  for (const auto& r : rows) n = std::max(n, r.epoch + 1);
  return n;
}

SimResult run_simulation(const SimConfig& cfg, const Dataset& data, std::span<const AdversarialExample> adv) {
  return Simulator(cfg, data, adv).run();
}

SimResult baseline_run(SimConfig cfg, const Dataset& data, std::span<const AdversarialExample> adv) {
  cfg.baseline = true;
  return run_simulation(cfg, data, adv);
}

void SweepResult::write_summary_csv(std::ostream& out) const {
  out << "threshold,final_f1,final_fnp,retrain_events\n";
  for (const auto& s : summary) {
    out << s.threshold << ',' << text::format_double(s.final_epoch.f1) << ','
        << text::format_double(s.final_epoch.fnp) << ',' << s.retrain_events << '\n';
  }
}

SweepResult sweep_thresholds(const SimConfig& cfg, const Dataset& data, std::span<const AdversarialExample> adv) {
  if (cfg.thresholds.empty()) throw UsageError("sweep needs at least one threshold");
  SweepResult out;
  for (unsigned t : cfg.thresholds) {
    if (out.runs.contains(t)) continue;
    SimConfig one = cfg;
    one.thresholds = {t};
    SimResult r = run_simulation(one, data, adv);
    SweepSummaryRow row;
    row.threshold = t;
    row.final_epoch = r.scorecard.epoch_total(r.scorecard.epochs() - 1);
    row.retrain_events = r.artifacts.events.size();
    out.summary.push_back(row);
    out.runs.emplace(t, std::move(r));
  }
  return out;
}

void write_run_artifacts(const SimResult& result, const SimConfig& cfg, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("scorecard.csv");
    result.scorecard.write_csv(out);
  }
  {
    auto out = open("member_scorecard.csv");
    out << "epoch,computer,slot,role,tp,fp,tn,fn,fnp,accuracy,precision,recall,f1\n";
    for (std::size_t i = 0; i < result.scorecard.rows.size(); ++i) {
      const auto& row = result.scorecard.rows[i];
      const auto& members = result.artifacts.member_reports[i];
      for (std::size_t s = 0; s < kSlots; ++s) {
        out << row.epoch + 1 << ',' << row.computer + 1 << ',' << s << ','
            << (cfg.baseline ? "NRF" : to_string(kStandardLayout[s].role)) << ',';
        write_report_row(out, members[s]);
        out << '\n';
      }
    }
  }
  {
    auto out = open("retrain_events.csv");
    out << "event,epoch,computer,evaded_total,train_size,holdout_size,deferred,replaced,incumbent_f1,candidate_f1,versions_after,message\n";
    for (const auto& e : result.artifacts.events) {
      std::vector<std::string> rep, inc, cand;
      for (auto s : e.log.replaced) rep.push_back(std::to_string(s));
      for (double f : e.log.incumbent_f1) inc.push_back(text::format_double(f));
      for (double f : e.log.candidate_f1) cand.push_back(text::format_double(f));
      out << e.index << ',' << e.epoch + 1 << ',' << e.computer + 1 << ',' << e.evaded_total << ','
          << e.train_size << ',' << e.holdout_size << ',' << (e.log.deferred ? "true" : "false") << ','
          << text::join(rep, ";") << ',' << text::join(inc, ";") << ',' << text::join(cand, ";") << ','
          << e.versions_after << ',' << e.log.message << '\n';
    }
  }
  {
    auto out = open("flags.csv");
    write_flags_csv(result.artifacts.flags, out);
  }
  {
    auto out = open("config.txt");
    out << cfg.to_text();
  }
  for (const auto& [label, state] : result.artifacts.ensembles) state.save(dir / "ensembles" / label);
}

Dataset make_research_data(const ResearchSpec& spec, std::uint64_t seed) {
  Dataset d = synth_traffic(SynthProfile::mixed(spec.scan_frac), spec.records, {spec.hacker}, seed);
  d.seed = seed;
  return d;
}

AdversarialPrep prepare_adversarial(const Dataset& data, const GenerationOptions& options, std::uint64_t seed) {
  const auto labels = labels_of(data.records);
  const auto [fit_idx, attack_idx] = stratified_split_indices(labels, 0.85, derive_seed(seed, 1));
  std::vector<FeatureVector> rows;
  rows.reserve(fit_idx.size());
  const EncodingContext none;
  for (auto i : fit_idx) rows.push_back(encode(data.records[i], FeatureMode::NRF, none, i));
  AdversarialPrep prep;
  prep.substitute = fit_substitute(rows, derive_seed(seed, 2));
  const auto parents = pick(data.records, attack_idx);
  prep.result = generate_examples(parents, prep.substitute, options, derive_seed(seed, 3));
  for (auto& e : prep.result.kept) {
    e.parent = attack_idx[e.parent];
    prep.parent_indices.push_back(e.parent);
  }
  return prep;
}

DeskInputs make_desk_inputs(const ResearchSpec& spec, bool with_adversarial, std::uint64_t seed) {
  DeskInputs in;
  in.data = make_research_data(spec, seed);
  if (with_adversarial) {
    GenerationOptions options;
    options.budget = desk_zoo_budget();
    in.adversarial = prepare_adversarial(in.data, options, seed);
  }
  return in;
}

}  // namespace hgnids
