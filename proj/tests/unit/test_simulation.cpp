#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hgnids/error.hpp"
#include "hgnids/simulation.hpp"

using namespace hgnids;

namespace {

SimConfig small(int case_id, std::uint64_t seed = 42) {
  SimConfig cfg = SimConfig::for_case(case_id);
  cfg.n_computers = 2;
  cfg.n_epochs = 3;
  cfg.batch.batch_size = 300;
  cfg.ballast = 600;
  cfg.detector_window = 600;
  cfg.params.rf.n_trees = 20;
  cfg.params.gb.n_trees = 40;
  cfg.seed = seed;
  return cfg;
}

const DeskInputs& inputs() {
  static const DeskInputs in = make_desk_inputs(ResearchSpec{2500}, true, 42);
  return in;
}

std::span<const AdversarialExample> adv() { return inputs().adversarial->result.kept; }

std::string csv(const Scorecard& s) {
  std::ostringstream os;
  s.write_csv(os);
  return os.str();
}

void check_conservation(const SimResult& r, const SimConfig& cfg) {
  REQUIRE(r.scorecard.rows.size() == cfg.n_batches());
  REQUIRE(r.artifacts.member_reports.size() == cfg.n_batches());
  std::size_t prev_events = 0;
  for (std::size_t i = 0; i < r.scorecard.rows.size(); ++i) {
    const auto& row = r.scorecard.rows[i];
    CHECK(row.report.total() == cfg.batch.batch_size);
    CHECK(row.report.consistent());
    CHECK(row.epoch == i / cfg.n_computers);
    CHECK(row.computer == i % cfg.n_computers);
    CHECK(row.retrain_events >= prev_events);
    prev_events = row.retrain_events;
    for (const auto& m : r.artifacts.member_reports[i]) {
      CHECK(row.report.fn <= m.fn);
      CHECK(m.total() == row.report.total());
    }
  }
  CHECK(r.artifacts.events.size() == prev_events);
}

}  // namespace

TEST_CASE("case table") {
  const SimConfig c1 = SimConfig::for_case(1);
  CHECK(c1.n_pairs == 1);
  CHECK(c1.rule == UpdateRule::Static);
  CHECK_FALSE(c1.include_adv);
  const SimConfig c3 = SimConfig::for_case(3);
  CHECK(c3.rule == UpdateRule::FTW);
  CHECK_FALSE(c3.include_adv);
  const SimConfig c6 = SimConfig::for_case(6);
  CHECK(c6.n_pairs == 16);
  CHECK(c6.rule == UpdateRule::UALL);
  CHECK(c6.include_adv);
  CHECK(c6.production_mode);
  CHECK_THROWS_AS(SimConfig::for_case(7), UsageError);
  SimConfig bad = SimConfig::for_case(2);
  bad.rule = UpdateRule::UALL;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = SimConfig::for_case(2);
  bad.thresholds = {0};
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = SimConfig::for_case(2);
  bad.batch.attack_frac = 1.2;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  SimConfig full = SimConfig::for_case(5);
  full.apply_full_scale();
  CHECK(full.n_batches() == 300);
  CHECK(full.batch.batch_size == 8900);
  CHECK(std::vector<unsigned>(kThresholdSet.begin(), kThresholdSet.end()) ==
        std::vector<unsigned>{2, 5, 10, 20, 30, 40, 50, 100});
}

TEST_CASE("desk inputs carry adversarial examples above the keep threshold") {
  const auto& in = inputs();
  CHECK(in.data.size() == 2500);
  REQUIRE(in.adversarial.has_value());
  CHECK(in.adversarial->result.generated > 0);
  CHECK(in.adversarial->parent_indices.size() == in.adversarial->result.kept.size());
  for (std::size_t i = 0; i < adv().size(); ++i) {
    CHECK(adv()[i].substitute_score >= 0.55);
    CHECK(in.data.records[in.adversarial->parent_indices[i]].label.is_attack());
  }
}

TEST_CASE("static runs never change the ensemble") {
  for (int c : {1, 2}) {
    const SimConfig cfg = small(c);
    const SimResult r = run_simulation(cfg, inputs().data, {});
    check_conservation(r, cfg);
    for (const auto& row : r.scorecard.rows) CHECK(row.versions == "1;1;1");
    CHECK(r.artifacts.ensembles.size() == 1);
    for (const auto& e : r.artifacts.events) CHECK(e.log.replaced.empty());
  }
}

TEST_CASE("adaptive runs: conservation, event bookkeeping and determinism") {
  for (int c : {3, 4, 5, 6}) {
    CAPTURE(c);
    const SimConfig cfg = small(c);
    const SimResult r = run_simulation(cfg, inputs().data, adv());
    check_conservation(r, cfg);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < r.artifacts.events.size(); ++i) {
      const auto& e = r.artifacts.events[i];
      CHECK(e.index == i);
      CHECK(e.train_size + e.holdout_size > 0);
      if (!e.log.replaced.empty()) ++changed;
      if (cfg.rule == UpdateRule::UALL) CHECK((e.log.replaced.empty() || e.log.replaced.size() == 3));
      if (cfg.rule == UpdateRule::FTW) CHECK(e.log.replaced.size() <= 1);
    }
    CHECK(r.artifacts.ensembles.size() == 1 + changed);
    CHECK(csv(run_simulation(cfg, inputs().data, adv()).scorecard) == csv(r.scorecard));
  }
}

TEST_CASE("production mode flags only scanning pairs") {
  const SimConfig cfg = small(6);
  const SimResult r = run_simulation(cfg, inputs().data, adv());
  std::set<IpPair> scan_pairs;
  for (const auto& rec : inputs().data.records) {
    if (rec.label.is_attack()) scan_pairs.insert({rec.src_ip, rec.dst_ip});
  }
  scan_pairs.insert(kAdversarialPair);  // injected examples are attacks too
  CHECK_FALSE(r.artifacts.flags.empty());
  for (const auto& f : r.artifacts.flags) {
    // Remapped pseudo-pairs live in 10/8 -> 172.31/16; the original pair is kept.
    const bool pseudo = f.pair.first.rfind("10.", 0) == 0 && f.pair.second.rfind("172.31.", 0) == 0;
    CHECK((pseudo || scan_pairs.contains(f.pair)));
  }
}

TEST_CASE("a threshold above any batch's misses never retrains") {
  SimConfig cfg = small(5);
  cfg.thresholds = {1000000};
  const SimResult r = run_simulation(cfg, inputs().data, adv());
  CHECK(r.artifacts.events.empty());
}

TEST_CASE("baseline layout and sweeps") {
  const SimConfig cfg = small(5);
  const SimResult b = baseline_run(cfg, inputs().data, adv());
  check_conservation(b, cfg);
  SimConfig sw = cfg;
  sw.thresholds = {2, 50};
  const SweepResult s = sweep_thresholds(sw, inputs().data, adv());
  REQUIRE(s.summary.size() == 2);
  CHECK(s.runs.size() == 2);
  CHECK(csv(s.runs.at(2).scorecard) == csv(run_simulation(cfg, inputs().data, adv()).scorecard));
  std::ostringstream os;
  s.write_summary_csv(os);
  CHECK(os.str().rfind("threshold,final_f1,final_fnp,retrain_events\n", 0) == 0);
}

TEST_CASE("run artifacts on disk") {
  const SimConfig cfg = small(5);
  const SimResult r = run_simulation(cfg, inputs().data, adv());
  const auto dir = std::filesystem::temp_directory_path() / "hgnids_sim_artifacts";
  std::filesystem::remove_all(dir);
  write_run_artifacts(r, cfg, dir);
  for (const char* f : {"scorecard.csv", "member_scorecard.csv", "retrain_events.csv", "flags.csv", "config.txt"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  CHECK(std::filesystem::exists(dir / "ensembles" / "v1-1-1" / "ensemble.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("simulation input checks") {
  CHECK_THROWS_AS(run_simulation(small(1), Dataset{}, {}), DataError);
  const Dataset benign = synth_traffic(SynthProfile::benign(), 500, {}, 1);
  CHECK_THROWS_AS(run_simulation(small(1), benign, {}), DataError);
}

namespace {

// Pooled FNP over the rows after the batch that fired the first retrain; -1 when nothing fired.
double fnp_after_first_retrain(const SimResult& r) {
  EvalReport pooled;
  bool after = false;
  for (const auto& row : r.scorecard.rows) {
    if (after) pooled += row.report;
    if (row.retrain_events > 0) after = true;
  }
  return after ? EvalReport::from_counts(pooled.tp, pooled.fp, pooled.tn, pooled.fn).fnp : -1.0;
}

}  // namespace

TEST_CASE("desk-scale case comparisons at the default seed") {
  const DeskInputs in = make_desk_inputs(ResearchSpec{}, true, 42);
  const auto& examples = in.adversarial->result.kept;

  SUBCASE("UALL settles at least as well as FTW after the first retrain") {
    SimConfig c3 = SimConfig::for_case(3), c5 = SimConfig::for_case(5);
    const double ftw = fnp_after_first_retrain(run_simulation(c3, in.data, examples));
    const double uall = fnp_after_first_retrain(run_simulation(c5, in.data, examples));
    REQUIRE(uall >= 0.0);
    if (ftw >= 0.0) CHECK(uall <= ftw);
  }

  SUBCASE("static trigger counts never rise with the threshold") {
    SimConfig cfg = SimConfig::for_case(2);
    cfg.thresholds.assign(kThresholdSet.begin(), kThresholdSet.end());
    const SweepResult s = sweep_thresholds(cfg, in.data, {});
    REQUIRE(s.summary.size() == kThresholdSet.size());
    for (std::size_t i = 1; i < s.summary.size(); ++i) {
      CHECK(s.summary[i].threshold > s.summary[i - 1].threshold);
      CHECK(s.summary[i].retrain_events <= s.summary[i - 1].retrain_events);
    }
  }

  SUBCASE("a UALL sweep over 2 and 20 ends without misses") {
    SimConfig cfg = SimConfig::for_case(5);
    cfg.thresholds = {2, 20};
    const SweepResult s = sweep_thresholds(cfg, in.data, examples);
    for (const auto& row : s.summary) CHECK(row.final_epoch.fnp == 0.0);
    CHECK(s.summary[0].retrain_events >= s.summary[1].retrain_events);
  }

  SUBCASE("baseline snapshots only ever hold raw-feature forests") {
    const SimResult b = baseline_run(SimConfig::for_case(5), in.data, examples);
    for (const auto& [label, state] : b.artifacts.ensembles) {
      CHECK_FALSE(state.has_role(FeatureMode::HGI));
      CHECK_FALSE(state.has_role(FeatureMode::HGA));
    }
  }
}
