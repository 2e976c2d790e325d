#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hgnids/adversarial.hpp"
#include "hgnids/ensemble.hpp"
#include "hgnids/flow.hpp"
#include "hgnids/scan_detector.hpp"

namespace hgnids {

/// Retraining thresholds studied for the port-scan cases.
inline constexpr std::array<unsigned, 8> kThresholdSet = {2, 5, 10, 20, 30, 40, 50, 100};

// Benign traffic only feeds retraining mixes by default; the stream is
// scans plus any adversarial examples.
struct BatchSpec {
  std::size_t batch_size = 1000;
  double attack_frac = 1.0;
};

struct SimConfig {
  int case_id = 1;
  std::size_t n_computers = 3;
  std::size_t n_epochs = 10;
  std::vector<unsigned> thresholds{2};  // run_simulation uses the first
  UpdateRule rule = UpdateRule::Static;
  bool include_adv = false;
  bool production_mode = false;
  std::size_t n_pairs = 1;
  BatchSpec batch;
  double adv_fraction = 0.2;       // share of attack slots filled with adversarial examples
  std::size_t ballast = 2000;      // training records mixed into every retraining set
  std::size_t detector_window = 5000;
  bool baseline = false;           // three raw-feature forests instead of RF/HGI/HGA
  bool full_dataset = false;       // weight-encode non-hacker pairs
  EnsembleParams params;
  std::uint64_t seed = 42;

  /// Case table: pairs / rule / adversarial / production.
  ///   1: 1 STATIC no no    2: 16 STATIC no no   3: 16 FTW no no
  ///   4: 16 FTW yes no     5: 16 UALL yes no    6: 16 UALL yes yes
  static SimConfig for_case(int case_id);

  /// 10 computers x 30 epochs x 8,900-record batches.
  void apply_full_scale();

  /// Rejects settings that contradict the case table or are out of range.
  void validate() const;

  std::size_t n_batches() const { return n_epochs * n_computers; }
  unsigned threshold() const { return thresholds.empty() ? 0 : thresholds.front(); }

  /// key=value lines, readable as a config file.
  std::string to_text() const;
};

struct ScorecardRow {
  std::size_t epoch = 0;
  std::size_t computer = 0;
  EvalReport report;
  std::size_t retrain_events = 0;  // cumulative, including any fired after this batch
  std::string versions;            // slot versions after this batch
};

struct Scorecard {
  std::vector<ScorecardRow> rows;

  /// epoch,computer,tp,fp,tn,fn,fnp,accuracy,precision,recall,f1,retrain_events,ensemble_versions
  void write_csv(std::ostream& out) const;
  /// Counts of every row in one epoch, pooled.
  EvalReport epoch_total(std::size_t epoch) const;
  std::size_t epochs() const;
};

struct RetrainEvent {
  std::size_t index = 0;
  std::size_t epoch = 0;
  std::size_t computer = 0;
  std::size_t evaded_total = 0;
  std::size_t train_size = 0;
  std::size_t holdout_size = 0;
  UpdateLog log;
  std::string versions_after;
};

struct RunArtifacts {
  std::vector<RetrainEvent> events;
  std::vector<ScanFlag> flags;
  std::vector<std::array<EvalReport, kSlots>> member_reports;  // parallel to scorecard rows
  std::vector<std::pair<std::string, EnsembleState>> ensembles;  // initial + every change
  std::size_t detected_total = 0;
  std::size_t evaded_total = 0;
};

struct SimResult {
  Scorecard scorecard;
  RunArtifacts artifacts;
};

/// data: labeled research traffic. It is split 80/20; the 80% trains the
/// initial ensemble and supplies benign and ballast records for
/// retraining, the 20% feeds the traffic stream. adv: examples injected
/// into the stream when the case includes them.
SimResult run_simulation(const SimConfig& cfg, const Dataset& data, std::span<const AdversarialExample> adv);

/// run_simulation with the three-forest layout.
SimResult baseline_run(SimConfig cfg, const Dataset& data, std::span<const AdversarialExample> adv);

struct SweepSummaryRow {
  unsigned threshold = 0;
  EvalReport final_epoch;
  std::size_t retrain_events = 0;
};

struct SweepResult {
  std::map<unsigned, SimResult> runs;
  std::vector<SweepSummaryRow> summary;

  /// threshold,final_f1,final_fnp,retrain_events
  void write_summary_csv(std::ostream& out) const;
};

/// One independent run per threshold in cfg.thresholds.
SweepResult sweep_thresholds(const SimConfig& cfg, const Dataset& data, std::span<const AdversarialExample> adv);

/// Writes scorecard.csv, member_scorecard.csv, retrain_events.csv,
/// flags.csv, config.txt and ensembles/<label>/ into dir.
void write_run_artifacts(const SimResult& result, const SimConfig& cfg, const std::filesystem::path& dir);

// Desk-scale stand-in for the labeled research data.

struct ResearchSpec {
  std::size_t records = 6000;
  double scan_frac = 0.555;
  IpPair hacker{"172.16.0.1", "192.168.10.50"};
};

Dataset make_research_data(const ResearchSpec& spec, std::uint64_t seed);

/// Budget used for simulation inputs: short enough that most examples stay
/// above the keep threshold.
inline ZooBudget desk_zoo_budget() { return ZooBudget{10, 1e-4, 1e-3, 1}; }

struct AdversarialPrep {
  Substitute substitute;
  GenerationResult result;
  std::vector<std::size_t> parent_indices;  // research indices of attacked rows
};

/// Fits the substitute on an 85% stratified slice of data's raw features
/// and attacks the scan records of the remaining 15%.
AdversarialPrep prepare_adversarial(const Dataset& data, const GenerationOptions& options, std::uint64_t seed);

struct DeskInputs {
  Dataset data;
  std::optional<AdversarialPrep> adversarial;
};

/// Synthetic research data and, when asked, adversarial examples generated
/// from it with desk_zoo_budget(). Both draw from the same seed.
DeskInputs make_desk_inputs(const ResearchSpec& spec, bool with_adversarial, std::uint64_t seed);

}  // namespace hgnids
