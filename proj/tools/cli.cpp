#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "hgnids/adversarial.hpp"
#include "hgnids/ensemble.hpp"
#include "hgnids/error.hpp"
#include "hgnids/features.hpp"
#include "hgnids/flow.hpp"
#include "hgnids/hypergraph.hpp"
#include "hgnids/rng.hpp"
#include "hgnids/scan_detector.hpp"
#include "hgnids/simulation.hpp"
#include "hgnids/text.hpp"
#include "hgnids/tree.hpp"
#include "manifest.hpp"

namespace hgnids::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kReportHeader = "# hgnids-report v1";

std::unique_ptr<std::ofstream> open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto out = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

void write_report_csv(const EvalReport& r, std::ostream& out) {
  out << "tp,fp,tn,fn,accuracy,precision,recall,f1,fnp\n"
      << r.tp << ',' << r.fp << ',' << r.tn << ',' << r.fn << ',' << text::format_double(r.accuracy) << ','
      << text::format_double(r.precision) << ',' << text::format_double(r.recall) << ','
      << text::format_double(r.f1) << ',' << text::format_double(r.fnp) << '\n';
}

struct Run {
  RunManifest& manifest;
  std::ostream& out;
  std::uint64_t seed;

  fs::path path(std::string_view name) const { return manifest.out_dir() / name; }

  Dataset load(const fs::path& p) const {
    manifest.add_input(p);
    IngestResult r = ingest_csv(p);
    if (r.report.dropped() > 0) {
      out << p.string() << ": dropped " << r.report.dropped() << " of " << r.report.rows_read << " rows\n";
    }
    return std::move(r.dataset);
  }
};

// Which IP pairs count as known hackers when encoding features.
struct HackerOptions {
  std::vector<std::string> pairs;  // "SRC,DST"
  bool from_labels = true;

  void add_to(CLI::App* app) {
    app->add_option("--hacker", pairs, "Known hacker pair as SRC,DST (repeatable)");
    app->add_flag("!--no-label-hackers", from_labels, "Do not treat attack-labeled pairs as known hackers");
  }

  KnownHackerSet resolve(std::span<const FlowRecord> records) const {
    KnownHackerSet out;
    for (const auto& p : pairs) {
      const auto parts = text::split(p, ',');
      if (parts.size() != 2 || text::trim(parts[0]).empty() || text::trim(parts[1]).empty()) {
        throw UsageError("--hacker expects SRC,DST, got '" + p + "'");
      }
      out.insert({std::string(text::trim(parts[0])), std::string(text::trim(parts[1]))});
    }
    if (from_labels) {
      for (const auto& r : records) {
        if (r.label.is_attack()) out.insert({r.src_ip, r.dst_ip});
      }
    }
    return out;
  }
};

void write_hackers_csv(const KnownHackerSet& hackers, std::ostream& out) {
  out << "src_ip,dst_ip\n";
  for (const auto& [s, d] : hackers) out << s << ',' << d << '\n';
}

// ---------------------------------------------------------------------------

struct IngestCmd {
  fs::path input;
  fs::path columns;

  void add(CLI::App* app) {
    app->add_option("--input", input, "CIC-IDS2017-style CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--columns", columns, "Column map file (field = Header Name)")->check(CLI::ExistingFile);
  }

  void operator()(Run& run) const {
    ColumnMap map;
    if (!columns.empty()) {
      run.manifest.add_input(columns);
      map = ColumnMap::from_file(columns);
    }
    run.manifest.add_input(input);
    IngestResult r = ingest_csv(input, map);
    write_csv(r.dataset, run.path("records.csv"));
    *open_out(run.path("cleaning_report.txt")) << r.report.to_text();
    *open_out(run.path("cleaning_report.csv")) << r.report.to_csv();
    auto bal_file = open_out(run.path("class_balance.csv"));
    auto& bal = *bal_file;
    bal << "label,fraction\n";
    for (const auto& [kind, frac] : class_balance(r.dataset)) {
      bal << to_string(kind) << ',' << text::format_double(frac) << '\n';
    }
    run.out << "kept " << r.report.kept << ", dropped " << r.report.dropped() << '\n';
  }
};

struct SynthCmd {
  std::string profile = "mixed";
  std::size_t count = 6000;
  double attack_frac = 0.555;
  std::size_t pairs = 1;
  std::string hacker_src = ResearchSpec{}.hacker.first;
  std::string hacker_dst = ResearchSpec{}.hacker.second;

  void add(CLI::App* app) {
    app->add_option("--profile", profile, "mixed, scan or benign")
        ->check(CLI::IsMember({"mixed", "scan", "benign"}))
        ->capture_default_str();
    app->add_option("--count", count, "Number of records")->capture_default_str();
    app->add_option("--attack-frac", attack_frac, "Scan share of a mixed profile")->capture_default_str();
    app->add_option("--pairs", pairs, "Scanning IP pairs; pair 1 is the hacker pair")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--hacker-src", hacker_src, "Hacker source IP")->capture_default_str();
    app->add_option("--hacker-dst", hacker_dst, "Hacker destination IP")->capture_default_str();
  }

  void operator()(Run& run) const {
    SynthProfile p = profile == "scan"     ? SynthProfile::port_scan()
                     : profile == "benign" ? SynthProfile::benign()
                                           : SynthProfile::mixed(attack_frac);
    Dataset d = synth_traffic(p, count, {{hacker_src, hacker_dst}}, run.seed);
    if (pairs > 1) d = remap_ip_pairs(d, pairs, run.seed);
    write_csv(d, run.path("records.csv"));
    run.out << "wrote " << d.size() << " records\n";
  }
};

struct HypergraphCmd {
  fs::path input;
  unsigned k = 0;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Flow records CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--k", k, "Schedule skip interval (0: derived from the largest edge)")->capture_default_str();
  }

  void operator()(Run& run) const {
    const Dataset d = run.load(input);
    if (d.empty()) throw DataError("no records in " + input.string());
    const Hypergraph h = build_hypergraph(d);
    const unsigned kk = k > 0 ? k : feature_skip_interval(h);
    const SOverlapGraph g(h);
    write_incidence_csv(h, *open_out(run.path("incidence.csv")));
    ProfileTable::from_hypergraph(h, kk).write_csv(*open_out(run.path("profiles.csv")));

    auto stats_file = open_out(run.path("stats.txt"));
    auto& stats = *stats_file;
    const Schedule sched = s_schedule(kk);
    std::vector<std::string> s_text;
    for (unsigned s : sched) s_text.push_back(std::to_string(s));
    stats << "records = " << d.size() << '\n'
          << "edges = " << h.edge_count() << '\n'
          << "vertices = " << h.vertex_count() << '\n'
          << "max-edge-size = " << h.max_edge_size() << '\n'
          << "k = " << kk << '\n'
          << "schedule = " << text::join(s_text, ",") << '\n';
    for (unsigned s : sched) stats << "components-s" << s << " = " << g.components(s).component_count << '\n';
    run.out << h.edge_count() << " edges, " << h.vertex_count() << " vertices, k = " << kk << '\n';
  }
};

struct FeaturesCmd {
  fs::path input;
  std::string mode = "all";
  bool weights = false;
  unsigned k = 0;
  HackerOptions hackers;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Flow records CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--mode", mode, "nrf, hgi, hga or all")
        ->check(CLI::IsMember({"nrf", "hgi", "hga", "all"}, CLI::ignore_case))
        ->capture_default_str();
    app->add_flag("--weights", weights, "Encode non-hacker pairs with the fixed centrality weights");
    app->add_option("--k", k, "Schedule skip interval (0: derived)")->capture_default_str();
    hackers.add_to(app);
  }

  void operator()(Run& run) const {
    const Dataset d = run.load(input);
    EncodingContext ctx;
    ctx.profiles = ProfileTable::from_records(d.records, k);
    ctx.hackers = hackers.resolve(d.records);
    if (weights) ctx.weights = kNonHackerWeights;
    ctx.profiles.write_csv(*open_out(run.path("profiles.csv")));
    write_hackers_csv(ctx.hackers, *open_out(run.path("hackers.csv")));
    std::vector<FeatureMode> modes;
    if (text::to_lower(mode) == "all") {
      modes = {FeatureMode::NRF, FeatureMode::HGI, FeatureMode::HGA};
    } else {
      modes = {parse_feature_mode(mode)};
    }
    for (FeatureMode m : modes) {
      const auto rows = build_matrix(d.records, m, ctx);
      write_matrix_csv(rows, *open_out(run.path("matrix_" + text::to_lower(to_string(m)) + ".csv")));
      run.out << to_string(m) << ": " << rows.size() << " x " << feature_width(m) << '\n';
    }
  }
};

struct TreeOptions {
  std::size_t trees = 0;
  std::size_t depth = 0;
  std::size_t min_leaf = 0;
  double learning_rate = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("--trees", trees, "Number of trees (0: model default)");
    app->add_option("--depth", depth, "Maximum depth (0: model default)");
    app->add_option("--min-leaf", min_leaf, "Minimum leaf weight (0: model default)");
    app->add_option("--learning-rate", learning_rate, "Boosting learning rate (0: model default)");
  }

  TreeParams apply(TreeParams p) const {
    if (trees > 0) p.n_trees = trees;
    if (depth > 0) p.max_depth = depth;
    if (min_leaf > 0) p.min_leaf = min_leaf;
    if (learning_rate > 0.0) p.learning_rate = learning_rate;
    return p;
  }
};

struct TrainCmd {
  fs::path input;
  std::string mode = "nrf";
  std::string model = "rf";
  double test_frac = 0.2;
  bool weights = false;
  TreeOptions tree;
  HackerOptions hackers;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Flow records CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--mode", mode, "nrf, hgi or hga")
        ->check(CLI::IsMember({"nrf", "hgi", "hga"}, CLI::ignore_case))
        ->capture_default_str();
    app->add_option("--model", model, "rf or gb")->check(CLI::IsMember({"rf", "gb"}, CLI::ignore_case))->capture_default_str();
    app->add_option("--test-frac", test_frac, "Held-out share for the test report")->capture_default_str();
    app->add_flag("--weights", weights, "Encode non-hacker pairs with the fixed centrality weights");
    tree.add_to(app);
    hackers.add_to(app);
  }

  void operator()(Run& run) const {
    const Dataset d = run.load(input);
    const FeatureMode m = parse_feature_mode(mode);
    const ModelKind kind = parse_model_kind(model);
    EncodingContext ctx;
    if (m != FeatureMode::NRF) {
      ctx.profiles = ProfileTable::from_records(d.records);
      ctx.hackers = hackers.resolve(d.records);
      if (weights) ctx.weights = kNonHackerWeights;
      ctx.profiles.write_csv(*open_out(run.path("profiles.csv")));
      write_hackers_csv(ctx.hackers, *open_out(run.path("hackers.csv")));
    }
    const auto rows = build_matrix(d.records, m, ctx);
    const auto [train_rows, test_rows] = train_test_split(rows, 1.0 - test_frac, derive_seed(run.seed, 1));
    const TreeModel fitted = train(train_rows, kind, tree.apply(TreeParams::defaults(kind, derive_seed(run.seed, 2))));
    fitted.save(run.path("model.txt"));
    const EvalReport rep = evaluate(fitted, test_rows);
    write_report_csv(rep, *open_out(run.path("test_report.csv")));
    run.out << to_string(kind) << '/' << to_string(m) << " test F1 " << text::format_double(rep.f1) << '\n';
  }
};

struct EvalCmd {
  fs::path model;
  fs::path input;
  fs::path profiles;
  double threshold = 0.5;
  bool weights = false;
  HackerOptions hackers;

  void add(CLI::App* app) {
    app->add_option("--model", model, "Model file written by train")->required()->check(CLI::ExistingFile);
    app->add_option("--input", input, "Flow records CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--profiles", profiles, "Centrality profile table (default: built from the input)")
        ->check(CLI::ExistingFile);
    app->add_option("--threshold", threshold, "Attack score threshold")->capture_default_str();
    app->add_flag("--weights", weights, "Encode non-hacker pairs with the fixed centrality weights");
    hackers.add_to(app);
  }

  void operator()(Run& run) const {
    run.manifest.add_input(model);
    const TreeModel m = TreeModel::load(model);
    const Dataset d = run.load(input);
    EncodingContext ctx;
    if (m.mode() != FeatureMode::NRF) {
      if (!profiles.empty()) {
        run.manifest.add_input(profiles);
        auto in = open_in(profiles);
        ctx.profiles = ProfileTable::read_csv(in);
      } else {
        ctx.profiles = ProfileTable::from_records(d.records);
      }
      ctx.hackers = hackers.resolve(d.records);
      if (weights) ctx.weights = kNonHackerWeights;
    }
    const auto rows = build_matrix(d.records, m.mode(), ctx);
    const EvalReport rep = evaluate(m, rows, threshold);
    write_report_csv(rep, *open_out(run.path("report.csv")));
    run.out << "F1 " << text::format_double(rep.f1) << ", FNP " << text::format_double(rep.fnp) << '\n';
  }
};

struct AdvgenCmd {
  fs::path input;
  std::size_t records = ResearchSpec{}.records;
  double keep = 0.55;
  ZooBudget budget = desk_zoo_budget();
  std::string ip_mode = "fresh";
  bool score_curves = false;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Research records CSV (default: synthetic)")->check(CLI::ExistingFile);
    app->add_option("--records", records, "Size of the synthetic research set")->capture_default_str();
    app->add_option("--keep", keep, "Minimum substitute score of a kept example")->capture_default_str();
    app->add_option("--max-iters", budget.max_iters, "Coordinate-descent iterations per parent")->capture_default_str();
    app->add_option("--step", budget.step, "Step size in normalized units")->capture_default_str();
    app->add_option("--probe", budget.h, "Finite-difference probe width")->capture_default_str();
    app->add_option("--ip-mode", ip_mode, "fresh or parent")
        ->check(CLI::IsMember({"fresh", "parent"}, CLI::ignore_case))
        ->capture_default_str();
    app->add_flag("--score-curves", score_curves, "Also score the examples with NRF/HGI/HGA models");
  }

  void operator()(Run& run) const {
    Dataset d;
    if (!input.empty()) {
      d = run.load(input);
    } else {
      ResearchSpec spec;
      spec.records = records;
      d = make_research_data(spec, run.seed);
      write_csv(d, run.path("research.csv"));
    }
    GenerationOptions opts;
    opts.keep_threshold = keep;
    opts.budget = budget;
    opts.ip_mode = parse_adv_ip_mode(ip_mode);
    const AdversarialPrep prep = prepare_adversarial(d, opts, run.seed);
    const auto& kept = prep.result.kept;

    write_csv(examples_dataset(kept), run.path("examples.csv"));
    {
      auto meta_file = open_out(run.path("examples_meta.csv"));
      auto& meta = *meta_file;
      meta << "example,parent,substitute_score,query_count\n";
      for (std::size_t i = 0; i < kept.size(); ++i) {
        meta << i << ',' << kept[i].parent << ',' << text::format_double(kept[i].substitute_score) << ','
             << kept[i].query_count << '\n';
      }
    }
    prep.substitute.model.save(run.path("substitute.txt"));
    prep.substitute.norm.save(*open_out(run.path("normalization.csv")));
    *open_out(run.path("summary.txt")) << "generated = " << prep.result.generated << '\n'
                                      << "kept = " << kept.size() << '\n'
                                      << "kept-fraction = " << text::format_double(prep.result.kept_fraction())
                                      << '\n';

    if (score_curves && !kept.empty()) {
      std::vector<FlowRecord> all = d.records;
      for (const auto& e : kept) all.push_back(e.record);
      EncodingContext ctx;
      ctx.profiles = ProfileTable::from_records(all);
      for (const auto& r : all) {
        if (r.label.is_attack()) ctx.hackers.insert({r.src_ip, r.dst_ip});
      }
      const EnsembleState nids =
          EnsembleState::train(d.records, ctx, kStandardLayout, EnsembleParams{}, derive_seed(run.seed, 9));
      std::vector<ModelUnderTest> models{{"substitute", &prep.substitute.model, &prep.substitute.norm}};
      for (const auto& m : nids.members()) models.push_back({std::string(to_string(m.spec.role)), &m.model, nullptr});
      const auto curves = score_distribution(models, kept, ctx);
      write_score_curves_csv(curves, *open_out(run.path("score_curves.csv")));
      for (const auto& c : curves) run.out << c.name << " detects " << text::format_double(c.detected_fraction) << '\n';
    }
    run.out << "kept " << kept.size() << " of " << prep.result.generated << '\n';
  }
};

struct DetectCmd {
  fs::path input;
  std::size_t window = 5000;
  DetectorOptions options;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Flow records CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--window", window, "Records per tumbling window")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--binarize-at", options.binarize_at, "Centrality counted as 1 from this value")->capture_default_str();
    app->add_option("--min-tail", options.min_tail_sum, "Minimum tail sum that flags a pair")->capture_default_str();
    app->add_option("--k", options.k, "Schedule skip interval (0: derived per window)")->capture_default_str();
  }

  void operator()(Run& run) const {
    const Dataset d = run.load(input);
    ScanDetector det(window, options);
    auto flags = det.observe(d.records);
    auto tail = det.flush();
    flags.insert(flags.end(), tail.begin(), tail.end());
    write_flags_csv(flags, *open_out(run.path("flags.csv")));
    *open_out(run.path("summary.txt")) << "windows = " << det.windows_processed() << '\n'
                                      << "flagged-pairs = " << det.flagged().size() << '\n';
    run.out << det.flagged().size() << " flagged pair(s) in " << det.windows_processed() << " window(s)\n";
  }
};

struct SimOptions {
  int case_id = 1;
  bool baseline = false;
  std::size_t computers = 3;
  std::size_t epochs = 10;
  std::size_t batch_size = BatchSpec{}.batch_size;
  double attack_frac = BatchSpec{}.attack_frac;
  double adv_fraction = SimConfig{}.adv_fraction;
  std::size_t ballast = SimConfig{}.ballast;
  std::size_t detector_window = SimConfig{}.detector_window;
  bool full_scale = false;
  bool full_dataset = false;
  std::size_t records = ResearchSpec{}.records;
  fs::path input;
  fs::path adv;

  void add_to(CLI::App* app) {
    app->add_option("--case", case_id, "Case 1-6")->required()->check(CLI::Range(1, 6));
    app->add_flag("--baseline", baseline, "Three raw-feature forests instead of the hypergraph ensemble");
    app->add_option("--computers", computers, "Computers in the simulated network")->capture_default_str();
    app->add_option("--epochs", epochs, "Epochs")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Records per batch")->capture_default_str();
    app->add_option("--attack-frac", attack_frac, "Attack share of each batch")->capture_default_str();
    app->add_option("--adv-fraction", adv_fraction, "Share of attack slots given to adversarial examples")
        ->capture_default_str();
    app->add_option("--ballast", ballast, "Training records added to every retraining set")->capture_default_str();
    app->add_option("--detector-window", detector_window, "Scan detector window (production mode)")
        ->capture_default_str();
    app->add_flag("--full-scale", full_scale, "10 computers x 30 epochs x 8,900-record batches");
    app->add_flag("--full-dataset", full_dataset, "Encode non-hacker pairs with the fixed centrality weights");
    app->add_option("--records", records, "Size of the synthetic research set")->capture_default_str();
    app->add_option("--input", input, "Research records CSV (default: synthetic)")->check(CLI::ExistingFile);
    app->add_option("--adv", adv, "Adversarial examples CSV (default: generated)")->check(CLI::ExistingFile);
  }

  SimConfig config(std::uint64_t seed) const {
    SimConfig cfg = SimConfig::for_case(case_id);
    cfg.n_computers = computers;
    cfg.n_epochs = epochs;
    cfg.batch.batch_size = batch_size;
    cfg.batch.attack_frac = attack_frac;
    cfg.adv_fraction = adv_fraction;
    cfg.ballast = ballast;
    cfg.detector_window = detector_window;
    cfg.baseline = baseline;
    cfg.full_dataset = full_dataset;
    cfg.seed = seed;
    if (full_scale) cfg.apply_full_scale();
    return cfg;
  }

  struct Inputs {
    Dataset data;
    std::vector<AdversarialExample> adv;
  };

  Inputs inputs(const SimConfig& cfg, Run& run) const {
    Inputs in;
    std::optional<AdversarialPrep> prep;
    if (!input.empty()) {
      in.data = run.load(input);
      if (cfg.include_adv && adv.empty()) {
        GenerationOptions opts;
        opts.budget = desk_zoo_budget();
        prep = prepare_adversarial(in.data, opts, run.seed);
      }
    } else {
      ResearchSpec spec;
      spec.records = records;
      DeskInputs desk = make_desk_inputs(spec, cfg.include_adv && adv.empty(), run.seed);
      in.data = std::move(desk.data);
      prep = std::move(desk.adversarial);
    }
    if (!cfg.include_adv) return in;
    if (!adv.empty()) {
      const Dataset ex = run.load(adv);
      for (std::size_t i = 0; i < ex.size(); ++i) {
        AdversarialExample e;
        e.record = ex.records[i];
        e.nrf = encode(e.record, FeatureMode::NRF, EncodingContext{}, i);
        in.adv.push_back(std::move(e));
      }
    } else if (prep) {
      in.adv = prep->result.kept;
      fs::create_directories(run.path("adversarial"));
      write_csv(examples_dataset(in.adv), run.path("adversarial/examples.csv"));
      *open_out(run.path("adversarial/summary.txt"))
          << "generated = " << prep->result.generated << '\n'
          << "kept = " << in.adv.size() << '\n'
          << "kept-fraction = " << text::format_double(prep->result.kept_fraction()) << '\n';
    }
    if (in.adv.empty()) throw DataError("case " + std::to_string(cfg.case_id) + " needs adversarial examples, none available");
    return in;
  }
};

struct SimulateCmd {
  SimOptions sim;
  unsigned threshold = 2;

  void add(CLI::App* app) {
    sim.add_to(app);
    app->add_option("--threshold", threshold, "Evaded-attack count that triggers retraining")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  void operator()(Run& run) const {
    SimConfig cfg = sim.config(run.seed);
    cfg.thresholds = {threshold};
    cfg.validate();
    const auto in = sim.inputs(cfg, run);
    const SimResult r = run_simulation(cfg, in.data, in.adv);
    write_run_artifacts(r, cfg, run.manifest.out_dir());
    const EvalReport last = r.scorecard.epoch_total(r.scorecard.epochs() - 1);
    run.out << "case " << cfg.case_id << (cfg.baseline ? " baseline" : "") << ", threshold " << threshold << ": "
            << r.artifacts.events.size() << " retrain event(s), final-epoch F1 " << text::format_double(last.f1)
            << ", FNP " << text::format_double(last.fnp) << '\n';
  }
};

struct SweepCmd {
  SimOptions sim;
  std::vector<unsigned> thresholds{kThresholdSet.begin(), kThresholdSet.end()};

  void add(CLI::App* app) {
    sim.add_to(app);
    app->add_option("--thresholds", thresholds, "Comma-separated thresholds")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  void operator()(Run& run) const {
    SimConfig cfg = sim.config(run.seed);
    cfg.thresholds = thresholds;
    cfg.validate();
    const auto in = sim.inputs(cfg, run);
    const SweepResult sweep = sweep_thresholds(cfg, in.data, in.adv);
    for (const auto& [t, r] : sweep.runs) {
      SimConfig one = cfg;
      one.thresholds = {t};
      write_run_artifacts(r, one, run.path("th_" + std::to_string(t)));
    }
    sweep.write_summary_csv(*open_out(run.path("sweep_summary.csv")));
    for (const auto& s : sweep.summary) {
      run.out << "threshold " << s.threshold << ": " << s.retrain_events << " retrain event(s), final-epoch F1 "
              << text::format_double(s.final_epoch.f1) << '\n';
    }
  }
};

// ---------------------------------------------------------------------------
// report

struct ScorecardFile {
  std::string label;
  std::vector<ScorecardRow> rows;
};

ScorecardFile read_scorecard(const fs::path& path, std::string label) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty scorecard");
  std::map<std::string, std::size_t> col;
  {
    std::size_t i = 0;
    for (auto f : text::split(text::trim(line), ',')) col[std::string(text::trim(f))] = i++;
  }
  for (const char* need : {"epoch", "computer", "tp", "fp", "tn", "fn", "retrain_events", "ensemble_versions"}) {
    if (!col.contains(need)) throw DataError(path.string() + ": missing column " + need);
  }
  ScorecardFile out{std::move(label), {}};
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line), ',');
    auto num = [&](const char* name) {
      const std::size_t i = col.at(name);
      const auto v = i < f.size() ? text::parse_int(f[i]) : std::nullopt;
      if (!v || *v < 0) throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad " + name);
      return static_cast<std::size_t>(*v);
    };
    ScorecardRow row;
    row.epoch = num("epoch") - 1;
    row.computer = num("computer") - 1;
    row.report = EvalReport::from_counts(num("tp"), num("fp"), num("tn"), num("fn"));
    row.retrain_events = num("retrain_events");
    const std::size_t vi = col.at("ensemble_versions");
    row.versions = vi < f.size() ? std::string(f[vi]) : std::string();
    out.rows.push_back(std::move(row));
  }
  if (out.rows.empty()) throw DataError(path.string() + ": scorecard has no rows");
  return out;
}

struct ReportCmd {
  std::vector<fs::path> run_dirs;

  void add(CLI::App* app) {
    app->add_option("--run-dir", run_dirs, "Run directory written by simulate or sweep (repeatable)")
        ->required()
        ->check(CLI::ExistingDirectory);
  }

  void operator()(Run& run) const {
    std::vector<ScorecardFile> cards;
    for (const auto& dir : run_dirs) {
      const std::string base = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
      std::vector<std::pair<std::string, fs::path>> found;
      if (fs::exists(dir / "scorecard.csv")) found.emplace_back(base, dir / "scorecard.csv");
      std::vector<fs::path> subs;
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory() && fs::exists(e.path() / "scorecard.csv")) subs.push_back(e.path());
      }
      std::sort(subs.begin(), subs.end());
      for (const auto& s : subs) found.emplace_back(base + "/" + s.filename().string(), s / "scorecard.csv");
      if (found.empty()) throw DataError("no scorecard.csv in " + dir.string());
      for (auto& [label, path] : found) {
        run.manifest.add_input(path);
        cards.push_back(read_scorecard(path, label));
      }
    }

    auto series_file = open_out(run.path("series.csv"));
    auto& series = *series_file;
    series << "run,step,epoch,computer,fnp,f1,retrain_events\n";
    auto summary_file = open_out(run.path("summary.csv"));
    auto& summary = *summary_file;
    summary << "run,rows,retrain_events,first_retrain_step,max_fnp,final_epoch_f1,final_epoch_fnp\n";
    auto report_file = open_out(run.path("report.txt"));
    auto& report = *report_file;
    report << kReportHeader << '\n'
           << "# columns: run rows retrain_events first_retrain_step max_fnp final_epoch_f1 final_epoch_fnp\n";

    for (const auto& c : cards) {
      std::size_t last_epoch = 0;
      double max_fnp = 0.0;
      std::optional<std::size_t> first_retrain;
      for (std::size_t i = 0; i < c.rows.size(); ++i) {
        const auto& r = c.rows[i];
        series << c.label << ',' << i + 1 << ',' << r.epoch + 1 << ',' << r.computer + 1 << ','
               << text::format_double(r.report.fnp) << ',' << text::format_double(r.report.f1) << ','
               << r.retrain_events << '\n';
        last_epoch = std::max(last_epoch, r.epoch);
        max_fnp = std::max(max_fnp, r.report.fnp);
        if (!first_retrain && r.retrain_events > 0) first_retrain = i + 1;
      }
      EvalReport final_epoch;
      for (const auto& r : c.rows) {
        if (r.epoch == last_epoch) final_epoch += r.report;
      }
      const std::string first = first_retrain ? std::to_string(*first_retrain) : "-";
      const std::size_t events = c.rows.back().retrain_events;
      summary << c.label << ',' << c.rows.size() << ',' << events << ',' << (first_retrain ? first : "") << ','
              << text::format_double(max_fnp) << ',' << text::format_double(final_epoch.f1) << ','
              << text::format_double(final_epoch.fnp) << '\n';
      report << c.label << ' ' << c.rows.size() << ' ' << events << ' ' << first << ' '
             << text::format_double(max_fnp) << ' ' << text::format_double(final_epoch.f1) << ' '
             << text::format_double(final_epoch.fnp) << '\n';
    }
    run.out << "reported " << cards.size() << " run(s)\n";
  }
};

// ---------------------------------------------------------------------------

std::string env_name(const std::string& long_name) {
  std::string out = "HGNIDS_";
  for (char ch : long_name) out.push_back(ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  return out;
}

struct Command {
  CLI::App* app = nullptr;
  std::function<void(Run&)> action;
  std::uint64_t seed = 42;
  fs::path out_dir;
  fs::path config;
};

bool given_on_command_line(std::span<const std::string> args, const std::string& name) {
  const std::string flag = "--" + name;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
}

// Config file values become extra arguments for every option that neither
// the command line nor an HGNIDS_* variable sets.
std::vector<std::string> expand_config(std::vector<std::string> args, CLI::App& root) {
  auto sub_it = std::find_if(args.begin(), args.end(), [](const std::string& a) { return !a.starts_with("-"); });
  if (sub_it == args.end()) return args;
  CLI::App* sub = root.get_subcommand_no_throw(*sub_it);
  if (sub == nullptr) return args;

  std::string path;
  for (auto it = sub_it + 1; it != args.end(); ++it) {
    if (*it == "--config" && it + 1 != args.end()) path = *(it + 1);
    if (it->starts_with("--config=")) path = it->substr(9);
  }
  if (path.empty()) {
    if (const char* env = std::getenv("HGNIDS_CONFIG")) path = env;
  }
  if (path.empty()) return args;
  if (!fs::is_regular_file(path)) throw UsageError("config file not found: " + path);

  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw UsageError("cannot parse config file " + path + ": " + e.what());
  }
  std::vector<std::string> extra;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) throw UsageError(path + ": sections are not supported ('" + item.fullname() + "')");
    const CLI::Option* opt = sub->get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config" || item.name == "help") {
      throw UsageError(path + ": unknown key '" + item.name + "' for " + sub->get_name());
    }
    if (given_on_command_line(args, item.name)) continue;
    if (!opt->get_envname().empty() && std::getenv(opt->get_envname().c_str()) != nullptr) continue;
    extra.push_back("--" + item.name + "=" + text::join(item.inputs, ","));
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

template <class Cmd>
void register_command(CLI::App& root, std::vector<std::unique_ptr<Command>>& cmds, const std::string& name,
                      const std::string& desc, std::shared_ptr<Cmd> impl) {
  auto c = std::make_unique<Command>();
  c->app = root.add_subcommand(name, desc);
  c->out_dir = "hgnids-" + name;
  c->app->add_option("--seed", c->seed, "Random seed")->capture_default_str();
  c->app->add_option("--out-dir", c->out_dir, "Directory for artifacts and manifest.json")->capture_default_str();
  c->app->add_option("--config", c->config, "Flat key = value file; keys are option names")
      ->check(CLI::ExistingFile);
  impl->add(c->app);
  for (CLI::Option* opt : c->app->get_options()) {
    const std::string& lname = opt->get_single_name();
    if (lname.empty() || lname == "help" || lname == "config") continue;
    opt->envname(env_name(lname));
  }
  c->action = [impl](Run& run) { (*impl)(run); };
  cmds.push_back(std::move(c));
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kUsage;
  if (dynamic_cast<const DataError*>(&e)) return kData;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kData;
  return kInternal;
}

int run_checked(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  try {
    return run_checked(args, out, err);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

namespace {

int run_checked(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hypergraph analytics and ensemble intrusion detection over network flows", "hgnids"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  std::vector<std::unique_ptr<Command>> cmds;
  register_command(app, cmds, "ingest", "Clean a CIC-IDS2017-style CSV", std::make_shared<IngestCmd>());
  register_command(app, cmds, "synth", "Generate synthetic flow records", std::make_shared<SynthCmd>());
  register_command(app, cmds, "hypergraph", "Build the port hypergraph, its statistics and centrality profiles",
                   std::make_shared<HypergraphCmd>());
  register_command(app, cmds, "features", "Write NRF/HGI/HGA feature matrices", std::make_shared<FeaturesCmd>());
  register_command(app, cmds, "train", "Train one tree model", std::make_shared<TrainCmd>());
  register_command(app, cmds, "eval", "Evaluate a saved model", std::make_shared<EvalCmd>());
  register_command(app, cmds, "advgen", "Generate adversarial scan examples", std::make_shared<AdvgenCmd>());
  register_command(app, cmds, "detect-scan", "Flag scanning pairs from centrality signatures",
                   std::make_shared<DetectCmd>());
  register_command(app, cmds, "simulate", "Run one simulation case", std::make_shared<SimulateCmd>());
  register_command(app, cmds, "sweep", "Run one case at several thresholds", std::make_shared<SweepCmd>());
  register_command(app, cmds, "report", "Summarize run directories", std::make_shared<ReportCmd>());

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(std::vector<std::string>(args.begin(), args.end()), app);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  std::vector<const char*> argv{"hgnids"};
  for (const auto& a : expanded) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  Command* cmd = nullptr;
  for (auto& c : cmds) {
    if (c->app->parsed()) cmd = c.get();
  }
  if (cmd == nullptr) {
    err << "no subcommand given\n";
    return kUsage;
  }

  std::optional<RunManifest> manifest;
  try {
    manifest.emplace(cmd->app->get_name(), cmd->out_dir, cmd->seed, cmd->app->config_to_str(true, false),
                     std::vector<std::string>(args.begin(), args.end()));
    manifest->begin();
    Run run{*manifest, out, cmd->seed};
    cmd->action(run);
    manifest->finish_ok();
    return kOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (manifest) {
      try {
        manifest->finish_failed(e.what());
      } catch (const std::exception& inner) {
        err << "error: could not update manifest: " << inner.what() << '\n';
      }
    }
    return exit_code_for(e);
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace hgnids::cli
