#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cli.hpp"
#include "hgnids/adversarial.hpp"
#include "hgnids/ensemble.hpp"
#include "hgnids/error.hpp"
#include "hgnids/features.hpp"
#include "hgnids/flow.hpp"
#include "hgnids/hypergraph.hpp"
#include "hgnids/scan_detector.hpp"
#include "hgnids/simulation.hpp"
#include "hgnids/tree.hpp"

namespace py = pybind11;
using namespace hgnids;

namespace {

EdgeId edge_of(const Hypergraph& h, const std::string& ip) { return h.require(ip); }

py::array_t<double> to_array(const std::vector<FeatureVector>& rows, std::size_t width) {
  py::array_t<double> out({rows.size(), width});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i].values[j];
  }
  return out;
}

std::vector<FeatureVector> from_array(py::array_t<double, py::array::c_style | py::array::forcecast> x,
                                      py::array_t<int, py::array::c_style | py::array::forcecast> y,
                                      FeatureMode mode) {
  if (x.ndim() != 2) throw UsageError("X must be two-dimensional");
  if (y.ndim() != 1 || y.shape(0) != x.shape(0)) throw UsageError("y must be one label per row of X");
  if (static_cast<std::size_t>(x.shape(1)) != feature_width(mode)) throw UsageError("X width does not match the mode");
  auto xm = x.unchecked<2>();
  auto ym = y.unchecked<1>();
  std::vector<FeatureVector> rows(static_cast<std::size_t>(x.shape(0)));
  for (py::ssize_t i = 0; i < x.shape(0); ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    r.mode = mode;
    r.origin = static_cast<std::size_t>(i);
    r.label = ym(i) != 0 ? BinaryLabel::Attack : BinaryLabel::Normal;
    for (py::ssize_t j = 0; j < x.shape(1); ++j) r.values.push_back(xm(i, j));
  }
  return rows;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["tp"] = r.tp;
  d["fp"] = r.fp;
  d["tn"] = r.tn;
  d["fn"] = r.fn;
  d["accuracy"] = r.accuracy;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["fnp"] = r.fnp;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hypergraph analytics and ensemble intrusion detection over network flows";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  py::class_<FlowRecord>(m, "FlowRecord")
      .def(py::init<>())
      .def_readwrite("src_ip", &FlowRecord::src_ip)
      .def_readwrite("dst_ip", &FlowRecord::dst_ip)
      .def_readwrite("src_port", &FlowRecord::src_port)
      .def_readwrite("dst_port", &FlowRecord::dst_port)
      .def_readwrite("protocol", &FlowRecord::protocol)
      .def_readwrite("flow_duration", &FlowRecord::flow_duration)
      .def_readwrite("tot_fwd_pkts", &FlowRecord::tot_fwd_pkts)
      .def_readwrite("tot_bwd_pkts", &FlowRecord::tot_bwd_pkts)
      .def_readwrite("tot_fwd_bytes", &FlowRecord::tot_fwd_bytes)
      .def_readwrite("tot_bwd_bytes", &FlowRecord::tot_bwd_bytes)
      .def_readwrite("flow_bytes_per_s", &FlowRecord::flow_bytes_per_s)
      .def_readwrite("flow_pkts_per_s", &FlowRecord::flow_pkts_per_s)
      .def_readwrite("down_up_ratio", &FlowRecord::down_up_ratio)
      .def_property(
          "label", [](const FlowRecord& r) { return r.label.to_string(); },
          [](FlowRecord& r, const std::string& s) { r.label = ActivityLabel::parse(s); })
      .def_property_readonly("is_attack", [](const FlowRecord& r) { return r.label.is_attack(); })
      .def("__repr__", [](const FlowRecord& r) {
        return "<FlowRecord " + r.src_ip + " -> " + r.dst_ip + ":" + std::to_string(r.dst_port) + " " +
               r.label.to_string() + ">";
      });

  m.def(
      "synth_traffic",
      [](const std::string& profile, std::size_t count, const IpPairList& pairs, std::uint64_t seed,
         double attack_frac) {
        SynthProfile p = profile == "scan"     ? SynthProfile::port_scan()
                         : profile == "benign" ? SynthProfile::benign()
                         : profile == "mixed"  ? SynthProfile::mixed(attack_frac)
                                               : throw UsageError("profile must be scan, benign or mixed");
        return synth_traffic(p, count, pairs, seed).records;
      },
      py::arg("profile"), py::arg("count"), py::arg("pairs"), py::arg("seed"), py::arg("attack_frac") = 0.555);

  m.def(
      "ingest_csv",
      [](const std::filesystem::path& path) {
        IngestResult r = ingest_csv(path);
        py::dict rep;
        rep["rows_read"] = r.report.rows_read;
        rep["kept"] = r.report.kept;
        rep["negative_duration"] = r.report.negative_duration;
        rep["missing_value"] = r.report.missing_value;
        rep["non_finite"] = r.report.non_finite;
        rep["unparseable"] = r.report.unparseable;
        return py::make_tuple(r.dataset.records, rep);
      },
      py::arg("path"));

  m.def(
      "write_csv",
      [](const std::vector<FlowRecord>& records, const std::filesystem::path& path) {
        Dataset d;
        d.records = records;
        write_csv(d, path);
      },
      py::arg("records"), py::arg("path"));

  py::class_<Hypergraph>(m, "Hypergraph")
      .def(py::init([](const std::vector<FlowRecord>& records) { return build_hypergraph(records); }),
           py::arg("records"))
      .def_static("from_edges", &Hypergraph::from_edges, py::arg("edges"))
      .def_property_readonly("edge_count", &Hypergraph::edge_count)
      .def_property_readonly("vertex_count", &Hypergraph::vertex_count)
      .def_property_readonly("max_edge_size", &Hypergraph::max_edge_size)
      .def("edges",
           [](const Hypergraph& h) {
             py::list out;
             for (const auto& e : h.edges()) {
               out.append(py::make_tuple(e.ip, std::string(to_string(e.role)), e.ports));
             }
             return out;
           })
      .def("ports", [](const Hypergraph& h, const std::string& ip) { return h.edge(edge_of(h, ip)).ports; })
      .def("s_distance",
           [](const Hypergraph& h, const std::string& a, const std::string& b, unsigned s) {
             return s_distance(h, edge_of(h, a), edge_of(h, b), s);
           })
      .def("s_components",
           [](const Hypergraph& h, unsigned s) {
             const SComponentMap c = s_components(h, s);
             std::vector<std::vector<std::string>> groups(c.component_count);
             for (std::size_t i = 0; i < c.assignment.size(); ++i) {
               groups[c.assignment[i]].push_back(h.edges()[i].ip);
             }
             return groups;
           })
      .def("s_closeness",
           [](const Hypergraph& h, const std::string& ip, unsigned s) {
             return s_closeness_centrality(h, edge_of(h, ip), s);
           })
      .def(
          "profile",
          [](const Hypergraph& h, const std::string& ip, unsigned k) {
            const CentralityProfile p = centrality_profile(h, edge_of(h, ip), k > 0 ? k : feature_skip_interval(h));
            return py::make_tuple(p.schedule, p.values, p.total);
          },
          py::arg("ip"), py::arg("k") = 0);

  m.def("s_schedule", &s_schedule, py::arg("k"));
  m.def("feature_skip_interval", py::overload_cast<std::size_t>(&feature_skip_interval), py::arg("max_edge_size"));
  m.def("detector_skip_interval", &detector_skip_interval, py::arg("max_edge_size"));

  m.def(
      "build_matrix",
      [](const std::vector<FlowRecord>& records, const std::string& mode, std::optional<KnownHackerSet> hackers,
         bool weights) {
        const FeatureMode fm = parse_feature_mode(mode);
        EncodingContext ctx;
        if (fm != FeatureMode::NRF) ctx.profiles = ProfileTable::from_records(records);
        if (hackers) {
          ctx.hackers = *hackers;
        } else {
          for (const auto& r : records) {
            if (r.label.is_attack()) ctx.hackers.insert({r.src_ip, r.dst_ip});
          }
        }
        if (weights) ctx.weights = kNonHackerWeights;
        const auto rows = build_matrix(records, fm, ctx);
        py::array_t<int> y(static_cast<py::ssize_t>(rows.size()));
        auto ym = y.mutable_unchecked<1>();
        for (std::size_t i = 0; i < rows.size(); ++i) ym(static_cast<py::ssize_t>(i)) = static_cast<int>(rows[i].label);
        return py::make_tuple(to_array(rows, feature_width(fm)), y, feature_names(fm));
      },
      py::arg("records"), py::arg("mode"), py::arg("hackers") = py::none(), py::arg("weights") = false);

  py::class_<TreeModel>(m, "TreeModel")
      .def_property_readonly("kind", [](const TreeModel& t) { return std::string(to_string(t.kind())); })
      .def_property_readonly("mode", [](const TreeModel& t) { return std::string(to_string(t.mode())); })
      .def_property_readonly("width", &TreeModel::width)
      .def_property_readonly("n_trees", [](const TreeModel& t) { return t.trees().size(); })
      .def("predict_proba",
           [](const TreeModel& t, py::array_t<double, py::array::c_style | py::array::forcecast> x) {
             if (x.ndim() != 2) throw UsageError("X must be two-dimensional");
             auto xm = x.unchecked<2>();
             std::vector<double> out(static_cast<std::size_t>(x.shape(0)));
             for (py::ssize_t i = 0; i < x.shape(0); ++i) {
               out[static_cast<std::size_t>(i)] =
                   t.predict_proba(std::span<const double>(xm.data(i, 0), static_cast<std::size_t>(x.shape(1))));
             }
             return out;
           })
      .def("serialize", &TreeModel::serialize)
      .def("save", py::overload_cast<const std::filesystem::path&>(&TreeModel::save, py::const_))
      .def_static("load", py::overload_cast<const std::filesystem::path&>(&TreeModel::load))
      .def_static("deserialize",
                  [](const std::string& s) {
                    std::istringstream in(s);
                    return TreeModel::load(in);
                  })
      .def(py::self == py::self);

  m.def(
      "train",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> x,
         py::array_t<int, py::array::c_style | py::array::forcecast> y, const std::string& kind,
         const std::string& mode, std::uint64_t seed, std::size_t n_trees, std::size_t max_depth) {
        const FeatureMode fm = parse_feature_mode(mode);
        const ModelKind mk = parse_model_kind(kind);
        TreeParams p = TreeParams::defaults(mk, seed);
        if (n_trees > 0) p.n_trees = n_trees;
        if (max_depth > 0) p.max_depth = max_depth;
        const auto rows = from_array(x, y, fm);
        py::gil_scoped_release release;
        return train(rows, mk, p);
      },
      py::arg("X"), py::arg("y"), py::arg("kind") = "rf", py::arg("mode") = "nrf", py::arg("seed") = 0,
      py::arg("n_trees") = 0, py::arg("max_depth") = 0);

  m.def(
      "evaluate_labels",
      [](const std::vector<int>& truth, const std::vector<int>& predicted) {
        auto conv = [](const std::vector<int>& v) {
          std::vector<BinaryLabel> out;
          for (int x : v) out.push_back(x != 0 ? BinaryLabel::Attack : BinaryLabel::Normal);
          return out;
        };
        return report_dict(evaluate_labels(conv(truth), conv(predicted)));
      },
      py::arg("truth"), py::arg("predicted"));

  m.def(
      "detect_window",
      [](const std::vector<FlowRecord>& window, double binarize_at, unsigned min_tail_sum) {
        FlaggedSet flagged;
        DetectorOptions opts;
        opts.binarize_at = binarize_at;
        opts.min_tail_sum = min_tail_sum;
        py::list out;
        for (const auto& f : detect_window(window, flagged, 0, opts)) {
          out.append(py::make_tuple(f.pair.first, f.pair.second, f.tail_sum));
        }
        return out;
      },
      py::arg("window"), py::arg("binarize_at") = 0.95, py::arg("min_tail_sum") = 2);

  m.def(
      "simulate",
      [](int case_id, unsigned threshold, std::uint64_t seed, bool baseline, std::size_t computers,
         std::size_t epochs, std::size_t records) {
        SimConfig cfg = SimConfig::for_case(case_id);
        cfg.thresholds = {threshold};
        cfg.baseline = baseline;
        cfg.n_computers = computers;
        cfg.n_epochs = epochs;
        cfg.seed = seed;
        cfg.validate();
        ResearchSpec spec;
        spec.records = records;
        SimResult r;
        {
          py::gil_scoped_release release;
          const DeskInputs in = make_desk_inputs(spec, cfg.include_adv, seed);
          std::vector<AdversarialExample> adv;
          if (in.adversarial) adv = in.adversarial->result.kept;
          r = run_simulation(cfg, in.data, adv);
        }
        py::list rows;
        for (const auto& row : r.scorecard.rows) {
          py::dict d = report_dict(row.report);
          d["epoch"] = row.epoch + 1;
          d["computer"] = row.computer + 1;
          d["retrain_events"] = row.retrain_events;
          d["ensemble_versions"] = row.versions;
          rows.append(d);
        }
        return rows;
      },
      py::arg("case_id"), py::arg("threshold") = 2, py::arg("seed") = 42, py::arg("baseline") = false,
      py::arg("computers") = 3, py::arg("epochs") = 10, py::arg("records") = ResearchSpec{}.records);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one hgnids subcommand in-process; returns (exit code, stdout, stderr).");
}
