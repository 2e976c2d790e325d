#include "hgnids/tree.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "hgnids/error.hpp"
#include "hgnids/rng.hpp"
#include "hgnids/text.hpp"

namespace hgnids {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::RandomForest ? "RANDOM_FOREST" : "GRADIENT_BOOSTED";
}

ModelKind parse_model_kind(std::string_view text) {
  const std::string t = text::to_lower(text::trim(text));
  if (t == "random_forest" || t == "rf") return ModelKind::RandomForest;
  if (t == "gradient_boosted" || t == "gb" || t == "gbt") return ModelKind::GradientBoosted;
  throw UsageError("unknown model kind '" + std::string(text) + "'");
}

double DecisionTree::leaf_value(std::span<const double> x) const {
  std::int32_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[i].value;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Per-sample sufficient statistics. RF: w = bootstrap count, g = w * y.
// GB: w = 1, g = gradient, h = hessian.
struct Stats {
  double w = 0.0, g = 0.0, h = 0.0;
  Stats& operator+=(const Stats& o) {
    w += o.w;
    g += o.g;
    h += o.h;
    return *this;
  }
  Stats operator-(const Stats& o) const { return {w - o.w, g - o.g, h - o.h}; }
};

struct GrowConfig {
  ModelKind kind;
  std::size_t max_depth;
  double min_leaf;
  double l2;
  double learning_rate;
  std::size_t mtry;
};

class TreeGrower {
 public:
  TreeGrower(const std::vector<double>& cols, std::size_t n, std::size_t d,
             std::vector<std::vector<std::uint32_t>> order, const std::vector<Stats>& stats,
             const GrowConfig& cfg, Rng& rng)
      : cols_(cols), n_(n), d_(d), order_(std::move(order)), stats_(stats), cfg_(cfg), rng_(rng) {
    buffer_.resize(order_.empty() ? 0 : order_[0].size());
    features_.resize(d_);
  }

  DecisionTree grow() {
    Stats total;
    for (auto i : order_[0]) total += stats_[i];
    grow_node(0, order_[0].size(), 0, total);
    return std::move(tree_);
  }

 private:
  double x(std::size_t f, std::uint32_t i) const { return cols_[f * n_ + i]; }

  double score(const Stats& s) const {
    if (cfg_.kind == ModelKind::RandomForest) {
      if (s.w <= 0.0) return 0.0;
      const double neg = s.w - s.g;
      return (s.g * s.g + neg * neg) / s.w;
    }
    return s.g * s.g / (s.h + cfg_.l2);
  }

  double leaf(const Stats& s) const {
    if (cfg_.kind == ModelKind::RandomForest) return s.w > 0.0 ? s.g / s.w : 0.0;
    return -s.g / (s.h + cfg_.l2) * cfg_.learning_rate;
  }

  std::int32_t grow_node(std::size_t lo, std::size_t hi, std::size_t depth, const Stats& total) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{-1, 0.0, -1, -1, leaf(total)});

    if (depth >= cfg_.max_depth || total.w < 2.0 * cfg_.min_leaf) return id;
    if (cfg_.kind == ModelKind::RandomForest && (total.g <= 0.0 || total.g >= total.w)) return id;

    std::size_t n_feat = d_;
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    if (cfg_.mtry < d_) {
      for (std::size_t i = 0; i < cfg_.mtry; ++i) {
        const std::size_t j = i + rng_.index(d_ - i);
        std::swap(features_[i], features_[j]);
      }
      n_feat = cfg_.mtry;
      std::sort(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(n_feat));
    }

    const double parent = score(total);
    double best_gain = 1e-12;
    int best_f = -1;
    double best_thr = 0.0;
    for (std::size_t fi = 0; fi < n_feat; ++fi) {
      const std::size_t f = features_[fi];
      const auto& ord = order_[f];
      Stats left;
      for (std::size_t pos = lo; pos + 1 < hi; ++pos) {
        const std::uint32_t i = ord[pos];
        left += stats_[i];
        const double xi = x(f, i);
        const double xn = x(f, ord[pos + 1]);
        if (xi == xn || left.w < cfg_.min_leaf) continue;
        const Stats right = total - left;
        if (right.w < cfg_.min_leaf) break;
        const double gain = score(left) + score(right) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          double mid = xi + (xn - xi) / 2.0;
          if (!(mid < xn)) mid = xi;
          best_thr = mid;
        }
      }
    }
    if (best_f < 0) return id;

    const auto bf = static_cast<std::size_t>(best_f);
    std::size_t mid = lo;
    Stats left;
    for (std::size_t f = 0; f < d_; ++f) {
      auto& ord = order_[f];
      std::size_t l = lo;
      std::size_t r = 0;
      for (std::size_t pos = lo; pos < hi; ++pos) {
        const std::uint32_t i = ord[pos];
        if (x(bf, i) <= best_thr) {
          ord[l++] = i;
        } else {
          buffer_[r++] = i;
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(r),
                ord.begin() + static_cast<std::ptrdiff_t>(l));
      mid = l;
    }
    for (std::size_t pos = lo; pos < mid; ++pos) left += stats_[order_[0][pos]];
    const Stats right = total - left;

    tree_.nodes[id].feature = best_f;
    tree_.nodes[id].threshold = best_thr;
    const std::int32_t l = grow_node(lo, mid, depth + 1, left);
    const std::int32_t r = grow_node(mid, hi, depth + 1, right);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  const std::vector<double>& cols_;
  std::size_t n_, d_;
  std::vector<std::vector<std::uint32_t>> order_;
  const std::vector<Stats>& stats_;
  GrowConfig cfg_;
  Rng& rng_;
  std::vector<std::uint32_t> buffer_;
  std::vector<std::size_t> features_;
  DecisionTree tree_;
};

std::vector<std::vector<std::uint32_t>> presort(const std::vector<double>& cols, std::size_t n,
                                                std::size_t d) {
  std::vector<std::vector<std::uint32_t>> order(d);
  for (std::size_t f = 0; f < d; ++f) {
    auto& o = order[f];
    o.resize(n);
    std::iota(o.begin(), o.end(), 0u);
    const double* col = cols.data() + f * n;
    std::stable_sort(o.begin(), o.end(), [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
  return order;
}

std::vector<DecisionTree> train_forest(const std::vector<double>& cols, std::size_t n, std::size_t d,
                                       const std::vector<double>& y, const TreeParams& p) {
  const auto base = presort(cols, n, d);
  std::size_t mtry = p.feature_subsample;
  if (mtry == 0) mtry = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(d))));
  mtry = std::clamp<std::size_t>(mtry, 1, d);
  const GrowConfig cfg{ModelKind::RandomForest, p.max_depth, static_cast<double>(p.min_leaf), p.l2,
                       p.learning_rate, mtry};

  std::vector<DecisionTree> trees(p.n_trees);
  auto grow_one = [&](std::size_t t) {
    Rng rng(derive_seed(p.seed, t));
    std::vector<Stats> stats(n);
    for (std::size_t k = 0; k < n; ++k) stats[rng.index(n)].w += 1.0;
    for (std::size_t i = 0; i < n; ++i) stats[i].g = stats[i].w * y[i];
    std::vector<std::vector<std::uint32_t>> order(d);
    for (std::size_t f = 0; f < d; ++f) {
      order[f].reserve(n);
      for (auto i : base[f]) {
        if (stats[i].w > 0.0) order[f].push_back(i);
      }
    }
    TreeGrower grower(cols, n, d, std::move(order), stats, cfg, rng);
    trees[t] = grower.grow();
  };

  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_threads = std::min<std::size_t>(hw, p.n_trees);
  if (n_threads <= 1) {
    for (std::size_t t = 0; t < p.n_trees; ++t) grow_one(t);
    return trees;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (std::size_t w = 0; w < n_threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t t = next++; t < p.n_trees; t = next++) grow_one(t);
    });
  }
  workers.clear();  // joins
  return trees;
}

std::vector<DecisionTree> train_boosted(const std::vector<double>& cols, std::size_t n, std::size_t d,
                                        const std::vector<double>& y, const TreeParams& p) {
  const auto base = presort(cols, n, d);
  const GrowConfig cfg{ModelKind::GradientBoosted, p.max_depth, static_cast<double>(p.min_leaf), p.l2,
                       p.learning_rate, d};
  Rng rng(p.seed);  // unused by GB splits, kept for a uniform grower interface
  std::vector<double> margin(n, 0.0);
  std::vector<Stats> stats(n);
  std::vector<double> row(d);
  std::vector<DecisionTree> trees;
  trees.reserve(p.n_trees);
  for (std::size_t t = 0; t < p.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double prob = sigmoid(margin[i]);
      stats[i] = {1.0, prob - y[i], prob * (1.0 - prob)};
    }
    TreeGrower grower(cols, n, d, base, stats, cfg, rng);
    trees.push_back(grower.grow());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t f = 0; f < d; ++f) row[f] = cols[f * n + i];
      margin[i] += trees.back().leaf_value(row);
    }
  }
  return trees;
}

std::string hex(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double parse_hex(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("model file: bad number '" + std::string(s) + "'");
  }
  return v;
}

constexpr std::string_view kModelMagic = "hgnids-tree-model 1";

}  // namespace

TreeModel::TreeModel(ModelKind kind, FeatureMode mode, std::size_t width, TreeParams params,
                     std::vector<DecisionTree> trees)
    : kind_(kind), mode_(mode), width_(width), params_(params), trees_(std::move(trees)) {}

double TreeModel::predict_proba(std::span<const double> x) const {
  if (x.size() != width_) {
    throw UsageError("feature width mismatch: model expects " + std::to_string(width_) + ", got " +
                     std::to_string(x.size()));
  }
  if (kind_ == ModelKind::GradientBoosted) {
    double margin = 0.0;
    for (const auto& t : trees_) margin += t.leaf_value(x);
    return sigmoid(margin);
  }
  if (trees_.empty()) return 0.5;
  // Summing in sorted order makes the result independent of tree order.
  std::vector<double> leaves;
  leaves.reserve(trees_.size());
  for (const auto& t : trees_) leaves.push_back(t.leaf_value(x));
  std::sort(leaves.begin(), leaves.end());
  double sum = 0.0;
  for (double v : leaves) sum += v;
  return std::clamp(sum / static_cast<double>(trees_.size()), 0.0, 1.0);
}

double TreeModel::predict_proba(const FeatureVector& row) const {
  if (row.mode != mode_) {
    throw UsageError("feature mode mismatch: model is " + std::string(to_string(mode_)) + ", row is " +
                     std::string(to_string(row.mode)));
  }
  return predict_proba(row.values);
}

void TreeModel::save(std::ostream& out) const {
  out << kModelMagic << '\n'
      << "kind " << to_string(kind_) << '\n'
      << "mode " << to_string(mode_) << '\n'
      << "width " << width_ << '\n'
      << "n_trees " << params_.n_trees << '\n'
      << "max_depth " << params_.max_depth << '\n'
      << "min_leaf " << params_.min_leaf << '\n'
      << "learning_rate " << hex(params_.learning_rate) << '\n'
      << "feature_subsample " << params_.feature_subsample << '\n'
      << "l2 " << hex(params_.l2) << '\n'
      << "seed " << params_.seed << '\n'
      << "trees " << trees_.size() << '\n';
  for (const auto& t : trees_) {
    out << "tree " << t.nodes.size() << '\n';
    for (const auto& n : t.nodes) {
      out << n.feature << ' ' << hex(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
          << hex(n.value) << '\n';
    }
  }
  out << "end\n";
}

std::string TreeModel::serialize() const {
  std::ostringstream os;
  save(os);
  return os.str();
}

void TreeModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());
  save(out);
  if (!out) throw DataError("failed writing model file " + path.string());
}

TreeModel TreeModel::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string {
    if (!std::getline(in, line)) throw DataError("model file: unexpected end of input");
    ++line_no;
    return std::string(text::trim(line));
  };
  auto field = [&](std::string_view key) -> std::string {
    const std::string l = next();
    if (l.size() <= key.size() || l.compare(0, key.size(), key) != 0 || l[key.size()] != ' ') {
      throw DataError("model file line " + std::to_string(line_no) + ": expected '" + std::string(key) + "'");
    }
    return l.substr(key.size() + 1);
  };
  auto count = [&](std::string_view key) -> std::size_t {
    const auto v = text::parse_int(field(key));
    if (!v || *v < 0) throw DataError("model file: bad value for " + std::string(key));
    return static_cast<std::size_t>(*v);
  };

  if (next() != kModelMagic) throw DataError("not an hgnids model file (or unsupported version)");
  TreeModel m;
  try {
    m.kind_ = parse_model_kind(field("kind"));
    m.mode_ = parse_feature_mode(field("mode"));
  } catch (const UsageError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  m.width_ = count("width");
  if (m.width_ != feature_width(m.mode_)) throw DataError("model file: width does not match mode");
  m.params_.n_trees = count("n_trees");
  m.params_.max_depth = count("max_depth");
  m.params_.min_leaf = count("min_leaf");
  m.params_.learning_rate = parse_hex(field("learning_rate"));
  m.params_.feature_subsample = count("feature_subsample");
  m.params_.l2 = parse_hex(field("l2"));
  {
    const std::string s = field("seed");
    std::uint64_t seed = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw DataError("model file: bad seed");
    m.params_.seed = seed;
  }
  const std::size_t n_trees = count("trees");
  m.trees_.resize(n_trees);
  for (auto& t : m.trees_) {
    const std::size_t n_nodes = count("tree");
    if (n_nodes == 0) throw DataError("model file: empty tree");
    t.nodes.resize(n_nodes);
    for (auto& node : t.nodes) {
      const std::string node_line = next();
      const auto parts = text::split(node_line, ' ');
      if (parts.size() != 5) throw DataError("model file line " + std::to_string(line_no) + ": bad node");
      const auto f = text::parse_int(parts[0]);
      const auto l = text::parse_int(parts[2]);
      const auto r = text::parse_int(parts[3]);
      if (!f || !l || !r) throw DataError("model file line " + std::to_string(line_no) + ": bad node");
      node.feature = static_cast<std::int32_t>(*f);
      node.threshold = parse_hex(parts[1]);
      node.left = static_cast<std::int32_t>(*l);
      node.right = static_cast<std::int32_t>(*r);
      node.value = parse_hex(parts[4]);
    }
    const auto n = static_cast<std::int64_t>(n_nodes);
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& node = t.nodes[static_cast<std::size_t>(i)];
      if (node.feature < 0) continue;
      if (static_cast<std::size_t>(node.feature) >= m.width_ || node.left <= i || node.right <= i ||
          node.left >= n || node.right >= n) {
        throw DataError("model file: inconsistent tree structure");
      }
    }
  }
  if (next() != "end") throw DataError("model file: missing end marker");
  return m;
}

TreeModel TreeModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model file " + path.string());
  return load(in);
}

TreeModel train(std::span<const FeatureVector> rows, ModelKind kind, const TreeParams& params) {
  if (rows.size() < 2) throw DataError("training needs at least 2 rows");
  const FeatureMode mode = rows.front().mode;
  const std::size_t d = feature_width(mode);
  const std::size_t n = rows.size();
  std::vector<double> cols(n * d);
  std::vector<double> y(n);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i];
    if (r.mode != mode || r.values.size() != d) throw UsageError("training rows mix feature modes");
    for (std::size_t f = 0; f < d; ++f) {
      if (!std::isfinite(r.values[f])) throw DataError("training rows contain non-finite values");
      cols[f * n + i] = r.values[f];
    }
    y[i] = r.label == BinaryLabel::Attack ? 1.0 : 0.0;
    positives += r.label == BinaryLabel::Attack;
  }
  if (positives == 0 || positives == n) throw DataError("training rows contain a single class");
  if (params.max_depth < 1) throw UsageError("max_depth must be at least 1");
  if (params.min_leaf < 1) throw UsageError("min_leaf must be at least 1");
  if (kind == ModelKind::RandomForest && params.n_trees < 1) throw UsageError("n_trees must be at least 1");
  if (kind == ModelKind::GradientBoosted && !(params.learning_rate > 0.0)) {
    throw UsageError("learning_rate must be positive");
  }

  auto trees = kind == ModelKind::RandomForest ? train_forest(cols, n, d, y, params)
                                               : train_boosted(cols, n, d, y, params);
  return TreeModel(kind, mode, d, params, std::move(trees));
}

EvalReport EvalReport::from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.tn = tn;
  r.fn = fn;
  const double TP = static_cast<double>(tp), FP = static_cast<double>(fp);
  const double TN = static_cast<double>(tn), FN = static_cast<double>(fn);
  r.accuracy = ratio(TP + TN, TP + FP + TN + FN);
  r.precision = ratio(TP, TP + FP);
  r.recall = ratio(TP, TP + FN);
  r.f1 = ratio(2.0 * TP, 2.0 * TP + FP + FN);
  r.fnp = ratio(FN, TP + FN);
  return r;
}

bool EvalReport::consistent(double tol) const {
  const EvalReport e = from_counts(tp, fp, tn, fn);
  auto close = [tol](double a, double b) { return std::fabs(a - b) <= tol; };
  return close(e.accuracy, accuracy) && close(e.precision, precision) && close(e.recall, recall) &&
         close(e.f1, f1) && close(e.fnp, fnp);
}

EvalReport& EvalReport::operator+=(const EvalReport& o) {
  *this = from_counts(tp + o.tp, fp + o.fp, tn + o.tn, fn + o.fn);
  return *this;
}

EvalReport evaluate_labels(std::span<const BinaryLabel> truth, std::span<const BinaryLabel> predicted) {
  if (truth.size() != predicted.size()) throw UsageError("label vectors differ in length");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == BinaryLabel::Attack;
    const bool p = predicted[i] == BinaryLabel::Attack;
    if (t && p) ++tp;
    else if (!t && p) ++fp;
    else if (!t && !p) ++tn;
    else ++fn;
  }
  return EvalReport::from_counts(tp, fp, tn, fn);
}

EvalReport evaluate(const TreeModel& model, std::span<const FeatureVector> rows, double threshold) {
  if (rows.empty()) throw DataError("evaluate: no rows");
  std::vector<BinaryLabel> truth, pred;
  truth.reserve(rows.size());
  pred.reserve(rows.size());
  for (const auto& r : rows) {
    truth.push_back(r.label);
    pred.push_back(model.predict_proba(r) >= threshold ? BinaryLabel::Attack : BinaryLabel::Normal);
  }
  return evaluate_labels(truth, pred);
}

}  // namespace hgnids
