#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "hgnids/error.hpp"
#include "hgnids/rng.hpp"
#include "hgnids/tree.hpp"

using namespace hgnids;

namespace {

FeatureVector row(std::vector<double> x, bool attack, FeatureMode mode = FeatureMode::NRF) {
  FeatureVector r;
  r.mode = mode;
  r.values = std::move(x);
  r.label = attack ? BinaryLabel::Attack : BinaryLabel::Normal;
  return r;
}

// Nine-wide rows; the label is x0 + x3 > 1, everything else is noise.
std::vector<FeatureVector> noisy_diagonal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureVector> rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(9);
    for (auto& v : x) v = rng.uniform();
    rows.push_back(row(x, x[0] + x[3] > 1.0));
  }
  return rows;
}

double accuracy(const TreeModel& m, const std::vector<FeatureVector>& rows) {
  std::size_t ok = 0;
  for (const auto& r : rows) ok += (m.predict_proba(r) >= 0.5) == (r.label == BinaryLabel::Attack);
  return static_cast<double>(ok) / static_cast<double>(rows.size());
}

}  // namespace

TEST_CASE("report metrics follow the confusion-matrix formulas") {
  const EvalReport r = EvalReport::from_counts(8, 2, 5, 4);
  CHECK(r.accuracy == doctest::Approx(13.0 / 19.0));
  CHECK(r.precision == doctest::Approx(0.8));
  CHECK(r.recall == doctest::Approx(8.0 / 12.0));
  CHECK(r.f1 == doctest::Approx(2 * 0.8 * (8.0 / 12.0) / (0.8 + 8.0 / 12.0)));
  CHECK(r.fnp == doctest::Approx(4.0 / 12.0));
  CHECK(r.consistent());
  const EvalReport z = EvalReport::from_counts(0, 0, 7, 0);
  CHECK(z.precision == 0.0);
  CHECK(z.recall == 0.0);
  CHECK(z.fnp == 0.0);
  CHECK(z.accuracy == 1.0);
  EvalReport sum = r;
  sum += z;
  CHECK(sum.total() == 26);
  CHECK(sum.consistent());
}

TEST_CASE("evaluate_labels counts") {
  using B = BinaryLabel;
  const std::vector<B> t = {B::Attack, B::Attack, B::Normal, B::Normal, B::Attack};
  const std::vector<B> p = {B::Attack, B::Normal, B::Normal, B::Attack, B::Attack};
  const EvalReport r = evaluate_labels(t, p);
  CHECK(r == EvalReport::from_counts(2, 1, 1, 1));
  CHECK_THROWS(evaluate_labels(t, std::span<const B>(p).first(2)));
}

TEST_CASE("a single stump finds the class boundary") {
  std::vector<FeatureVector> rows;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x(9, 0.0);
    x[4] = i;
    rows.push_back(row(x, i >= 12));
  }
  TreeParams p = TreeParams::random_forest(1);
  p.n_trees = 1;
  p.max_depth = 1;
  p.feature_subsample = 9;
  const TreeModel m = train(rows, ModelKind::RandomForest, p);
  REQUIRE(m.trees().size() == 1);
  const TreeNode& root = m.trees()[0].nodes[0];
  CHECK(root.feature == 4);
  CHECK(root.threshold >= 11.0);
  CHECK(root.threshold < 12.0);
  CHECK(accuracy(m, rows) == 1.0);
}

TEST_CASE("ties go to the lower feature index") {
  std::vector<FeatureVector> rows;
  for (int i = 0; i < 10; ++i) {
    std::vector<double> x(9, 0.0);
    x[2] = x[6] = i;
    rows.push_back(row(x, i >= 5));
  }
  TreeParams p = TreeParams::gradient_boosted(1);
  p.n_trees = 1;
  p.min_leaf = 1;
  const TreeModel m = train(rows, ModelKind::GradientBoosted, p);
  CHECK(m.trees()[0].nodes[0].feature == 2);
}

TEST_CASE("both learners fit a noisy diagonal") {
  const auto tr = noisy_diagonal(1500, 1);
  const auto te = noisy_diagonal(500, 2);
  TreeParams rf = TreeParams::random_forest(3);
  rf.n_trees = 30;
  TreeParams gb = TreeParams::gradient_boosted(3);
  gb.n_trees = 60;
  const TreeModel a = train(tr, ModelKind::RandomForest, rf);
  const TreeModel b = train(tr, ModelKind::GradientBoosted, gb);
  CHECK(accuracy(a, te) > 0.9);
  CHECK(accuracy(b, te) > 0.9);
  for (const auto& r : te) {
    const double pa = a.predict_proba(r), pb = b.predict_proba(r);
    REQUIRE(pa >= 0.0);
    REQUIRE(pa <= 1.0);
    REQUIRE(pb > 0.0);
    REQUIRE(pb < 1.0);
  }
}

TEST_CASE("training is deterministic per seed") {
  const auto tr = noisy_diagonal(400, 5);
  TreeParams p = TreeParams::random_forest(7);
  p.n_trees = 10;
  CHECK(train(tr, ModelKind::RandomForest, p) == train(tr, ModelKind::RandomForest, p));
  TreeParams q = p;
  q.seed = 8;
  CHECK_FALSE(train(tr, ModelKind::RandomForest, p) == train(tr, ModelKind::RandomForest, q));
}

TEST_CASE("serialization is bit exact for both kinds and every mode") {
  for (auto kind : {ModelKind::RandomForest, ModelKind::GradientBoosted}) {
    for (auto mode : {FeatureMode::NRF, FeatureMode::HGI, FeatureMode::HGA}) {
      Rng rng(static_cast<std::uint64_t>(kind) * 10 + static_cast<std::uint64_t>(mode));
      std::vector<FeatureVector> rows;
      for (int i = 0; i < 200; ++i) {
        std::vector<double> x(feature_width(mode));
        for (auto& v : x) v = rng.normal() * 1e6 + 1.0 / 3.0;
        rows.push_back(row(x, x[1] > x[2], mode));
      }
      TreeParams p = TreeParams::defaults(kind, 4);
      p.n_trees = 8;
      const TreeModel m = train(rows, kind, p);
      std::stringstream io;
      m.save(io);
      const TreeModel back = TreeModel::load(io);
      CHECK(back == m);
      CHECK(back.serialize() == m.serialize());
      for (const auto& r : rows) REQUIRE(back.predict_proba(r) == m.predict_proba(r));
    }
  }
}

TEST_CASE("malformed model text is a data error") {
  std::istringstream bad("hgnids-tree-model 1\nnonsense\n");
  CHECK_THROWS_AS(TreeModel::load(bad), DataError);
  std::istringstream wrong("something else\n");
  CHECK_THROWS_AS(TreeModel::load(wrong), DataError);
  CHECK_THROWS_AS(TreeModel::load(std::filesystem::path("/nonexistent/model.txt")), DataError);
}

TEST_CASE("training input checks") {
  std::vector<FeatureVector> one_class = {row(std::vector<double>(9, 0.0), true), row(std::vector<double>(9, 1.0), true)};
  CHECK_THROWS_AS(train(one_class, ModelKind::RandomForest, TreeParams::random_forest()), DataError);
  std::vector<FeatureVector> mixed = {row(std::vector<double>(9, 0.0), true),
                                      row(std::vector<double>(21, 1.0), false, FeatureMode::HGI)};
  CHECK_THROWS(train(mixed, ModelKind::RandomForest, TreeParams::random_forest()));
  const auto rows = noisy_diagonal(50, 1);
  TreeParams p = TreeParams::random_forest();
  p.n_trees = 2;
  const TreeModel m = train(rows, ModelKind::RandomForest, p);
  CHECK_THROWS(m.predict_proba(std::vector<double>(3, 0.0)));
}
