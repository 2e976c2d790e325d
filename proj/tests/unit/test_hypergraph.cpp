#include <set>
#include <sstream>

#include "doctest.h"
#include "fig2_fixture.hpp"
#include "hgnids/error.hpp"
#include "hgnids/hypergraph.hpp"
#include "hypergraph_oracle.hpp"

using namespace hgnids;

namespace {

Hypergraph from_oracle(const oracle::Edges& edges) {
  std::vector<std::pair<std::string, std::vector<Port>>> named;
  for (std::size_t i = 0; i < edges.size(); ++i) named.emplace_back("e" + std::to_string(i), edges[i]);
  return Hypergraph::from_edges(named);
}

EdgeId id(std::size_t i) { return EdgeId{static_cast<std::uint32_t>(i)}; }

}  // namespace

TEST_CASE("builder assigns roles and collects destination ports on both endpoints") {
  HypergraphBuilder b;
  b.add("a", "b", 80);
  b.add("a", "c", 443);
  b.add("c", "a", 22);
  const Hypergraph h = b.build();
  REQUIRE(h.edge_count() == 3);
  CHECK(h.edge(h.require("a")).role == EdgeRole::Both);
  CHECK(h.edge(h.require("b")).role == EdgeRole::Dest);
  CHECK(h.edge(h.require("c")).role == EdgeRole::Both);
  CHECK(h.edge(h.require("a")).ports == std::vector<Port>{22, 80, 443});
  CHECK(h.edge(h.require("b")).ports == std::vector<Port>{80});
  CHECK(h.vertex_count() == 3);
  CHECK(h.max_edge_size() == 3);
  CHECK_FALSE(h.find("zzz").has_value());
  CHECK_THROWS_AS(h.require("zzz"), UsageError);
}

TEST_CASE("from_edges rejects empty and repeated edges") {
  CHECK_THROWS_AS(Hypergraph::from_edges({{"a", {}}}), UsageError);
  CHECK_THROWS_AS(Hypergraph::from_edges({{"a", {1}}, {"a", {2}}}), UsageError);
  const Hypergraph h = Hypergraph::from_edges({{"a", {3, 1, 3}}});
  CHECK(h.edge(id(0)).ports == std::vector<Port>{1, 3});
}

TEST_CASE("s-metrics agree with exhaustive path enumeration on small graphs") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto edges = oracle::random_edges(derive_seed(seed, 99), 7, 10);
    const Hypergraph h = from_oracle(edges);
    for (unsigned s : {1u, 2u, 3u}) {
      for (std::size_t i = 0; i < edges.size(); ++i) {
        for (std::size_t j = 0; j < edges.size(); ++j) {
          CHECK(s_distance(h, id(i), id(j), s) == oracle::distance_by_paths(edges, i, j, s));
        }
      }
    }
  }
}

TEST_CASE("s-metrics agree with Floyd-Warshall and Warshall closure") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto edges = oracle::random_edges(seed);
    const Hypergraph h = from_oracle(edges);
    const SOverlapGraph g(h);
    for (unsigned s : {1u, 2u, 3u, 5u}) {
      const auto d = oracle::floyd_warshall(edges, s);
      const auto reach = oracle::warshall_closure(edges, s);
      const SComponentMap comps = s_components(h, s);
      std::set<std::uint32_t> ids(comps.assignment.begin(), comps.assignment.end());
      CHECK(ids.size() == comps.component_count);
      for (std::size_t i = 0; i < edges.size(); ++i) {
        CHECK(g.closeness(id(i), s) == doctest::Approx(oracle::closeness(edges, i, s)).epsilon(1e-15));
        for (std::size_t j = 0; j < edges.size(); ++j) {
          const auto got = g.distance(id(i), id(j), s);
          CHECK(got.has_value() == (d[i][j] != oracle::kInf));
          if (got) CHECK(*got == d[i][j]);
          CHECK((comps.component_of(id(i)) == comps.component_of(id(j))) == reach[i][j]);
        }
      }
    }
  }
}

TEST_CASE("component ids follow the lowest edge id") {
  const Hypergraph h = Hypergraph::from_edges({{"a", {1}}, {"b", {9}}, {"c", {1, 2}}, {"d", {9, 8}}});
  const SComponentMap c = s_components(h, 1);
  CHECK(c.assignment == std::vector<std::uint32_t>{0, 1, 0, 1});
  CHECK(c.component_count == 2);
}

TEST_CASE("closeness conventions: isolates and undersized edges score zero") {
  const Hypergraph h = Hypergraph::from_edges({{"a", {1, 2, 3}}, {"b", {1, 2, 3}}, {"c", {7}}});
  CHECK(s_closeness_centrality(h, h.require("c"), 1) == 0.0);
  CHECK(s_closeness_centrality(h, h.require("a"), 3) == 1.0);
  CHECK(s_closeness_centrality(h, h.require("a"), 4) == 0.0);
  CHECK(s_distance(h, h.require("a"), h.require("a"), 9) == std::optional<std::size_t>{0});
}

TEST_CASE("a path graph has the textbook closeness values") {
  // a - b - c chain at s = 1
  const Hypergraph h = Hypergraph::from_edges({{"a", {1}}, {"b", {1, 2}}, {"c", {2}}});
  CHECK(s_closeness_centrality(h, h.require("b"), 1) == doctest::Approx(1.0));
  CHECK(s_closeness_centrality(h, h.require("a"), 1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("two concentric edges score one up to their overlap") {
  for (unsigned m : {3u, 10u, 40u}) {
    std::vector<Port> shared(m);
    for (unsigned i = 0; i < m; ++i) shared[i] = static_cast<Port>(100 + i);
    auto big = shared;
    big.push_back(9);
    const Hypergraph h = Hypergraph::from_edges({{"src", shared}, {"dst", big}, {"other", {9, 100}}});
    for (unsigned s = 3; s <= m + 2; ++s) {
      const double want = s <= m ? 1.0 : 0.0;
      CHECK(s_closeness_centrality(h, h.require("src"), s) == want);
      CHECK(s_closeness_centrality(h, h.require("dst"), s) == want);
    }
  }
}

TEST_CASE("schedules and skip intervals") {
  CHECK(s_schedule(1) == Schedule{3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13});
  CHECK(s_schedule(70).back() == 703);
  // round((0.7 D - 3) / 10), floor((D - 3) / 10), both at least one
  CHECK(feature_skip_interval(std::size_t{1000}) == 70);
  CHECK(feature_skip_interval(std::size_t{26}) == 2);
  CHECK(feature_skip_interval(std::size_t{5}) == 1);
  CHECK(detector_skip_interval(1000) == 99);
  CHECK(detector_skip_interval(26) == 2);
  CHECK(detector_skip_interval(3) == 1);
  CHECK_THROWS_AS(feature_skip_interval(Hypergraph{}), DataError);
}

TEST_CASE("profiles match single-s closeness and batch profiles") {
  const auto edges = oracle::random_edges(7, 12, 20);
  const Hypergraph h = from_oracle(edges);
  const SOverlapGraph g(h);
  const auto all = g.all_profiles(1);
  REQUIRE(all.size() == edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const CentralityProfile p = centrality_profile(h, id(i), 1);
    double sum = 0.0;
    for (std::size_t n = 0; n < kScheduleLength; ++n) {
      CHECK(p.values[n] == doctest::Approx(oracle::closeness(edges, i, p.schedule[n])).epsilon(1e-15));
      CHECK(all[i].values[n] == p.values[n]);
      sum += p.values[n];
    }
    CHECK(p.total == doctest::Approx(sum));
  }
}

TEST_CASE("small published example has 15 edges and 34 vertices") {
  const auto recs = fixture::fig2_records();
  REQUIRE(recs.size() == 43);
  const Hypergraph h = build_hypergraph(recs);
  CHECK(h.edge_count() == 15);
  CHECK(h.vertex_count() == 34);
  CHECK(h.edge(h.require("173.194.208.155")).ports == std::vector<Port>{35066});
  // the scanning pair is the only 26-port overlap
  const auto src = h.require(fixture::kScanSrc), dst = h.require(fixture::kScanDst);
  CHECK(s_closeness_centrality(h, src, 26) == 1.0);
  CHECK(s_closeness_centrality(h, dst, 26) == 1.0);
  CHECK(s_closeness_centrality(h, src, 27) == 0.0);
}

TEST_CASE("incidence dump lists one line per (edge, port)") {
  const Hypergraph h = Hypergraph::from_edges({{"a", {1, 2}}, {"b", {2}}});
  std::ostringstream os;
  write_incidence_csv(h, os);
  std::istringstream in(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 4);  // header + 3 incidences
}
