#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fig2_fixture.hpp"
#include "hgnids/error.hpp"
#include "hgnids/features.hpp"
#include "hypergraph_oracle.hpp"

using namespace hgnids;

TEST_CASE("feature widths and names") {
  CHECK(feature_width(FeatureMode::NRF) == 9);
  CHECK(feature_width(FeatureMode::HGI) == 21);
  CHECK(feature_width(FeatureMode::HGA) == 14);
  for (auto m : {FeatureMode::NRF, FeatureMode::HGI, FeatureMode::HGA}) {
    const auto names = feature_names(m);
    CHECK(names.size() == feature_width(m));
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
    CHECK(parse_feature_mode(to_string(m)) == m);
  }
  CHECK(parse_feature_mode("hgi") == FeatureMode::HGI);
  CHECK_THROWS_AS(parse_feature_mode("xyz"), UsageError);
}

TEST_CASE("record profile is the element-wise max of both endpoints") {
  const auto recs = fixture::fig2_records();
  const Hypergraph h = build_hypergraph(recs);
  const ProfileTable t = ProfileTable::from_hypergraph(h, 1);
  oracle::Edges edges;
  for (const auto& e : h.edges()) edges.push_back(e.ports);
  for (const auto& r : recs) {
    const CentralityProfile p = record_profile(r, t);
    const auto si = h.require(r.src_ip).value, di = h.require(r.dst_ip).value;
    for (std::size_t n = 0; n < kScheduleLength; ++n) {
      const double want = std::max(oracle::closeness(edges, si, p.schedule[n]), oracle::closeness(edges, di, p.schedule[n]));
      CHECK(p.values[n] == doctest::Approx(want).epsilon(1e-15));
    }
  }
  FlowRecord stranger = recs.front();
  stranger.src_ip = "0.0.0.1";
  stranger.dst_ip = "0.0.0.2";
  CHECK(record_profile(stranger, t).total == 0.0);
}

TEST_CASE("encoding layouts") {
  const auto recs = fixture::fig2_records();
  EncodingContext ctx;
  ctx.profiles = ProfileTable::from_records(recs);
  ctx.hackers = {{fixture::kScanSrc, fixture::kScanDst}};
  const FlowRecord& scan = recs.front();
  const FlowRecord& benign = recs.back();

  const FeatureVector nrf = encode(scan, FeatureMode::NRF, ctx);
  const auto raw = nrf_values(scan);
  CHECK(nrf.values == std::vector<double>(raw.begin(), raw.end()));
  CHECK(nrf.label == BinaryLabel::Attack);

  const FeatureVector hgi = encode(scan, FeatureMode::HGI, ctx);
  const CentralityProfile p = record_profile(scan, ctx.profiles);
  REQUIRE(hgi.values.size() == 21);
  for (std::size_t n = 0; n < kScheduleLength; ++n) CHECK(hgi.values[9 + n] == p.values[n]);
  CHECK(hgi.values[20] == doctest::Approx(p.total));

  const FeatureVector hga = encode(scan, FeatureMode::HGA, ctx);
  REQUIRE(hga.values.size() == 14);
  CHECK(hga.values[9] == p.values.back());
  CHECK(hga.values[11] == 26);
  CHECK(hga.values[12] == 26);
  CHECK(hga.values[13] == 52);

  // Weights stand in only for pairs that are not known hackers.
  ctx.weights = kNonHackerWeights;
  CHECK(encode(scan, FeatureMode::HGI, ctx).values == hgi.values);
  const FeatureVector w = encode(benign, FeatureMode::HGI, ctx);
  for (std::size_t n = 0; n < kScheduleLength; ++n) CHECK(w.values[9 + n] == kNonHackerWeights[n]);

  EncodingContext empty;
  CHECK_THROWS_AS(encode(scan, FeatureMode::HGI, empty), DataError);
  CHECK_NOTHROW(encode(scan, FeatureMode::NRF, empty));
}

TEST_CASE("profile table csv round trip and restriction") {
  const ProfileTable t = ProfileTable::from_records(fixture::fig2_records());
  std::stringstream io;
  t.write_csv(io);
  const ProfileTable back = ProfileTable::read_csv(io);
  CHECK(back.k() == t.k());
  REQUIRE(back.size() == t.size());
  for (const auto& [ip, prof] : t.entries()) {
    const EdgeProfile* q = back.find(ip);
    REQUIRE(q != nullptr);
    CHECK(q->values == prof.values);
    CHECK(q->edge_size == prof.edge_size);
  }
  const ProfileTable r = t.restricted_to({fixture::kScanSrc});
  CHECK(r.size() == 1);
  CHECK(r.k() == t.k());
  CHECK(r.find(fixture::kScanDst) == nullptr);
}

TEST_CASE("stratified split sizes, class shares and determinism") {
  std::vector<BinaryLabel> labels;
  for (int i = 0; i < 555; ++i) labels.push_back(BinaryLabel::Attack);
  for (int i = 0; i < 445; ++i) labels.push_back(BinaryLabel::Normal);
  const auto [tr, te] = stratified_split_indices(labels, 0.8, 9);
  CHECK(tr.size() == 800);
  CHECK(te.size() == 200);
  CHECK(std::is_sorted(tr.begin(), tr.end()));
  std::set<std::size_t> all(tr.begin(), tr.end());
  all.insert(te.begin(), te.end());
  CHECK(all.size() == 1000);
  const auto attacks = std::count_if(tr.begin(), tr.end(), [&](std::size_t i) { return labels[i] == BinaryLabel::Attack; });
  CHECK(attacks == 444);  // 0.8 * 555 = 444
  CHECK(stratified_split_indices(labels, 0.8, 9).first == tr);
  CHECK(stratified_split_indices(labels, 0.8, 10).first != tr);
}

TEST_CASE("largest remainder allocation") {
  // 3 attacks, 4 normal, frac 0.5: 3.5 rows -> round to 4; shares 1.5 and 2.0.
  std::vector<BinaryLabel> labels = {BinaryLabel::Attack, BinaryLabel::Attack, BinaryLabel::Attack,
                                     BinaryLabel::Normal, BinaryLabel::Normal, BinaryLabel::Normal,
                                     BinaryLabel::Normal};
  const auto [tr, te] = stratified_split_indices(labels, 0.5, 1);
  CHECK(tr.size() == 4);
  const auto attacks = std::count_if(tr.begin(), tr.end(), [&](std::size_t i) { return i < 3; });
  CHECK(attacks == 2);
}

TEST_CASE("matrix csv refuses mixed modes") {
  const auto recs = fixture::fig2_records();
  EncodingContext ctx;
  ctx.profiles = ProfileTable::from_records(recs);
  std::vector<FeatureVector> rows = build_matrix(recs, FeatureMode::NRF, ctx);
  std::ostringstream ok;
  write_matrix_csv(rows, ok);
  CHECK(ok.str().rfind("protocol,", 0) == 0);
  rows.push_back(encode(recs[0], FeatureMode::HGI, ctx));
  std::ostringstream bad;
  CHECK_THROWS_AS(write_matrix_csv(rows, bad), UsageError);
}
