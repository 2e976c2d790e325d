#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hgnids/error.hpp"
#include "hgnids/flow.hpp"
#include "hgnids/rng.hpp"
#include "hgnids/text.hpp"

using namespace hgnids;

namespace {

const std::string kHeader =
    "Source IP, Source Port, Destination IP, Destination Port, Protocol, Flow Duration, Total Fwd Packets, "
    "Total Backward Packets,Total Length of Fwd Packets, Total Length of Bwd Packets,Flow Bytes/s, Flow "
    "Packets/s, Down/Up Ratio, Label\n";

std::string row(std::string_view duration, std::string_view bytes_per_s = "10", std::string_view label = "BENIGN") {
  return "10.0.0.1,5000,10.0.0.2,80,6," + std::string(duration) + ",1,1,0,0," + std::string(bytes_per_s) +
         ",2,1," + std::string(label) + "\n";
}

}  // namespace

TEST_CASE("text helpers") {
  CHECK(text::split("a,,b", ',').size() == 3);
  CHECK(text::split("", ',').size() == 1);
  CHECK(text::trim("  x \t") == "x");
  CHECK(text::parse_double("1e3") == 1000.0);
  CHECK(std::isinf(*text::parse_double("Infinity")));
  CHECK(std::isnan(*text::parse_double("NaN")));
  CHECK_FALSE(text::parse_double("12abc").has_value());
  CHECK_FALSE(text::parse_double("").has_value());
  CHECK(text::parse_int("-7") == -7);
  CHECK_FALSE(text::parse_int("7.5").has_value());
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
    CHECK(*text::parse_double(text::format_double(v)) == v);
  }
}

TEST_CASE("seeded random source") {
  Rng a(5), b(5), c(6);
  CHECK(a.next() == b.next());
  CHECK(a.next() != c.next());
  CHECK(derive_seed(1, 1) != derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
  Rng r(1);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += r.normal();
  }
  CHECK(std::abs(sum / 20000.0) < 0.05);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  r.shuffle(std::span<int>(v));
  CHECK(std::set<int>(v.begin(), v.end()).size() == 50);
}

TEST_CASE("labels parse into three kinds") {
  CHECK(ActivityLabel::parse(" BENIGN ").kind == LabelKind::Benign);
  CHECK(ActivityLabel::parse("PortScan").kind == LabelKind::PortScan);
  const auto other = ActivityLabel::parse("DoS Hulk");
  CHECK(other.kind == LabelKind::OtherAttack);
  CHECK(other.is_attack());
  CHECK(other.to_string() == "DoS Hulk");
}

TEST_CASE("ingest drops each bad row under exactly one reason") {
  std::string csv = kHeader;
  csv += row("100");                 // kept
  csv += row("-1");                  // negative duration
  csv += row("");                    // missing
  csv += row("100", "Infinity");     // non-finite
  csv += row("100", "NaN");          // NaN counts as missing
  csv += row("abc");                 // unparseable
  csv += row("-1", "Infinity");      // non-finite beats negative
  csv += "10.0.0.1,5000\n";          // too few fields
  csv += row("5", "1", "PortScan");  // kept
  std::istringstream in(csv);
  const IngestResult r = ingest_csv(in);
  CHECK(r.report.rows_read == 9);
  CHECK(r.report.kept == 2);
  CHECK(r.report.negative_duration == 1);
  CHECK(r.report.missing_value == 2);
  CHECK(r.report.non_finite == 2);
  CHECK(r.report.unparseable == 2);
  CHECK(r.report.kept + r.report.dropped() == r.report.rows_read);
  CHECK(r.dataset.records[1].label.kind == LabelKind::PortScan);
  CHECK(r.dataset.provenance == Provenance::Ingested);
}

TEST_CASE("ingest rejects a header without required columns") {
  std::istringstream in("Source IP,Label\n1,BENIGN\n");
  CHECK_THROWS_AS(ingest_csv(in), DataError);
  std::istringstream empty("");
  CHECK_THROWS_AS(ingest_csv(empty), DataError);
}

TEST_CASE("column map overrides") {
  const auto dir = std::filesystem::temp_directory_path() / "hgnids_colmap_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "map.txt");
    f << "# renamed label\nlabel = Class\n";
  }
  const ColumnMap m = ColumnMap::from_file(dir / "map.txt");
  CHECK(m.label == "Class");
  CHECK(m.src_ip == "Source IP");
  {
    std::ofstream f(dir / "bad.txt");
    f << "colour = red\n";
  }
  CHECK_THROWS_AS(ColumnMap::from_file(dir / "bad.txt"), UsageError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("write then ingest is lossless") {
  Dataset d = synth_traffic(SynthProfile::mixed(0.5), 300, {{"1.2.3.4", "5.6.7.8"}}, 11);
  d.records[0].label = ActivityLabel::other("Web Attack, \"XSS\"");
  std::stringstream io;
  write_csv(d, io);
  const IngestResult r = ingest_csv(io);
  REQUIRE(r.report.kept == d.size());
  CHECK(r.dataset.records == d.records);
}

TEST_CASE("synthetic traffic shape") {
  const IpPairList pairs = {{"1.1.1.1", "2.2.2.2"}, {"3.3.3.3", "4.4.4.4"}};
  const Dataset d = synth_traffic(SynthProfile::mixed(0.555), 2000, pairs, 3);
  CHECK(d.size() == 2000);
  CHECK(class_balance(d).at(LabelKind::PortScan) == doctest::Approx(0.555));
  double total = 0.0;
  for (const auto& [k, v] : class_balance(d)) total += v;
  CHECK(total == doctest::Approx(1.0));
  for (const auto& r : d.records) {
    REQUIRE(is_valid_protocol(r.protocol));
    REQUIRE(r.flow_duration >= 0.0);
    REQUIRE(r.tot_fwd_pkts >= 1.0);
    if (r.label.kind == LabelKind::PortScan) {
      REQUIRE(((r.src_ip == "1.1.1.1" && r.dst_ip == "2.2.2.2") || (r.src_ip == "3.3.3.3" && r.dst_ip == "4.4.4.4")));
    }
  }
  CHECK(synth_traffic(SynthProfile::mixed(0.555), 2000, pairs, 3).records == d.records);
  CHECK(synth_traffic(SynthProfile::mixed(0.555), 2000, pairs, 4).records != d.records);
  CHECK_THROWS_AS(synth_traffic(SynthProfile::port_scan(), 10, {}, 1), UsageError);
  CHECK_THROWS_AS(synth_traffic(SynthProfile::mixed(1.5), 10, pairs, 1), UsageError);
}

TEST_CASE("remap spreads scans round-robin and leaves everything else alone") {
  const Dataset d = synth_traffic(SynthProfile::mixed(0.5), 1000, {{"1.1.1.1", "2.2.2.2"}}, 8);
  const Dataset m = remap_ip_pairs(d, 16, 1);
  REQUIRE(m.size() == d.size());
  std::set<std::pair<std::string, std::string>> pairs;
  std::size_t j = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& a = d.records[i];
    const auto& b = m.records[i];
    CHECK(nrf_values(a) == nrf_values(b));
    CHECK(a.dst_port == b.dst_port);
    CHECK(a.label == b.label);
    if (a.label.kind == LabelKind::PortScan) {
      pairs.insert({b.src_ip, b.dst_ip});
      if (j++ % 16 == 0) CHECK((b.src_ip == a.src_ip && b.dst_ip == a.dst_ip));
    } else {
      CHECK((b.src_ip == a.src_ip && b.dst_ip == a.dst_ip));
    }
  }
  CHECK(pairs.size() == 16);
  CHECK_THROWS_AS(remap_ip_pairs(d, 0, 1), UsageError);
  const Dataset benign = synth_traffic(SynthProfile::benign(), 10, {}, 1);
  CHECK_THROWS_AS(remap_ip_pairs(benign, 4, 1), DataError);
}
