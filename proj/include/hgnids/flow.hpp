#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hgnids {

enum class LabelKind { Benign, PortScan, OtherAttack };

std::string_view to_string(LabelKind kind);

/// The thirteen non-scan attack classes of the full CIC-IDS2017 release.
inline constexpr std::array<std::string_view, 13> kOtherAttackClasses = {
    "DoS Hulk",     "DoS GoldenEye",         "DoS slowloris",         "DoS Slowhttptest",
    "DDoS",         "FTP-Patator",           "SSH-Patator",           "Bot",
    "Web Attack - Brute Force", "Web Attack - XSS", "Web Attack - Sql Injection",
    "Infiltration", "Heartbleed"};

struct ActivityLabel {
  LabelKind kind = LabelKind::Benign;
  std::string name;  // original class name; empty for the two named kinds

  static ActivityLabel benign() { return {LabelKind::Benign, {}}; }
  static ActivityLabel port_scan() { return {LabelKind::PortScan, {}}; }
  static ActivityLabel other(std::string name) { return {LabelKind::OtherAttack, std::move(name)}; }

  /// "BENIGN" and "PortScan" (plus a few spellings) map to the named kinds;
  /// anything else is an OtherAttack carrying the trimmed text.
  static ActivityLabel parse(std::string_view text);

  bool is_attack() const { return kind != LabelKind::Benign; }
  std::string to_string() const;

  bool operator==(const ActivityLabel&) const = default;
};

/// One labeled flow. The eight numeric fields plus protocol make up the raw
/// feature set; src_port is carried along but never used as a feature.
struct FlowRecord {
  std::string src_ip;
  std::string dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  int protocol = 6;  // 0 (IPv6 hop-by-hop), 6 (TCP) or 17 (UDP)
  double flow_duration = 0.0;  // microseconds
  double tot_fwd_pkts = 0.0;
  double tot_bwd_pkts = 0.0;
  double tot_fwd_bytes = 0.0;
  double tot_bwd_bytes = 0.0;
  double flow_bytes_per_s = 0.0;
  double flow_pkts_per_s = 0.0;
  double down_up_ratio = 0.0;
  ActivityLabel label;

  bool operator==(const FlowRecord&) const = default;
};

inline constexpr std::size_t kNrfWidth = 9;

/// [protocol, duration, fwd_pkts, bwd_pkts, fwd_bytes, bwd_bytes, bytes/s,
/// pkts/s, down/up ratio]
std::array<double, kNrfWidth> nrf_values(const FlowRecord& rec);

/// Writes NRF values back into a record (protocol is rounded to an integer).
void set_nrf_values(FlowRecord& rec, const std::array<double, kNrfWidth>& values);

bool is_valid_protocol(int protocol);

enum class Provenance { Ingested, Synthetic };

struct Dataset {
  std::vector<FlowRecord> records;
  Provenance provenance = Provenance::Synthetic;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// Logical field -> CSV header name. Header matching ignores surrounding
/// whitespace, since the public files pad some names with a leading space.
struct ColumnMap {
  std::string src_ip = "Source IP";
  std::string dst_ip = "Destination IP";
  std::string src_port = "Source Port";
  std::string dst_port = "Destination Port";
  std::string protocol = "Protocol";
  std::string flow_duration = "Flow Duration";
  std::string tot_fwd_pkts = "Total Fwd Packets";
  std::string tot_bwd_pkts = "Total Backward Packets";
  std::string tot_fwd_bytes = "Total Length of Fwd Packets";
  std::string tot_bwd_bytes = "Total Length of Bwd Packets";
  std::string flow_bytes_per_s = "Flow Bytes/s";
  std::string flow_pkts_per_s = "Flow Packets/s";
  std::string down_up_ratio = "Down/Up Ratio";
  std::string label = "Label";

  /// Canonical CIC-IDS2017 header names.
  static ColumnMap cic_ids2017() { return {}; }

  /// Reads `field = Header Name` lines ('#' comments allowed) on top of the
  /// canonical map. Unknown field names are a UsageError.
  static ColumnMap from_file(const std::filesystem::path& path);

  /// (field key, header name) for every field, in CSV output order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  void set(std::string_view field, std::string header);
};

struct CleaningReport {
  std::size_t rows_read = 0;
  std::size_t kept = 0;
  std::size_t negative_duration = 0;
  std::size_t missing_value = 0;
  std::size_t non_finite = 0;
  std::size_t unparseable = 0;
  /// First few unparseable-row diagnostics ("line N: reason").
  std::vector<std::string> messages;

  std::size_t dropped() const {
    return negative_duration + missing_value + non_finite + unparseable;
  }
  std::string to_text() const;
  std::string to_csv() const;
  bool operator==(const CleaningReport&) const = default;
};

struct IngestResult {
  Dataset dataset;
  CleaningReport report;
};

/// Streams a CIC-IDS2017-style CSV, dropping rows with negative duration or
/// missing / non-finite values in any raw feature. Each dropped row counts
/// under exactly one reason (unparseable > missing > non-finite > negative).
IngestResult ingest_csv(const std::filesystem::path& path, const ColumnMap& columns = {});
IngestResult ingest_csv(std::istream& in, const ColumnMap& columns = {});

/// Writes records in the canonical schema readable by ingest_csv.
void write_csv(const Dataset& dataset, std::ostream& out);
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Fraction of records per label kind. Fractions sum to 1.
std::map<LabelKind, double> class_balance(const Dataset& dataset);

struct SynthProfile {
  enum class Kind { PortScan, Benign, Mixed };
  Kind kind = Kind::Benign;
  double attack_frac = 0.0;  // Mixed only

  static SynthProfile port_scan() { return {Kind::PortScan, 1.0}; }
  static SynthProfile benign() { return {Kind::Benign, 0.0}; }
  static SynthProfile mixed(double attack_frac) { return {Kind::Mixed, attack_frac}; }
};

/// Knobs of the synthetic benign/scan traffic shape.
struct SynthOptions {
  unsigned scan_port_span = 1000;   // contiguous ports swept per scanning pair
  unsigned scan_base_max = 1024;    // sweep start drawn from [1, scan_base_max]
  unsigned benign_clients = 40;
  unsigned benign_servers = 25;
  double ephemeral_port_prob = 0.03;
};

using IpPairList = std::vector<std::pair<std::string, std::string>>;

/// Statistics-matched synthetic traffic. Numeric features are log-normal
/// draws moment-matched to the published per-class mean and standard
/// deviation, clipped to [0, published max]. Scan records sweep a contiguous
/// dst_port range per pair; benign records hit a small popular-port set.
Dataset synth_traffic(const SynthProfile& profile, std::size_t count, const IpPairList& ip_pairs,
                      std::uint64_t seed, const SynthOptions& options = {});

/// Reassigns scan records round-robin over n_pairs pairs: slot 0 keeps each
/// record's original endpoints, slots 1..n-1 get fresh synthetic pairs.
/// Feature values, ports and labels are untouched.
Dataset remap_ip_pairs(const Dataset& dataset, std::size_t n_pairs, std::uint64_t seed);

}  // namespace hgnids
