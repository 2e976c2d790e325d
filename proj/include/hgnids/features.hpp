#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hgnids/flow.hpp"
#include "hgnids/hypergraph.hpp"

namespace hgnids {

enum class FeatureMode { NRF, HGI, HGA };

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

/// 9, 21 or 14.
std::size_t feature_width(FeatureMode mode);
/// Column names for a matrix of the given mode.
std::vector<std::string> feature_names(FeatureMode mode);

enum class BinaryLabel { Normal = 0, Attack = 1 };

std::string_view to_string(BinaryLabel label);
inline BinaryLabel binary_label(const ActivityLabel& l) {
  return l.is_attack() ? BinaryLabel::Attack : BinaryLabel::Normal;
}

struct FeatureVector {
  FeatureMode mode = FeatureMode::NRF;
  std::vector<double> values;
  BinaryLabel label = BinaryLabel::Normal;
  std::size_t origin = 0;      // index of the source record
  std::string origin_label;    // original class name, for reporting
};

using WeightVector = std::array<double, kScheduleLength>;

/// Stand-in centralities for non-hacker pairs in full-dataset mode.
inline constexpr WeightVector kNonHackerWeights = {0.2,  0.15, 0.1,   0.05,  0.04, 0.03,
                                                   0.02, 0.01, 0.008, 0.006, 0.005};

using IpPair = std::pair<std::string, std::string>;
using KnownHackerSet = std::set<IpPair>;

struct EdgeProfile {
  std::array<double, kScheduleLength> values{};
  double total = 0.0;
  std::size_t edge_size = 0;
};

/// IP -> centrality profile and hyperedge size. A default-constructed table
/// has no hypergraph behind it (k() == 0) and cannot encode HGI/HGA rows.
class ProfileTable {
 public:
  ProfileTable() = default;

  /// k == 0 picks the skip interval from the hypergraph.
  static ProfileTable from_hypergraph(const Hypergraph& h, unsigned k = 0);
  static ProfileTable from_records(std::span<const FlowRecord> records, unsigned k = 0);

  unsigned k() const { return k_; }
  bool has_hypergraph() const { return k_ > 0; }
  std::size_t size() const { return entries_.size(); }

  const EdgeProfile* find(std::string_view ip) const;

  /// Same k, keeping only the listed IPs.
  ProfileTable restricted_to(const std::set<std::string>& ips) const;

  void insert(std::string ip, const EdgeProfile& profile);
  std::span<const std::pair<std::string, EdgeProfile>> entries() const { return entries_; }

  /// "ip,k,edge_size,c0..c10,total"
  void write_csv(std::ostream& out) const;
  static ProfileTable read_csv(std::istream& in);

 private:
  explicit ProfileTable(unsigned k) : k_(k) {}

  unsigned k_ = 0;
  std::vector<std::pair<std::string, EdgeProfile>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct EncodingContext {
  ProfileTable profiles;
  KnownHackerSet hackers;
  std::optional<WeightVector> weights;
};

/// Element-wise max of the source and destination IP profiles; unseen IPs
/// contribute zeros.
CentralityProfile record_profile(const FlowRecord& rec, const ProfileTable& profiles);

FeatureVector encode(const FlowRecord& rec, FeatureMode mode, const EncodingContext& ctx,
                     std::size_t origin = 0);

std::vector<FeatureVector> build_matrix(std::span<const FlowRecord> records, FeatureMode mode,
                                        const EncodingContext& ctx);

/// Convenience form building the profile table from h with the default
/// skip interval.
std::vector<FeatureVector> build_matrix(const Dataset& d, const Hypergraph& h, FeatureMode mode,
                                        const KnownHackerSet& hackers,
                                        const std::optional<WeightVector>& weights);

/// Stratified, seeded split. Returns (train, test) indices, each sorted.
/// The train part has round(frac * n) rows, allocated across classes by
/// largest remainder.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split_indices(
    std::span<const BinaryLabel> labels, double frac, std::uint64_t seed);

std::pair<std::vector<FeatureVector>, std::vector<FeatureVector>> train_test_split(
    std::span<const FeatureVector> rows, double frac, std::uint64_t seed);

void write_matrix_csv(std::span<const FeatureVector> rows, std::ostream& out);

}  // namespace hgnids
