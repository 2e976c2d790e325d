#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hgnids/flow.hpp"

namespace hgnids {

using Port = std::uint16_t;

/// Index of a hyperedge inside one Hypergraph.
struct EdgeId {
  std::uint32_t value = 0;
  auto operator<=>(const EdgeId&) const = default;
};

enum class EdgeRole { Source, Dest, Both };

std::string_view to_string(EdgeRole role);

/// IP/port hypergraph: every distinct IP (source or destination) is one
/// hyperedge whose vertices are the destination ports seen with it. Edges
/// keep first-appearance order; vertices are sorted.
class Hypergraph {
 public:
  struct Edge {
    std::string ip;
    EdgeRole role = EdgeRole::Source;
    std::vector<Port> ports;  // sorted, unique, non-empty
  };

  Hypergraph() = default;

  /// Builds directly from (ip, ports) lists. Ports are sorted and
  /// deduplicated; an empty port list or a repeated ip is a UsageError.
  static Hypergraph from_edges(const std::vector<std::pair<std::string, std::vector<Port>>>& edges);

  std::size_t edge_count() const { return edges_.size(); }
  std::size_t vertex_count() const { return vertices_.size(); }
  bool empty() const { return edges_.empty(); }

  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(EdgeId id) const { return edges_.at(id.value); }
  std::size_t edge_size(EdgeId id) const { return edges_.at(id.value).ports.size(); }
  std::span<const Port> vertices() const { return vertices_; }

  std::optional<EdgeId> find(std::string_view ip) const;
  /// Like find, but throws UsageError for an unknown ip.
  EdgeId require(std::string_view ip) const;

  std::size_t max_edge_size() const;

 private:
  friend class HypergraphBuilder;
  std::vector<Edge> edges_;
  std::vector<Port> vertices_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Incremental construction; each added flow puts its dst_port into both
/// the source-IP edge and the destination-IP edge.
class HypergraphBuilder {
 public:
  void add(const FlowRecord& rec) { add(rec.src_ip, rec.dst_ip, rec.dst_port); }
  void add(std::string_view src_ip, std::string_view dst_ip, Port dst_port);
  void add_all(std::span<const FlowRecord> records);

  Hypergraph build() const;

 private:
  std::uint32_t touch(std::string_view ip, EdgeRole role);

  std::vector<std::string> ips_;
  std::vector<EdgeRole> roles_;
  std::vector<std::vector<Port>> ports_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

Hypergraph build_hypergraph(std::span<const FlowRecord> records);
inline Hypergraph build_hypergraph(const Dataset& d) { return build_hypergraph(d.records); }

/// Hyperedge -> component id for one s. Ids are dense, assigned in order of
/// each component's lowest edge id.
struct SComponentMap {
  unsigned s = 1;
  std::vector<std::uint32_t> assignment;  // indexed by EdgeId::value
  std::size_t component_count = 0;

  std::uint32_t component_of(EdgeId e) const { return assignment.at(e.value); }
};

inline constexpr std::size_t kScheduleLength = 11;
using Schedule = std::array<unsigned, kScheduleLength>;

/// s = 3 + n*k for n = 0..10.
Schedule s_schedule(unsigned k);

/// Eleven scheduled s-closeness centralities of one hyperedge and their sum.
struct CentralityProfile {
  std::string edge;
  unsigned k = 1;
  Schedule schedule{};
  std::array<double, kScheduleLength> values{};
  double total = 0.0;
};

/// Pairwise overlap structure of a hypergraph, computed once and reused for
/// every s. For each edge, lists the edges sharing at least one vertex with
/// it and the size of the intersection.
class SOverlapGraph {
 public:
  struct Neighbor {
    std::uint32_t edge;
    std::uint32_t overlap;
  };

  explicit SOverlapGraph(const Hypergraph& h);

  const Hypergraph& hypergraph() const { return *h_; }
  std::span<const Neighbor> neighbors(EdgeId e) const;

  /// Shortest s-path length, nullopt when no s-path exists. d_s(e,e) = 0.
  std::optional<std::size_t> distance(EdgeId from, EdgeId to, unsigned s) const;

  SComponentMap components(unsigned s) const;

  /// (|E_s| - 1) / sum of s-distances over e's s-component; 0 for a
  /// singleton component or when |e| < s.
  double closeness(EdgeId e, unsigned s) const;

  CentralityProfile profile(EdgeId e, unsigned k) const;

  /// Profiles of every edge (indexed by EdgeId), building each
  /// s-adjacency only once.
  std::vector<CentralityProfile> all_profiles(unsigned k) const;

 private:
  struct Adjacency {
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> targets;
  };
  Adjacency adjacency(unsigned s) const;
  // Sum of BFS distances and reached count from `start` over `adj`.
  std::pair<std::size_t, std::size_t> bfs_totals(const Adjacency& adj, std::uint32_t start,
                                                 std::vector<std::int32_t>& dist,
                                                 std::vector<std::uint32_t>& queue) const;

  const Hypergraph* h_;
  std::vector<std::uint32_t> offsets_;
  std::vector<Neighbor> neighbors_;
};

std::optional<std::size_t> s_distance(const Hypergraph& h, EdgeId e, EdgeId f, unsigned s);
SComponentMap s_components(const Hypergraph& h, unsigned s);
double s_closeness_centrality(const Hypergraph& h, EdgeId e, unsigned s);
CentralityProfile centrality_profile(const Hypergraph& h, EdgeId e, unsigned k);

/// Skip interval such that 3 + 10k is about 70% of the largest edge:
/// k = max(1, round((0.7 * D - 3) / 10)). Throws DataError when empty.
unsigned feature_skip_interval(const Hypergraph& h);
unsigned feature_skip_interval(std::size_t max_edge_size);

/// Detector spacing whose schedule tops out near D:
/// k = max(1, floor((D - 3) / 10)).
unsigned detector_skip_interval(std::size_t max_edge_size);

/// CSV dumps: "ip,role,port" per incidence, and one profile row per edge.
void write_incidence_csv(const Hypergraph& h, std::ostream& out);
void write_profiles_csv(std::span<const CentralityProfile> profiles, std::ostream& out);

}  // namespace hgnids
