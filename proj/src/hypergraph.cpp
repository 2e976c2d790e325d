#include "hgnids/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hgnids/error.hpp"
#include "hgnids/text.hpp"

namespace hgnids {

std::string_view to_string(EdgeRole role) {
  switch (role) {
    case EdgeRole::Source: return "SOURCE";
    case EdgeRole::Dest: return "DEST";
    case EdgeRole::Both: return "BOTH";
  }
  return "UNKNOWN";
}

Hypergraph Hypergraph::from_edges(
    const std::vector<std::pair<std::string, std::vector<Port>>>& edges) {
  Hypergraph h;
  std::vector<Port> all;
  for (const auto& [ip, ports] : edges) {
    if (ports.empty()) throw UsageError("hyperedge '" + ip + "' has no vertices");
    if (!h.index_.emplace(ip, static_cast<std::uint32_t>(h.edges_.size())).second) {
      throw UsageError("duplicate hyperedge '" + ip + "'");
    }
    Edge e{ip, EdgeRole::Source, ports};
    std::sort(e.ports.begin(), e.ports.end());
    e.ports.erase(std::unique(e.ports.begin(), e.ports.end()), e.ports.end());
    all.insert(all.end(), e.ports.begin(), e.ports.end());
    h.edges_.push_back(std::move(e));
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  h.vertices_ = std::move(all);
  return h;
}

std::optional<EdgeId> Hypergraph::find(std::string_view ip) const {
  const auto it = index_.find(std::string(ip));
  if (it == index_.end()) return std::nullopt;
  return EdgeId{it->second};
}

EdgeId Hypergraph::require(std::string_view ip) const {
  if (auto id = find(ip)) return *id;
  throw UsageError("unknown hyperedge '" + std::string(ip) + "'");
}

std::size_t Hypergraph::max_edge_size() const {
  std::size_t d = 0;
  for (const auto& e : edges_) d = std::max(d, e.ports.size());
  return d;
}

std::uint32_t HypergraphBuilder::touch(std::string_view ip, EdgeRole role) {
  const auto [it, inserted] = index_.try_emplace(std::string(ip), static_cast<std::uint32_t>(ips_.size()));
  if (inserted) {
    ips_.emplace_back(ip);
    roles_.push_back(role);
    ports_.emplace_back();
  } else if (roles_[it->second] != role) {
    roles_[it->second] = EdgeRole::Both;
  }
  return it->second;
}

void HypergraphBuilder::add(std::string_view src_ip, std::string_view dst_ip, Port dst_port) {
  const auto s = touch(src_ip, EdgeRole::Source);
  const auto d = touch(dst_ip, EdgeRole::Dest);
  ports_[s].push_back(dst_port);
  if (d != s) ports_[d].push_back(dst_port);
}

void HypergraphBuilder::add_all(std::span<const FlowRecord> records) {
  for (const auto& r : records) add(r);
}

Hypergraph HypergraphBuilder::build() const {
  Hypergraph h;
  h.index_ = index_;
  h.edges_.reserve(ips_.size());
  std::vector<bool> seen(65536, false);
  for (std::size_t i = 0; i < ips_.size(); ++i) {
    Hypergraph::Edge e{ips_[i], roles_[i], ports_[i]};
    std::sort(e.ports.begin(), e.ports.end());
    e.ports.erase(std::unique(e.ports.begin(), e.ports.end()), e.ports.end());
    for (Port p : e.ports) seen[p] = true;
    h.edges_.push_back(std::move(e));
  }
  for (std::size_t p = 0; p < seen.size(); ++p) {
    if (seen[p]) h.vertices_.push_back(static_cast<Port>(p));
  }
  return h;
}

Hypergraph build_hypergraph(std::span<const FlowRecord> records) {
  HypergraphBuilder b;
  b.add_all(records);
  return b.build();
}

Schedule s_schedule(unsigned k) {
  Schedule s{};
  for (unsigned n = 0; n < kScheduleLength; ++n) s[n] = 3 + n * k;
  return s;
}

SOverlapGraph::SOverlapGraph(const Hypergraph& h) : h_(&h) {
  const std::size_t n = h.edge_count();
  std::vector<std::vector<std::uint32_t>> by_port(65536);
  for (std::uint32_t e = 0; e < n; ++e) {
    for (Port p : h.edge(EdgeId{e}).ports) by_port[p].push_back(e);
  }
  std::vector<std::uint32_t> count(n, 0);
  std::vector<std::uint32_t> touched;
  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  for (std::uint32_t e = 0; e < n; ++e) {
    for (Port p : h.edge(EdgeId{e}).ports) {
      for (std::uint32_t f : by_port[p]) {
        if (f != e && count[f]++ == 0) touched.push_back(f);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::uint32_t f : touched) {
      neighbors_.push_back({f, count[f]});
      count[f] = 0;
    }
    touched.clear();
    offsets_.push_back(static_cast<std::uint32_t>(neighbors_.size()));
  }
}

std::span<const SOverlapGraph::Neighbor> SOverlapGraph::neighbors(EdgeId e) const {
  const auto b = offsets_.at(e.value);
  const auto end = offsets_.at(e.value + 1);
  return std::span<const Neighbor>(neighbors_).subspan(b, end - b);
}

SOverlapGraph::Adjacency SOverlapGraph::adjacency(unsigned s) const {
  Adjacency adj;
  const std::size_t n = h_->edge_count();
  adj.offsets.reserve(n + 1);
  adj.offsets.push_back(0);
  for (std::uint32_t e = 0; e < n; ++e) {
    if (h_->edge_size(EdgeId{e}) >= s) {
      for (const auto& nb : neighbors(EdgeId{e})) {
        if (nb.overlap >= s) adj.targets.push_back(nb.edge);
      }
    }
    adj.offsets.push_back(static_cast<std::uint32_t>(adj.targets.size()));
  }
  return adj;
}

std::pair<std::size_t, std::size_t> SOverlapGraph::bfs_totals(const Adjacency& adj,
                                                              std::uint32_t start,
                                                              std::vector<std::int32_t>& dist,
                                                              std::vector<std::uint32_t>& queue) const {
  queue.clear();
  queue.push_back(start);
  dist[start] = 0;
  std::size_t sum = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t u = queue[head];
    for (std::uint32_t i = adj.offsets[u]; i < adj.offsets[u + 1]; ++i) {
      const std::uint32_t v = adj.targets[i];
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        sum += static_cast<std::size_t>(dist[v]);
        queue.push_back(v);
      }
    }
  }
  for (std::uint32_t v : queue) dist[v] = -1;
  return {sum, queue.size()};
}

std::optional<std::size_t> SOverlapGraph::distance(EdgeId from, EdgeId to, unsigned s) const {
  const std::size_t n = h_->edge_count();
  if (from.value >= n || to.value >= n) throw UsageError("s_distance: unknown edge id");
  if (s < 1) throw UsageError("s_distance: s must be at least 1");
  if (from == to) return 0;
  if (h_->edge_size(from) < s || h_->edge_size(to) < s) return std::nullopt;
  std::vector<std::int32_t> dist(n, -1);
  std::vector<std::uint32_t> queue{from.value};
  dist[from.value] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t u = queue[head];
    for (const auto& nb : neighbors(EdgeId{u})) {
      if (nb.overlap < s || dist[nb.edge] >= 0) continue;
      dist[nb.edge] = dist[u] + 1;
      if (nb.edge == to.value) return static_cast<std::size_t>(dist[nb.edge]);
      queue.push_back(nb.edge);
    }
  }
  return std::nullopt;
}

SComponentMap SOverlapGraph::components(unsigned s) const {
  if (s < 1) throw UsageError("s_components: s must be at least 1");
  const std::size_t n = h_->edge_count();
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  SComponentMap map;
  map.s = s;
  map.assignment.assign(n, kUnset);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t e = 0; e < n; ++e) {
    if (map.assignment[e] != kUnset) continue;
    const auto id = static_cast<std::uint32_t>(map.component_count++);
    map.assignment[e] = id;
    stack.push_back(e);
    while (!stack.empty()) {
      const std::uint32_t u = stack.back();
      stack.pop_back();
      for (const auto& nb : neighbors(EdgeId{u})) {
        if (nb.overlap >= s && map.assignment[nb.edge] == kUnset) {
          map.assignment[nb.edge] = id;
          stack.push_back(nb.edge);
        }
      }
    }
  }
  return map;
}

double SOverlapGraph::closeness(EdgeId e, unsigned s) const {
  const std::size_t n = h_->edge_count();
  if (e.value >= n) throw UsageError("s_closeness_centrality: unknown edge id");
  if (s < 1) throw UsageError("s_closeness_centrality: s must be at least 1");
  if (h_->edge_size(e) < s) return 0.0;
  std::vector<std::int32_t> dist(n, -1);
  std::vector<std::uint32_t> queue{e.value};
  dist[e.value] = 0;
  std::size_t sum = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t u = queue[head];
    for (const auto& nb : neighbors(EdgeId{u})) {
      if (nb.overlap < s || dist[nb.edge] >= 0) continue;
      dist[nb.edge] = dist[u] + 1;
      sum += static_cast<std::size_t>(dist[nb.edge]);
      queue.push_back(nb.edge);
    }
  }
  if (queue.size() <= 1) return 0.0;
  return static_cast<double>(queue.size() - 1) / static_cast<double>(sum);
}

CentralityProfile SOverlapGraph::profile(EdgeId e, unsigned k) const {
  if (k < 1) throw UsageError("centrality_profile: k must be at least 1");
  CentralityProfile p;
  p.edge = h_->edge(e).ip;
  p.k = k;
  p.schedule = s_schedule(k);
  for (std::size_t i = 0; i < kScheduleLength; ++i) {
    p.values[i] = closeness(e, p.schedule[i]);
    p.total += p.values[i];
  }
  return p;
}

std::vector<CentralityProfile> SOverlapGraph::all_profiles(unsigned k) const {
  if (k < 1) throw UsageError("centrality_profile: k must be at least 1");
  const std::size_t n = h_->edge_count();
  const Schedule schedule = s_schedule(k);
  std::vector<CentralityProfile> out(n);
  for (std::uint32_t e = 0; e < n; ++e) {
    out[e].edge = h_->edge(EdgeId{e}).ip;
    out[e].k = k;
    out[e].schedule = schedule;
  }
  std::vector<std::int32_t> dist(n, -1);
  std::vector<std::uint32_t> queue;
  for (std::size_t i = 0; i < kScheduleLength; ++i) {
    const unsigned s = schedule[i];
    const Adjacency adj = adjacency(s);
    for (std::uint32_t e = 0; e < n; ++e) {
      if (adj.offsets[e] == adj.offsets[e + 1]) continue;  // singleton or |e| < s
      const auto [sum, reached] = bfs_totals(adj, e, dist, queue);
      out[e].values[i] = static_cast<double>(reached - 1) / static_cast<double>(sum);
    }
  }
  for (auto& p : out) {
    p.total = 0.0;
    for (double v : p.values) p.total += v;
  }
  return out;
}

std::optional<std::size_t> s_distance(const Hypergraph& h, EdgeId e, EdgeId f, unsigned s) {
  return SOverlapGraph(h).distance(e, f, s);
}

SComponentMap s_components(const Hypergraph& h, unsigned s) { return SOverlapGraph(h).components(s); }

double s_closeness_centrality(const Hypergraph& h, EdgeId e, unsigned s) {
  return SOverlapGraph(h).closeness(e, s);
}

CentralityProfile centrality_profile(const Hypergraph& h, EdgeId e, unsigned k) {
  if (e.value >= h.edge_count()) throw UsageError("centrality_profile: unknown edge id");
  return SOverlapGraph(h).profile(e, k);
}

unsigned feature_skip_interval(std::size_t max_edge_size) {
  const double raw = (0.7 * static_cast<double>(max_edge_size) - 3.0) / 10.0;
  const long k = std::lround(raw);
  return k < 1 ? 1u : static_cast<unsigned>(k);
}

unsigned feature_skip_interval(const Hypergraph& h) {
  if (h.empty()) throw DataError("feature_skip_interval: empty hypergraph");
  return feature_skip_interval(h.max_edge_size());
}

unsigned detector_skip_interval(std::size_t max_edge_size) {
  const long d = static_cast<long>(max_edge_size);
  const long k = (d - 3) / 10;  // d >= 3 here whenever k >= 1
  return k < 1 ? 1u : static_cast<unsigned>(k);
}

void write_incidence_csv(const Hypergraph& h, std::ostream& out) {
  out << "ip,role,port\n";
  for (const auto& e : h.edges()) {
    for (Port p : e.ports) out << e.ip << ',' << to_string(e.role) << ',' << p << '\n';
  }
}

void write_profiles_csv(std::span<const CentralityProfile> profiles, std::ostream& out) {
  out << "ip,k";
  for (std::size_t n = 0; n < kScheduleLength; ++n) out << ",c" << n;
  out << ",total\n";
  for (const auto& p : profiles) {
    out << p.edge << ',' << p.k;
    for (double v : p.values) out << ',' << text::format_double(v);
    out << ',' << text::format_double(p.total) << '\n';
  }
}

}  // namespace hgnids
