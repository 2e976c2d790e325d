#pragma once

// Brute-force reference implementations of the s-metrics. They share no
// code with the library: overlaps come from std::set_intersection on plain
// port lists, distances from exhaustive simple-path enumeration (small
// graphs) or Floyd-Warshall, components from a Warshall closure.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "hgnids/rng.hpp"

namespace oracle {

using Edges = std::vector<std::vector<std::uint16_t>>;  // each sorted and unique

inline std::size_t overlap(const std::vector<std::uint16_t>& a, const std::vector<std::uint16_t>& b) {
  std::vector<std::uint16_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return common.size();
}

inline std::vector<std::vector<bool>> s_adjacency(const Edges& edges, unsigned s) {
  const std::size_t n = edges.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      adj[i][j] = i != j && overlap(edges[i], edges[j]) >= s;
    }
  }
  return adj;
}

/// Shortest s-path by trying every simple path from `from`.
inline std::optional<std::size_t> distance_by_paths(const Edges& edges, std::size_t from, std::size_t to, unsigned s) {
  if (from == to) return 0;
  const auto adj = s_adjacency(edges, s);
  std::optional<std::size_t> best;
  std::vector<bool> on_path(edges.size(), false);
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t at, std::size_t len) {
    if (at == to) {
      if (!best || len < *best) best = len;
      return;
    }
    if (best && len >= *best) return;
    for (std::size_t nxt = 0; nxt < edges.size(); ++nxt) {
      if (adj[at][nxt] && !on_path[nxt]) {
        on_path[nxt] = true;
        walk(nxt, len + 1);
        on_path[nxt] = false;
      }
    }
  };
  on_path[from] = true;
  walk(from, 0);
  return best;
}

inline constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

/// All-pairs s-distances, kInf where unreachable.
inline std::vector<std::vector<std::size_t>> floyd_warshall(const Edges& edges, unsigned s) {
  const std::size_t n = edges.size();
  const auto adj = s_adjacency(edges, s);
  std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (adj[i][j]) d[i][j] = 1;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][k] != kInf && d[k][j] != kInf && d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  return d;
}

/// Reflexive-transitive closure of s-adjacency.
inline std::vector<std::vector<bool>> warshall_closure(const Edges& edges, unsigned s) {
  auto r = s_adjacency(edges, s);
  for (std::size_t i = 0; i < r.size(); ++i) r[i][i] = true;
  for (std::size_t k = 0; k < r.size(); ++k) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[i][k] && r[k][j]) r[i][j] = true;
      }
    }
  }
  return r;
}

/// (|E_s| - 1) / sum of distances, where E_s is the component of e; edges
/// smaller than s are isolated by definition.
inline double closeness(const Edges& edges, std::size_t e, unsigned s) {
  if (edges[e].size() < s) return 0.0;
  const auto d = floyd_warshall(edges, s);
  std::size_t members = 0, total = 0;
  for (std::size_t f = 0; f < edges.size(); ++f) {
    if (d[e][f] != kInf) {
      ++members;
      total += d[e][f];
    }
  }
  if (members <= 1 || total == 0) return 0.0;
  return static_cast<double>(members - 1) / static_cast<double>(total);
}

/// Random hypergraph with n_edges edges over ports 1..n_vertices.
inline Edges random_edges(std::uint64_t seed, std::size_t max_edges = 12, std::size_t max_vertices = 20) {
  hgnids::Rng rng(seed);
  const std::size_t n_edges = 1 + rng.index(max_edges);
  const std::size_t n_vertices = 1 + rng.index(max_vertices);
  const double density = rng.uniform(0.1, 0.9);
  Edges edges(n_edges);
  for (auto& e : edges) {
    for (std::uint16_t v = 1; v <= n_vertices; ++v) {
      if (rng.bernoulli(density)) e.push_back(v);
    }
    if (e.empty()) e.push_back(static_cast<std::uint16_t>(1 + rng.index(n_vertices)));
  }
  return edges;
}

}  // namespace oracle
