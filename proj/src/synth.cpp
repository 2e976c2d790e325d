#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>

#include "hgnids/error.hpp"
#include "hgnids/flow.hpp"
#include "hgnids/rng.hpp"

namespace hgnids {

namespace {

// Published per-class summary statistics of the eight numeric flow features
// (port-scan subset of CIC-IDS2017): mode, maximum, mean, standard deviation.
struct FeatureStats {
  double mode;
  double max;
  double mean;
  double sd;
};

constexpr std::array<FeatureStats, 8> kScanStats = {{
    {47, 119809735, 82885.94, 2326775.89},
    {1, 150, 1.02, 0.43},
    {1, 30, 1.00, 0.15},
    {0, 1473, 1.09, 5.66},
    {6, 11595, 12.24, 267.40},
    {139535, 8000000, 220359.75, 459863.69},
    {42553, 2000000, 62690.57, 127930.00},
    {1, 2, 0.99, 0.09},
}};

constexpr std::array<FeatureStats, 8> kBenignStats = {{
    {30985, 119999949, 5386984.20, 31562986.85},
    {2, 3119, 6.55, 28.98},
    {2, 3635, 6.67, 42.23},
    {68, 232349, 524.05, 2771.69},
    {142, 7150819, 6079.02, 76351.31},
    {5684, 2070000000, 2241033.31, 38472283.25},
    {113, 3000000, 62501.33, 247879.03},
    {1, 124, 0.67, 0.62},
}};

// Count-valued features are rounded after the draw.
constexpr std::array<bool, 8> kIntegral = {false, true, true, true, true, false, false, true};

struct LogNormal {
  double mu;
  double sigma;
};

// Moment match: E[X] = mean, SD[X] = sd.
LogNormal fit_lognormal(const FeatureStats& s) {
  const double sigma2 = std::log1p((s.sd * s.sd) / (s.mean * s.mean));
  return {std::log(s.mean) - 0.5 * sigma2, std::sqrt(sigma2)};
}

void draw_features(FlowRecord& rec, const std::array<FeatureStats, 8>& stats, Rng& rng) {
  std::array<double, 8> v{};
  for (std::size_t i = 0; i < 8; ++i) {
    const LogNormal ln = fit_lognormal(stats[i]);
    double x = std::exp(ln.mu + ln.sigma * rng.normal());
    if (kIntegral[i]) x = std::round(x);
    v[i] = std::clamp(x, 0.0, stats[i].max);
  }
  v[1] = std::max(v[1], 1.0);  // a flow has at least one forward packet
  rec.flow_duration = v[0];
  rec.tot_fwd_pkts = v[1];
  rec.tot_bwd_pkts = v[2];
  rec.tot_fwd_bytes = v[3];
  rec.tot_bwd_bytes = v[4];
  rec.flow_bytes_per_s = v[5];
  rec.flow_pkts_per_s = v[6];
  rec.down_up_ratio = v[7];
}

struct PopularPort {
  std::uint16_t port;
  double weight;
};

constexpr std::array<PopularPort, 16> kPopularPorts = {{
    {53, 0.35}, {443, 0.25}, {80, 0.15}, {123, 0.04}, {137, 0.03}, {22, 0.02},
    {21, 0.02}, {445, 0.02}, {139, 0.02}, {8080, 0.02}, {3389, 0.01}, {25, 0.01},
    {110, 0.01}, {143, 0.01}, {993, 0.01}, {389, 0.01},
}};

std::uint16_t draw_benign_port(Rng& rng, double ephemeral_prob) {
  if (rng.bernoulli(ephemeral_prob)) return static_cast<std::uint16_t>(32768 + rng.index(28232));
  double total = 0.0;
  for (const auto& p : kPopularPorts) total += p.weight;
  double u = rng.uniform() * total;
  for (const auto& p : kPopularPorts) {
    if (u < p.weight) return p.port;
    u -= p.weight;
  }
  return kPopularPorts.back().port;
}

int benign_protocol(std::uint16_t port, Rng& rng) {
  if (rng.bernoulli(0.005)) return 0;
  return (port == 53 || port == 123 || port == 137) ? 17 : 6;
}

std::uint16_t ephemeral_port(Rng& rng) { return static_cast<std::uint16_t>(32768 + rng.index(28232)); }

std::string client_ip(unsigned i) {
  return "192.168." + std::to_string(10 + (i + 100) / 250) + "." + std::to_string((i + 100) % 250 + 2);
}

// Fixed (seed-independent) pool so that benign hosts recur across datasets.
std::string server_ip(unsigned i) {
  const unsigned a = (23 + 37 * i) % 200 + 13;
  const unsigned b = (71 * i + 5) % 256;
  const unsigned c = (13 * i + 7) % 256;
  const unsigned d = (29 * i + 11) % 253 + 1;
  return std::to_string(a) + "." + std::to_string(b) + "." + std::to_string(c) + "." + std::to_string(d);
}

std::vector<FlowRecord> make_scans(std::size_t count, const IpPairList& pairs, Rng& rng,
                                   const SynthOptions& opt) {
  std::vector<FlowRecord> out;
  if (count == 0) return out;
  const unsigned span = std::max(1u, opt.scan_port_span);
  std::vector<unsigned> base(pairs.size());
  std::vector<std::size_t> cursor(pairs.size(), 0);
  for (auto& b : base) b = 1 + static_cast<unsigned>(rng.index(std::max(1u, opt.scan_base_max)));
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t p = i % pairs.size();
    FlowRecord rec;
    rec.src_ip = pairs[p].first;
    rec.dst_ip = pairs[p].second;
    rec.src_port = ephemeral_port(rng);
    const unsigned port = base[p] + static_cast<unsigned>(cursor[p]++ % span);
    rec.dst_port = static_cast<std::uint16_t>((port - 1) % 65535 + 1);
    rec.protocol = 6;
    draw_features(rec, kScanStats, rng);
    rec.label = ActivityLabel::port_scan();
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<FlowRecord> make_benign(std::size_t count, Rng& rng, const SynthOptions& opt) {
  std::vector<FlowRecord> out;
  out.reserve(count);
  const unsigned clients = std::max(1u, opt.benign_clients);
  const unsigned servers = std::max(1u, opt.benign_servers);
  for (std::size_t i = 0; i < count; ++i) {
    FlowRecord rec;
    rec.src_ip = client_ip(static_cast<unsigned>(rng.index(clients)));
    rec.dst_ip = server_ip(static_cast<unsigned>(rng.index(servers)));
    rec.src_port = ephemeral_port(rng);
    rec.dst_port = draw_benign_port(rng, opt.ephemeral_port_prob);
    rec.protocol = benign_protocol(rec.dst_port, rng);
    draw_features(rec, kBenignStats, rng);
    rec.label = ActivityLabel::benign();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

Dataset synth_traffic(const SynthProfile& profile, std::size_t count, const IpPairList& ip_pairs,
                      std::uint64_t seed, const SynthOptions& options) {
  std::size_t n_attack = 0;
  switch (profile.kind) {
    case SynthProfile::Kind::PortScan: n_attack = count; break;
    case SynthProfile::Kind::Benign: n_attack = 0; break;
    case SynthProfile::Kind::Mixed:
      if (!(profile.attack_frac >= 0.0 && profile.attack_frac <= 1.0)) {
        throw UsageError("synth_traffic: attack_frac must lie in [0, 1]");
      }
      n_attack = static_cast<std::size_t>(std::llround(static_cast<double>(count) * profile.attack_frac));
      break;
  }
  if (ip_pairs.empty() && (profile.kind == SynthProfile::Kind::PortScan || n_attack > 0)) {
    throw UsageError("synth_traffic: scan traffic needs at least one ip pair");
  }

  Rng scan_rng(derive_seed(seed, 1));
  Rng benign_rng(derive_seed(seed, 2));
  Dataset out;
  out.provenance = Provenance::Synthetic;
  out.seed = seed;
  out.records = make_scans(n_attack, ip_pairs, scan_rng, options);
  auto benign = make_benign(count - n_attack, benign_rng, options);
  out.records.insert(out.records.end(), std::make_move_iterator(benign.begin()),
                     std::make_move_iterator(benign.end()));
  if (profile.kind == SynthProfile::Kind::Mixed) {
    Rng mix_rng(derive_seed(seed, 3));
    mix_rng.shuffle(std::span<FlowRecord>(out.records));
  }
  return out;
}

Dataset remap_ip_pairs(const Dataset& dataset, std::size_t n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw UsageError("remap_ip_pairs: n_pairs must be at least 1");
  std::set<std::string> used;
  bool has_scan = false;
  for (const auto& r : dataset.records) {
    used.insert(r.src_ip);
    used.insert(r.dst_ip);
    has_scan = has_scan || r.label.kind == LabelKind::PortScan;
  }
  if (!has_scan) throw DataError("remap_ip_pairs: dataset has no port-scan records");

  Rng rng(derive_seed(seed, 17));
  const auto fresh = [&](std::string_view prefix, unsigned octets) {
    while (true) {
      std::string ip(prefix);
      for (unsigned i = 0; i < octets; ++i) {
        ip += "." + std::to_string(i + 1 == octets ? 1 + rng.index(254) : rng.index(256));
      }
      if (used.insert(ip).second) return ip;
    }
  };
  std::vector<std::pair<std::string, std::string>> pseudo(n_pairs);
  for (std::size_t p = 1; p < n_pairs; ++p) {
    pseudo[p].first = fresh("10", 3);
    pseudo[p].second = fresh("172.31", 2);
  }

  Dataset out = dataset;
  std::size_t j = 0;
  for (auto& r : out.records) {
    if (r.label.kind != LabelKind::PortScan) continue;
    const std::size_t slot = j++ % n_pairs;
    if (slot == 0) continue;
    r.src_ip = pseudo[slot].first;
    r.dst_ip = pseudo[slot].second;
  }
  return out;
}

}  // namespace hgnids
