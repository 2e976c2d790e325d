#include "hgnids/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "hgnids/error.hpp"
#include "hgnids/rng.hpp"
#include "hgnids/text.hpp"

namespace hgnids {

std::string_view to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::NRF: return "NRF";
    case FeatureMode::HGI: return "HGI";
    case FeatureMode::HGA: return "HGA";
  }
  return "UNKNOWN";
}

FeatureMode parse_feature_mode(std::string_view text) {
  const std::string t = text::to_lower(text::trim(text));
  if (t == "nrf" || t == "rf") return FeatureMode::NRF;
  if (t == "hgi") return FeatureMode::HGI;
  if (t == "hga") return FeatureMode::HGA;
  throw UsageError("unknown feature mode '" + std::string(text) + "' (expected NRF, HGI or HGA)");
}

std::size_t feature_width(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::NRF: return kNrfWidth;
    case FeatureMode::HGI: return kNrfWidth + kScheduleLength + 1;
    case FeatureMode::HGA: return kNrfWidth + 5;
  }
  return 0;
}

std::vector<std::string> feature_names(FeatureMode mode) {
  std::vector<std::string> names = {"protocol",       "flow_duration",   "tot_fwd_pkts",
                                    "tot_bwd_pkts",   "tot_fwd_bytes",   "tot_bwd_bytes",
                                    "flow_bytes_per_s", "flow_pkts_per_s", "down_up_ratio"};
  if (mode == FeatureMode::HGI) {
    for (std::size_t n = 0; n < kScheduleLength; ++n) names.push_back("c" + std::to_string(n));
    names.emplace_back("c_sum");
  } else if (mode == FeatureMode::HGA) {
    for (const char* n : {"c_last", "c_sum", "src_edge_size", "dst_edge_size", "edge_size_sum"}) {
      names.emplace_back(n);
    }
  }
  return names;
}

std::string_view to_string(BinaryLabel label) {
  return label == BinaryLabel::Attack ? "ATTACK" : "NORMAL";
}

ProfileTable ProfileTable::from_hypergraph(const Hypergraph& h, unsigned k) {
  if (h.empty()) throw DataError("cannot build centrality profiles from an empty hypergraph");
  if (k == 0) k = feature_skip_interval(h);
  ProfileTable table(k);
  const SOverlapGraph g(h);
  const auto profiles = g.all_profiles(k);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    EdgeProfile p;
    p.values = profiles[i].values;
    p.total = profiles[i].total;
    p.edge_size = h.edge_size(EdgeId{static_cast<std::uint32_t>(i)});
    table.insert(profiles[i].edge, p);
  }
  return table;
}

ProfileTable ProfileTable::from_records(std::span<const FlowRecord> records, unsigned k) {
  return from_hypergraph(build_hypergraph(records), k);
}

const EdgeProfile* ProfileTable::find(std::string_view ip) const {
  const auto it = index_.find(std::string(ip));
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

ProfileTable ProfileTable::restricted_to(const std::set<std::string>& ips) const {
  ProfileTable out(k_);
  for (const auto& [ip, p] : entries_) {
    if (ips.contains(ip)) out.insert(ip, p);
  }
  return out;
}

void ProfileTable::insert(std::string ip, const EdgeProfile& profile) {
  if (k_ == 0) throw UsageError("profile table has no skip interval");
  const auto [it, inserted] = index_.try_emplace(ip, entries_.size());
  if (inserted) {
    entries_.emplace_back(std::move(ip), profile);
  } else {
    entries_[it->second].second = profile;
  }
}

void ProfileTable::write_csv(std::ostream& out) const {
  out << "ip,k,edge_size";
  for (std::size_t n = 0; n < kScheduleLength; ++n) out << ",c" << n;
  out << ",total\n";
  for (const auto& [ip, p] : entries_) {
    out << ip << ',' << k_ << ',' << p.edge_size;
    for (double v : p.values) out << ',' << text::format_double(v);
    out << ',' << text::format_double(p.total) << '\n';
  }
}

ProfileTable ProfileTable::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("profile table: missing header");
  constexpr std::size_t kCols = 3 + kScheduleLength + 1;
  ProfileTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line), ',');
    const auto bad = [&] { return DataError("profile table line " + std::to_string(line_no) + ": malformed row"); };
    if (f.size() != kCols) throw bad();
    const auto k = text::parse_int(f[1]);
    const auto size = text::parse_int(f[2]);
    if (!k || *k < 1 || !size || *size < 0) throw bad();
    if (table.k_ == 0) table.k_ = static_cast<unsigned>(*k);
    if (table.k_ != static_cast<unsigned>(*k)) throw bad();
    EdgeProfile p;
    p.edge_size = static_cast<std::size_t>(*size);
    for (std::size_t n = 0; n < kScheduleLength; ++n) {
      const auto v = text::parse_double(f[3 + n]);
      if (!v || !std::isfinite(*v)) throw bad();
      p.values[n] = *v;
      p.total += *v;
    }
    table.insert(std::string(f[0]), p);
  }
  return table;
}

CentralityProfile record_profile(const FlowRecord& rec, const ProfileTable& profiles) {
  CentralityProfile out;
  out.edge = rec.src_ip + "->" + rec.dst_ip;
  out.k = profiles.k() == 0 ? 1 : profiles.k();
  out.schedule = s_schedule(out.k);
  const EdgeProfile* src = profiles.find(rec.src_ip);
  const EdgeProfile* dst = profiles.find(rec.dst_ip);
  for (std::size_t n = 0; n < kScheduleLength; ++n) {
    const double a = src ? src->values[n] : 0.0;
    const double b = dst ? dst->values[n] : 0.0;
    out.values[n] = std::max(a, b);
    out.total += out.values[n];
  }
  return out;
}

FeatureVector encode(const FlowRecord& rec, FeatureMode mode, const EncodingContext& ctx,
                     std::size_t origin) {
  FeatureVector fv;
  fv.mode = mode;
  fv.label = binary_label(rec.label);
  fv.origin = origin;
  fv.origin_label = rec.label.to_string();
  const auto nrf = nrf_values(rec);
  fv.values.reserve(feature_width(mode));
  fv.values.assign(nrf.begin(), nrf.end());
  if (mode == FeatureMode::NRF) return fv;
  if (!ctx.profiles.has_hypergraph()) {
    throw DataError(std::string(to_string(mode)) + " encoding needs a non-empty hypergraph");
  }

  std::array<double, kScheduleLength> c{};
  const bool hacker = ctx.hackers.contains(IpPair{rec.src_ip, rec.dst_ip});
  if (!hacker && ctx.weights) {
    c = *ctx.weights;
  } else {
    c = record_profile(rec, ctx.profiles).values;
  }
  double total = 0.0;
  for (double v : c) total += v;

  if (mode == FeatureMode::HGI) {
    fv.values.insert(fv.values.end(), c.begin(), c.end());
    fv.values.push_back(total);
  } else {
    const EdgeProfile* src = ctx.profiles.find(rec.src_ip);
    const EdgeProfile* dst = ctx.profiles.find(rec.dst_ip);
    const double es = src ? static_cast<double>(src->edge_size) : 0.0;
    const double ed = dst ? static_cast<double>(dst->edge_size) : 0.0;
    fv.values.push_back(c.back());
    fv.values.push_back(total);
    fv.values.push_back(es);
    fv.values.push_back(ed);
    fv.values.push_back(es + ed);
  }
  return fv;
}

std::vector<FeatureVector> build_matrix(std::span<const FlowRecord> records, FeatureMode mode,
                                        const EncodingContext& ctx) {
  std::vector<FeatureVector> rows;
  rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) rows.push_back(encode(records[i], mode, ctx, i));
  return rows;
}

std::vector<FeatureVector> build_matrix(const Dataset& d, const Hypergraph& h, FeatureMode mode,
                                        const KnownHackerSet& hackers,
                                        const std::optional<WeightVector>& weights) {
  EncodingContext ctx;
  if (mode != FeatureMode::NRF) ctx.profiles = ProfileTable::from_hypergraph(h);
  ctx.hackers = hackers;
  ctx.weights = weights;
  return build_matrix(d.records, mode, ctx);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split_indices(
    std::span<const BinaryLabel> labels, double frac, std::uint64_t seed) {
  if (!(frac > 0.0 && frac < 1.0)) throw UsageError("split fraction must lie in (0, 1)");
  const std::size_t n = labels.size();
  if (n < 2) throw DataError("need at least 2 rows to split");

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<int>(labels[i])].push_back(i);

  const auto target = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(frac * static_cast<double>(n))), 1, n - 1);
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = frac * static_cast<double>(by_class[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  while (assigned < target) {
    int best = -1;
    for (int c = 0; c < 2; ++c) {
      if (quota[c] >= by_class[c].size()) continue;
      if (best < 0 || remainder[c] > remainder[best]) best = c;
    }
    if (best < 0) break;
    ++quota[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  Rng rng(seed);
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (int c = 0; c < 2; ++c) {
    auto& idx = by_class[c];
    rng.shuffle(std::span<std::size_t>(idx));
    train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<std::vector<FeatureVector>, std::vector<FeatureVector>> train_test_split(
    std::span<const FeatureVector> rows, double frac, std::uint64_t seed) {
  std::vector<BinaryLabel> labels;
  labels.reserve(rows.size());
  for (const auto& r : rows) labels.push_back(r.label);
  const auto [tr, te] = stratified_split_indices(labels, frac, seed);
  std::pair<std::vector<FeatureVector>, std::vector<FeatureVector>> out;
  for (auto i : tr) out.first.push_back(rows[i]);
  for (auto i : te) out.second.push_back(rows[i]);
  return out;
}

void write_matrix_csv(std::span<const FeatureVector> rows, std::ostream& out) {
  const FeatureMode mode = rows.empty() ? FeatureMode::NRF : rows.front().mode;
  out << text::join(feature_names(mode), ",") << ",label,origin\n";
  for (const auto& r : rows) {
    if (r.mode != mode) throw UsageError("matrix rows mix feature modes");
    for (double v : r.values) out << text::format_double(v) << ',';
    out << to_string(r.label) << ',' << r.origin << '\n';
  }
}

}  // namespace hgnids
