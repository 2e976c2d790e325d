#include "hgnids/scan_detector.hpp"

#include <ostream>

#include "hgnids/error.hpp"
#include "hgnids/hypergraph.hpp"

namespace hgnids {

std::vector<ScanFlag> detect_window(std::span<const FlowRecord> window, FlaggedSet& flagged,
                                    std::size_t window_id, const DetectorOptions& options) {
  std::vector<ScanFlag> flags;
  if (window.empty()) return flags;
  const Hypergraph h = build_hypergraph(window);
  const unsigned k = options.k > 0 ? options.k : detector_skip_interval(h.max_edge_size());
  const auto profiles = SOverlapGraph(h).all_profiles(k);

  std::vector<std::array<std::uint8_t, kTailLength>> tails(profiles.size());
  for (std::size_t e = 0; e < profiles.size(); ++e) {
    for (std::size_t j = 0; j < kTailLength; ++j) {
      tails[e][j] = profiles[e].values[kScheduleLength - kTailLength + j] >= options.binarize_at;
    }
  }

  std::set<IpPair> seen;
  for (const auto& rec : window) {
    IpPair pair{rec.src_ip, rec.dst_ip};
    if (flagged.contains(pair) || !seen.insert(pair).second) continue;
    const auto& ts = tails[h.require(rec.src_ip).value];
    const auto& td = tails[h.require(rec.dst_ip).value];
    ScanFlag f;
    for (std::size_t j = 0; j < kTailLength; ++j) {
      f.binarized_tail[j] = std::min(ts[j], td[j]);
      f.tail_sum += f.binarized_tail[j];
    }
    if (f.tail_sum < options.min_tail_sum) continue;
    f.pair = pair;
    f.window_id = window_id;
    flagged.insert(std::move(pair));
    flags.push_back(std::move(f));
  }
  return flags;
}

ScanDetector::ScanDetector(std::size_t window_size, DetectorOptions options)
    : window_size_(window_size), options_(options) {
  if (window_size_ == 0) throw UsageError("detector window size must be positive");
}

std::vector<ScanFlag> ScanDetector::observe(std::span<const FlowRecord> records) {
  std::vector<ScanFlag> out;
  for (const auto& r : records) {
    buffer_.push_back(r);
    if (buffer_.size() == window_size_) {
      auto f = detect_window(buffer_, flagged_, next_window_++, options_);
      out.insert(out.end(), f.begin(), f.end());
      buffer_.clear();
    }
  }
  return out;
}

std::vector<ScanFlag> ScanDetector::flush() {
  if (buffer_.empty()) return {};
  auto f = detect_window(buffer_, flagged_, next_window_++, options_);
  buffer_.clear();
  return f;
}

void ScanDetector::reset() {
  hgnids::reset(flagged_);
  buffer_.clear();
  next_window_ = 0;
}

void write_flags_csv(std::span<const ScanFlag> flags, std::ostream& out) {
  out << "window_id,src_ip,dst_ip,tail_sum\n";
  for (const auto& f : flags) {
    out << f.window_id << ',' << f.pair.first << ',' << f.pair.second << ',' << f.tail_sum << '\n';
  }
}

}  // namespace hgnids
