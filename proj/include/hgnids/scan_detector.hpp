#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <vector>

#include "hgnids/features.hpp"
#include "hgnids/flow.hpp"

namespace hgnids {

inline constexpr std::size_t kTailLength = 6;

struct ScanFlag {
  IpPair pair;
  std::array<std::uint8_t, kTailLength> binarized_tail{};
  unsigned tail_sum = 0;
  std::size_t window_id = 0;
};

using FlaggedSet = std::set<IpPair>;

struct DetectorOptions {
  double binarize_at = 0.95;   // centrality >= this becomes 1
  unsigned min_tail_sum = 2;
  unsigned k = 0;              // 0: max(1, floor((D - 3) / 10))
};

/// Builds the window hypergraph, computes eleven evenly spaced centralities
/// per edge, binarizes the last six, and flags each not-yet-flagged (src,
/// dst) pair whose element-wise min of the two edges' tails sums to at
/// least min_tail_sum. Newly flagged pairs are added to `flagged`.
std::vector<ScanFlag> detect_window(std::span<const FlowRecord> window, FlaggedSet& flagged,
                                    std::size_t window_id = 0, const DetectorOptions& options = {});

inline void reset(FlaggedSet& flagged) { flagged.clear(); }

/// Tumbling-window driver around detect_window.
class ScanDetector {
 public:
  explicit ScanDetector(std::size_t window_size = 5000, DetectorOptions options = {});

  /// Buffers records and runs every window that fills up.
  std::vector<ScanFlag> observe(std::span<const FlowRecord> records);
  /// Runs whatever is buffered as a (short) final window.
  std::vector<ScanFlag> flush();

  const FlaggedSet& flagged() const { return flagged_; }
  std::size_t windows_processed() const { return next_window_; }
  void reset();

 private:
  std::size_t window_size_;
  DetectorOptions options_;
  FlaggedSet flagged_;
  std::vector<FlowRecord> buffer_;
  std::size_t next_window_ = 0;
};

/// "window_id,src_ip,dst_ip,tail_sum"
void write_flags_csv(std::span<const ScanFlag> flags, std::ostream& out);

}  // namespace hgnids
