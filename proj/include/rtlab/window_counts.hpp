// Exact window statistics of a 0/1 indicator sequence stored as runs of hits.
//
// For window half-length K the two families of windows are
//   Z_i = I_{i-K} + ... + I_{i+K}   (centred, 2K+1 terms), for every i with a full window,
//   W_h = I_h + ... + I_{h+K}       (forward), for every hit h.
// Sparse traces make both histograms cost O(#hits + K * #runs) instead of O(length).
#pragma once

#include <cstdint>
#include <vector>

namespace rtlab {

struct HitRun {
  std::uint64_t start = 0;
  std::uint64_t length = 0;
  std::uint64_t end() const { return start + length; }
};

/// Indicator of U along one orbit (or one symbolic stream): positions
/// 0..length-1, hits grouped into maximal runs.
struct IndicatorTrace {
  std::uint64_t length = 0;
  std::vector<HitRun> runs;
  /// False when gaps longer than every window of interest were compressed, so
  /// the number of empty windows is not meaningful.
  bool positions_exact = true;

  void push_hit(std::uint64_t i) {
    if (!runs.empty() && runs.back().end() == i) {
      ++runs.back().length;
    } else {
      runs.push_back({i, 1});
    }
  }
  /// Appends a run of `len` hits at `start` (start >= end of the last run).
  void push_run(std::uint64_t start, std::uint64_t len);
  std::uint64_t hits() const;
  bool at(std::uint64_t i) const;
};

/// Mergeable integer counts for one window half-length K.
struct WindowCounts {
  std::uint64_t K = 0;
  std::uint64_t windows = 0;             // centred windows examined
  std::vector<std::uint64_t> z_counts;   // z_counts[l], l >= 1: windows with Z = l
  std::uint64_t entries = 0;             // hits with a full forward window
  std::vector<std::uint64_t> w_counts;   // w_counts[l], l >= 1: entries with W = l
  std::uint64_t steps = 0;               // positions covered by the trace(s)

  std::uint64_t windows_hit() const;     // windows with Z >= 1
  /// #{entries with W >= l}.
  std::uint64_t w_at_least(std::size_t l) const;
  void merge(const WindowCounts& other);
};

/// Centred windows need i-K >= 0 and i+K <= length-1. Entries closer than
/// 2K+1 steps to the end of the trace are discarded.
WindowCounts window_counts(const IndicatorTrace& trace, std::uint64_t K);

}  // namespace rtlab
