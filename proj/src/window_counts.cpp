#include "rtlab/window_counts.hpp"

#include <algorithm>
#include <stdexcept>

namespace rtlab {

void IndicatorTrace::push_run(std::uint64_t start, std::uint64_t len) {
  if (len == 0) return;
  if (!runs.empty() && start < runs.back().end()) {
    throw std::invalid_argument("IndicatorTrace::push_run: runs must be increasing");
  }
  if (!runs.empty() && runs.back().end() == start) {
    runs.back().length += len;
  } else {
    runs.push_back({start, len});
  }
}

std::uint64_t IndicatorTrace::hits() const {
  std::uint64_t h = 0;
  for (const auto& r : runs) h += r.length;
  return h;
}

bool IndicatorTrace::at(std::uint64_t i) const {
  auto it = std::upper_bound(runs.begin(), runs.end(), i,
                             [](std::uint64_t v, const HitRun& r) { return v < r.start; });
  if (it == runs.begin()) return false;
  --it;
  return i < it->end();
}

std::uint64_t WindowCounts::windows_hit() const {
  std::uint64_t n = 0;
  for (std::size_t l = 1; l < z_counts.size(); ++l) n += z_counts[l];
  return n;
}

std::uint64_t WindowCounts::w_at_least(std::size_t l) const {
  if (l <= 1) return entries;
  std::uint64_t n = 0;
  for (std::size_t j = l; j < w_counts.size(); ++j) n += w_counts[j];
  return n;
}

void WindowCounts::merge(const WindowCounts& o) {
  if (z_counts.empty() && w_counts.empty() && windows == 0 && entries == 0) K = o.K;
  if (o.K != K) throw std::invalid_argument("WindowCounts::merge: different K");
  windows += o.windows;
  entries += o.entries;
  steps += o.steps;
  if (z_counts.size() < o.z_counts.size()) z_counts.resize(o.z_counts.size(), 0);
  if (w_counts.size() < o.w_counts.size()) w_counts.resize(o.w_counts.size(), 0);
  for (std::size_t i = 0; i < o.z_counts.size(); ++i) z_counts[i] += o.z_counts[i];
  for (std::size_t i = 0; i < o.w_counts.size(); ++i) w_counts[i] += o.w_counts[i];
}

namespace {

struct SlopeEvent {
  std::int64_t pos;
  int delta;
};

// Histogram of Z over centres in [lo, hi]. Z(i+1) - Z(i) = I(i+K+1) - I(i-K),
// so a run [s, e) raises the slope on [s-K-1, e-K-2] and lowers it on
// [s+K, e+K-1]; Z is piecewise linear between slope events.
void centred_histogram(const IndicatorTrace& trace, std::int64_t K, std::int64_t lo, std::int64_t hi,
                       std::vector<std::uint64_t>& hist) {
  std::vector<SlopeEvent> events;
  events.reserve(trace.runs.size() * 4);
  for (const auto& r : trace.runs) {
    const auto s = static_cast<std::int64_t>(r.start);
    const auto e = static_cast<std::int64_t>(r.end());
    events.push_back({s - K - 1, +1});
    events.push_back({e - K - 1, -1});
    events.push_back({s + K, -1});
    events.push_back({e + K, +1});
  }
  std::sort(events.begin(), events.end(),
            [](const SlopeEvent& a, const SlopeEvent& b) { return a.pos < b.pos; });

  auto add = [&](std::int64_t z, std::uint64_t n) {
    if (z <= 0 || n == 0) return;
    if (static_cast<std::size_t>(z) >= hist.size()) hist.resize(static_cast<std::size_t>(z) + 1, 0);
    hist[static_cast<std::size_t>(z)] += n;
  };

  std::int64_t z = 0;
  std::int64_t slope = 0;
  std::int64_t cur = events.empty() ? 0 : events.front().pos;
  std::size_t idx = 0;
  while (idx < events.size()) {
    const std::int64_t q = events[idx].pos;
    // Positions cur .. q-1 carry z + slope * (i - cur).
    if (q > cur && z + std::max<std::int64_t>(slope, 0) * (q - cur) > 0) {
      const std::int64_t a = std::max(cur, lo);
      const std::int64_t b = std::min(q - 1, hi);
      if (a <= b) {
        if (slope == 0) {
          add(z, static_cast<std::uint64_t>(b - a + 1));
        } else {
          for (std::int64_t i = a; i <= b; ++i) add(z + slope * (i - cur), 1);
        }
      }
    }
    z += slope * (q - cur);
    cur = q;
    while (idx < events.size() && events[idx].pos == q) {
      slope += events[idx].delta;
      ++idx;
    }
  }
}

}  // namespace

WindowCounts window_counts(const IndicatorTrace& trace, std::uint64_t K) {
  WindowCounts out;
  out.K = K;
  out.steps = trace.length;
  out.z_counts.assign(2 * K + 2, 0);
  out.w_counts.assign(K + 2, 0);
  const auto len = static_cast<std::int64_t>(trace.length);
  const auto k = static_cast<std::int64_t>(K);

  if (len >= 2 * k + 1) {
    out.windows = static_cast<std::uint64_t>(len - 2 * k);
    centred_histogram(trace, k, k, len - 1 - k, out.z_counts);
  }

  // Forward windows at every hit h with (len-1) - h >= 2K+1.
  if (len < 2 * k + 2) return out;
  const std::uint64_t last_entry = trace.length - 1 - (2 * K + 1);
  const auto& runs = trace.runs;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    const auto& r = runs[j];
    if (r.start > last_entry) break;
    const std::uint64_t stop = std::min(r.end() - 1, last_entry);
    // Hits whose whole forward window stays inside this run.
    std::uint64_t h = r.start;
    if (r.end() >= K + 1) {
      const std::uint64_t full_until = std::min(stop, r.end() - 1 - K);
      if (full_until >= h && r.end() - 1 >= K + h) {
        const std::uint64_t n = full_until - h + 1;
        out.w_counts[K + 1] += n;
        out.entries += n;
        h = full_until + 1;
      }
    }
    for (; h <= stop; ++h) {
      const std::uint64_t reach = h + K;
      std::uint64_t w = std::min(r.end() - 1, reach) - h + 1;
      for (std::size_t t = j + 1; t < runs.size() && runs[t].start <= reach; ++t) {
        w += std::min(runs[t].end() - 1, reach) - runs[t].start + 1;
      }
      out.w_counts[w] += 1;
      out.entries += 1;
    }
  }
  return out;
}

}  // namespace rtlab
