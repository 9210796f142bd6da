#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

namespace kipsim {

struct HistEntry {
  std::string key;
  double freq = 0.0;  // fraction of the whole input, in [0, 1]
};

// Ordered top-B list of (key, relative frequency). Frequencies are relative
// to the entire stream, so they sum to <= 1; the remainder belongs to keys
// that did not make the cut.
struct Histogram {
  std::vector<HistEntry> entries;  // sorted by freq descending
  std::size_t capacity = 0;        // B

  double top_freq() const { return entries.empty() ? 0.0 : entries.front().freq; }
  double total_freq() const;
  bool valid() const;
};

// Sorts descending by freq, ties broken by bytewise key order ascending,
// and truncates to the histogram's capacity.
void normalize_order(Histogram& h);

// Ring of the last W merged histograms, blended with exponential decay to
// smooth out drift between batches.
class HistogramHistory {
 public:
  HistogramHistory(std::size_t window, double gamma)
      : window_(window), gamma_(gamma) {}

  // Pushes `fresh` into the ring and returns the gamma-weighted average
  // histogram over the ring (weight gamma^age, normalized), truncated to
  // fresh.capacity.
  Histogram blend(const Histogram& fresh);

  std::size_t size() const { return ring_.size(); }

 private:
  std::size_t window_;
  double gamma_;
  std::deque<Histogram> ring_;  // front = most recent
};

}  // namespace kipsim
