#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kipsim/histogram.hpp"

namespace kipsim {

struct EmptyInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SketchVariant { SpaceSaving, LossyCounting, DecayedCounters };

SketchVariant sketch_variant_from_string(std::string_view s);
std::string to_string(SketchVariant v);

// Top-b slice of one worker's sketch, in estimated-count units.
struct LocalHistogram {
  int worker_id = 0;
  std::vector<std::pair<std::string, double>> entries;  // count desc
  double observed = 0.0;  // total records seen (decayed alongside counts)
};

// Bounded-memory frequency counter. SpaceSaving and DecayedCounters keep at
// most `capacity` keys (DecayedCounters additionally supports decay());
// LossyCounting uses capacity as the bucket width, bounding tracked keys by
// the standard 1/eps guarantee.
class FrequencySketch {
 public:
  FrequencySketch(SketchVariant variant, std::size_t capacity);

  void offer(std::string_view key);

  // Multiplies all counts and the observed total by alpha. No-op unless the
  // variant is DecayedCounters. Tracked set is unchanged.
  void decay(double alpha);

  LocalHistogram local_top(std::size_t b) const;

  SketchVariant variant() const { return variant_; }
  std::size_t capacity() const { return capacity_; }
  double total_weight() const { return total_weight_; }
  std::size_t tracked() const;

  // Estimated count and overestimation bound for a tracked key;
  // returns false if the key is not tracked.
  bool estimate(std::string_view key, double& count, double& error) const;

 private:
  struct Counter {
    std::string key;
    double count = 0.0;
    double error = 0.0;
  };

  void offer_space_saving(std::string_view key);
  void offer_lossy_counting(std::string_view key);

  // min-heap over heap_[i].count with key -> slot index
  void sift_up(std::size_t i);
  void sift_down(std::size_t i);
  void heap_swap(std::size_t a, std::size_t b);

  SketchVariant variant_;
  std::size_t capacity_;
  double total_weight_ = 0.0;

  std::vector<Counter> heap_;
  std::unordered_map<std::string, std::size_t> index_;

  // lossy counting state
  struct LossyEntry {
    double count = 0.0;
    double delta = 0.0;
  };
  std::unordered_map<std::string, LossyEntry> lossy_;
  std::uint64_t lossy_offered_ = 0;
};

// Sums counts per key across locals and divides by the combined observed
// totals, keeping the top b relative frequencies. Throws EmptyInput when
// there are no locals or nothing was observed.
Histogram merge(const std::vector<LocalHistogram>& locals, std::size_t b);

}  // namespace kipsim
