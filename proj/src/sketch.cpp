#include "kipsim/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace kipsim {

SketchVariant sketch_variant_from_string(std::string_view s) {
  if (s == "space_saving") return SketchVariant::SpaceSaving;
  if (s == "lossy_counting") return SketchVariant::LossyCounting;
  if (s == "decayed_counters") return SketchVariant::DecayedCounters;
  throw std::invalid_argument("unknown sketch variant: " + std::string(s));
}

std::string to_string(SketchVariant v) {
  switch (v) {
    case SketchVariant::SpaceSaving: return "space_saving";
    case SketchVariant::LossyCounting: return "lossy_counting";
    case SketchVariant::DecayedCounters: return "decayed_counters";
  }
  return "?";
}

FrequencySketch::FrequencySketch(SketchVariant variant, std::size_t capacity)
    : variant_(variant), capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("sketch capacity must be >= 1");
  if (variant_ != SketchVariant::LossyCounting) heap_.reserve(capacity);
}

void FrequencySketch::heap_swap(std::size_t a, std::size_t b) {
  std::swap(heap_[a], heap_[b]);
  index_[heap_[a].key] = a;
  index_[heap_[b].key] = b;
}

void FrequencySketch::sift_up(std::size_t i) {
  while (i > 0) {
    std::size_t parent = (i - 1) / 2;
    if (heap_[parent].count <= heap_[i].count) break;
    heap_swap(parent, i);
    i = parent;
  }
}

void FrequencySketch::sift_down(std::size_t i) {
  const std::size_t n = heap_.size();
  for (;;) {
    std::size_t smallest = i;
    std::size_t l = 2 * i + 1, r = 2 * i + 2;
    if (l < n && heap_[l].count < heap_[smallest].count) smallest = l;
    if (r < n && heap_[r].count < heap_[smallest].count) smallest = r;
    if (smallest == i) break;
    heap_swap(i, smallest);
    i = smallest;
  }
}

void FrequencySketch::offer(std::string_view key) {
  total_weight_ += 1.0;
  if (variant_ == SketchVariant::LossyCounting)
    offer_lossy_counting(key);
  else
    offer_space_saving(key);
}

void FrequencySketch::offer_space_saving(std::string_view key) {
  auto it = index_.find(std::string(key));
  if (it != index_.end()) {
    heap_[it->second].count += 1.0;
    sift_down(it->second);
    return;
  }
  if (heap_.size() < capacity_) {
    heap_.push_back({std::string(key), 1.0, 0.0});
    index_[heap_.back().key] = heap_.size() - 1;
    sift_up(heap_.size() - 1);
    return;
  }
  // evict the minimum-count key; the newcomer inherits its count as error
  Counter& root = heap_[0];
  index_.erase(root.key);
  double evicted = root.count;
  root.key = std::string(key);
  root.error = evicted;
  root.count = evicted + 1.0;
  index_[root.key] = 0;
  sift_down(0);
}

void FrequencySketch::offer_lossy_counting(std::string_view key) {
  ++lossy_offered_;
  const double bucket = std::floor(static_cast<double>(lossy_offered_ - 1) /
                                   static_cast<double>(capacity_)) + 1.0;
  auto it = lossy_.find(std::string(key));
  if (it != lossy_.end()) {
    it->second.count += 1.0;
  } else {
    lossy_.emplace(std::string(key), LossyEntry{1.0, bucket - 1.0});
  }
  if (lossy_offered_ % capacity_ == 0) {
    for (auto e = lossy_.begin(); e != lossy_.end();) {
      if (e->second.count + e->second.delta <= bucket)
        e = lossy_.erase(e);
      else
        ++e;
    }
  }
}

void FrequencySketch::decay(double alpha) {
  if (variant_ != SketchVariant::DecayedCounters) return;
  if (alpha <= 0.0 || alpha > 1.0)
    throw std::invalid_argument("decay alpha must be in (0, 1]");
  for (auto& c : heap_) {
    c.count *= alpha;
    c.error *= alpha;
  }
  total_weight_ *= alpha;
}

std::size_t FrequencySketch::tracked() const {
  return variant_ == SketchVariant::LossyCounting ? lossy_.size() : heap_.size();
}

bool FrequencySketch::estimate(std::string_view key, double& count,
                               double& error) const {
  if (variant_ == SketchVariant::LossyCounting) {
    auto it = lossy_.find(std::string(key));
    if (it == lossy_.end()) return false;
    count = it->second.count;
    error = it->second.delta;
    return true;
  }
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return false;
  count = heap_[it->second].count;
  error = heap_[it->second].error;
  return true;
}

LocalHistogram FrequencySketch::local_top(std::size_t b) const {
  LocalHistogram out;
  out.observed = total_weight_;
  if (variant_ == SketchVariant::LossyCounting) {
    out.entries.reserve(lossy_.size());
    for (const auto& [k, e] : lossy_) out.entries.push_back({k, e.count});
  } else {
    out.entries.reserve(heap_.size());
    for (const auto& c : heap_) out.entries.push_back({c.key, c.count});
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const auto& a, const auto& b2) {
              if (a.second != b2.second) return a.second > b2.second;
              return a.first < b2.first;
            });
  if (out.entries.size() > b) out.entries.resize(b);
  return out;
}

Histogram merge(const std::vector<LocalHistogram>& locals, std::size_t b) {
  if (locals.empty()) throw EmptyInput("merge: no local histograms");
  double observed = 0.0;
  for (const auto& l : locals) observed += l.observed;
  if (observed <= 0.0) throw EmptyInput("merge: zero observed records");

  std::map<std::string, double> counts;  // ordered for determinism
  for (const auto& l : locals)
    for (const auto& [k, c] : l.entries) counts[k] += c;

  Histogram out;
  out.capacity = b;
  out.entries.reserve(counts.size());
  for (const auto& [k, c] : counts) out.entries.push_back({k, c / observed});
  normalize_order(out);
  return out;
}

}  // namespace kipsim
