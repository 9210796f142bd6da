#include "kipsim/histogram.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace kipsim {

double Histogram::total_freq() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.freq;
  return s;
}

bool Histogram::valid() const {
  if (entries.size() > capacity) return false;
  if (total_freq() > 1.0 + 1e-9) return false;
  std::unordered_set<std::string> seen;
  double prev = 2.0;
  for (const auto& e : entries) {
    if (e.freq < 0.0 || e.freq > prev) return false;
    prev = e.freq;
    if (!seen.insert(e.key).second) return false;
  }
  return true;
}

void normalize_order(Histogram& h) {
  std::sort(h.entries.begin(), h.entries.end(),
            [](const HistEntry& a, const HistEntry& b) {
              if (a.freq != b.freq) return a.freq > b.freq;
              return a.key < b.key;
            });
  if (h.entries.size() > h.capacity) h.entries.resize(h.capacity);
}

Histogram HistogramHistory::blend(const Histogram& fresh) {
  ring_.push_front(fresh);
  if (ring_.size() > window_) ring_.pop_back();

  if (ring_.size() == 1) return fresh;

  double weight_sum = 0.0;
  std::map<std::string, double> acc;  // ordered for determinism
  double w = 1.0;
  for (const auto& h : ring_) {
    weight_sum += w;
    for (const auto& e : h.entries) acc[e.key] += w * e.freq;
    w *= gamma_;
  }

  Histogram out;
  out.capacity = fresh.capacity;
  out.entries.reserve(acc.size());
  for (const auto& [key, sum] : acc)
    out.entries.push_back({key, sum / weight_sum});
  normalize_order(out);
  return out;
}

}  // namespace kipsim
