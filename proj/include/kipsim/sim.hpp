#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kipsim/histogram.hpp"
#include "kipsim/metrics.hpp"
#include "kipsim/partitioner.hpp"
#include "kipsim/sketch.hpp"
#include "kipsim/stream.hpp"

namespace kipsim {

enum class GateMode { Always, Never, CostBenefit };

struct GateSpec {
  GateMode mode = GateMode::Always;
  double benefit_margin = 0.0;
};

// Repartition iff the estimated imbalance gain exceeds the margin plus the
// (dimensionless) cost term. Pure.
bool gate_decide(const GateSpec& gate, double est_old_imbalance,
                 double est_new_imbalance, double cost);

struct SketchSettings {
  SketchVariant variant = SketchVariant::DecayedCounters;
  std::uint32_t capacity_factor = 10;  // per-worker capacity = factor * B
  double decay_alpha = 0.8;            // applied at batch boundaries
  std::uint32_t sample_every = 1;      // offer 1 in s records per worker
};

struct SimConfig {
  StreamSpec stream;
  PartitionerConfig partitioner_cfg;
  std::uint32_t num_workers = 4;
  std::uint32_t batch_size = 1;
  std::uint32_t state_window_batches = 5;
  GateSpec repartition_gate;
  SketchSettings sketch;
  bool use_history = true;  // blend fresh histograms with past ones
  std::uint32_t history_window = 5;
  double history_gamma = 0.5;
  bool single_thread = false;
  bool replay_model = false;  // gate cost = replayed batch fraction

  void validate() const;
};

// Per-key record counts over the last `window` batches; the aggregate is the
// state-size map used for migration accounting.
class SlidingState {
 public:
  explicit SlidingState(std::size_t window) : window_(window) {}

  void push(std::unordered_map<std::string, std::uint64_t> batch_counts);
  StateSizeMap aggregate() const;
  std::uint64_t total() const;
  std::size_t batches_held() const { return ring_.size(); }

 private:
  std::size_t window_;
  std::deque<std::unordered_map<std::string, std::uint64_t>> ring_;
};

// Optional per-batch instrumentation collected during a run.
struct SimTrace {
  bool capture_locals = false;
  std::vector<std::vector<std::string>> fresh_top_keys;  // sorted key sets
  std::vector<Histogram> blended;
  std::vector<std::vector<LocalHistogram>> locals;
  std::vector<std::uint64_t> explicit_route_counts;
};

// Runs the batch-replay loop: route with the current partitioner, sample
// into per-worker sketches, and at each batch boundary derive a candidate
// partitioner via kip_update and install it if the gate accepts.
// Deterministic given cfg; single- and multi-threaded runs agree exactly.
std::vector<BatchReport> run_simulation(const SimConfig& cfg,
                                        SimTrace* trace = nullptr);

// JSON config round-trip; field names mirror the SimConfig structure.
// Unknown fields are rejected.
SimConfig sim_config_from_json(const std::string& text);
std::string sim_config_to_json(const SimConfig& cfg);

// Applies "dotted.path=value" overrides onto a config JSON document.
// Throws std::invalid_argument naming the path when it does not exist.
std::string apply_overrides(const std::string& config_json,
                            const std::vector<std::string>& overrides);

}  // namespace kipsim
