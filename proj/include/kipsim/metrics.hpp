#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kipsim {

struct BatchReport {
  std::uint64_t batch_index = 0;
  std::vector<std::uint64_t> per_partition_counts;
  double imbalance = 1.0;  // max/mean of realized counts, >= 1
  double migration = 0.0;  // fraction of state moved, in [0, 1]
  bool repartitioned = false;
  std::uint64_t partitioner_version = 0;
  std::uint64_t heavy_key_count = 0;
  double est_maxload = 0.0;  // estimated max partition load of the active KIP
  bool degenerate = false;   // empty batch; imbalance pinned to 1.0
};

struct RunSummary {
  double mean_imbalance = 0.0;  // over post-warmup batches (index >= 1)
  double max_imbalance = 0.0;
  double mean_migration = 0.0;
  double warmup_imbalance = 0.0;  // batch 0, reported separately
  double warmup_migration = 0.0;
  std::uint64_t batches = 0;
  std::uint64_t degenerate_batches = 0;
  bool sketch_substitution = true;  // counter heuristic stood in by a sketch
  std::string config_echo;          // the resolved config, as JSON text
};

// max/mean; defined as 1.0 (degenerate) when the counts sum to zero.
double load_imbalance(const std::vector<std::uint64_t>& counts);

RunSummary summarize(const std::vector<BatchReport>& reports,
                     const std::string& config_echo);

// CSV columns: batch,imbalance,migration,repartitioned,version,heavy_keys,
// est_maxload,n0..n{N-1}. Floats are written with shortest round-trip
// precision.
void write_csv(const std::vector<BatchReport>& reports,
               const std::string& path);
std::string reports_to_csv(const std::vector<BatchReport>& reports);

void write_summary(const RunSummary& summary, const std::string& path);
std::string summary_to_json(const RunSummary& summary);

}  // namespace kipsim
