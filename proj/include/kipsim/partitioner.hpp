#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kipsim/hash.hpp"
#include "kipsim/histogram.hpp"

namespace kipsim {

struct ConfigMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PartitionerConfig {
  std::uint32_t num_partitions = 1;  // N
  std::uint32_t num_hosts = 100;     // H, virtual hash buckets, H >= N
  std::uint32_t lambda = 2;          // histogram scale factor, B = lambda * N
  double epsilon = 0.05;             // load slack, in [0, 1)
  std::uint64_t hash_seed = 0;

  std::size_t histogram_size() const {
    return static_cast<std::size_t>(lambda) * num_partitions;
  }
  // Throws std::invalid_argument on violated invariants.
  void validate() const;
};

// Routes keys uniformly onto H hosts, then hosts onto partitions through an
// explicit routing table.
struct WeightedHashPartitioner {
  std::vector<std::uint32_t> host_routing;  // length H, values in [0, N)
  std::uint64_t hash_seed = 0;
  std::uint32_t num_partitions = 1;

  std::uint32_t route(std::string_view key) const {
    return host_routing[uniform_hash(key, host_routing.size(), hash_seed)];
  }
};

// Explicit routes for the heavy keys, weighted hash for everything else.
struct KeyIsolatorPartitioner {
  std::unordered_map<std::string, std::uint32_t> explicit_routes;
  WeightedHashPartitioner weighted;
  std::uint64_t version = 0;

  std::uint32_t route(std::string_view key) const {
    auto it = explicit_routes.find(std::string(key));
    if (it != explicit_routes.end()) return it->second;
    return weighted.route(key);
  }

  std::uint32_t num_partitions() const { return weighted.num_partitions; }

  // Empty explicit routes, hosts round-robin over partitions.
  static KeyIsolatorPartitioner fresh(const PartitionerConfig& cfg);
};

struct LoadVector {
  std::vector<double> loads;  // length N
  double maxload = 0.0;       // allowed per-partition level
  double hostload = 0.0;      // average load of one virtual host

  double max() const;
};

// max(1/N, heaviest frequency) + epsilon
double compute_maxload(const Histogram& hist, const PartitionerConfig& cfg);
// (1 - sum of histogram frequencies) / H
double compute_hostload(const Histogram& hist, const PartitionerConfig& cfg);

// Which placement tier accepted each heavy key during an update.
enum class PlacementTier { Previous, HashLocation, LowestLoad };

// Produces the next partitioner from the previous one and a fresh global
// histogram: heavy keys keep their previous partition when it has room,
// fall back to their hash location, then to the lowest-load partition;
// overloaded partitions then shed hosts greedily. Pure; `prev` is not
// mutated. Throws ConfigMismatch when prev and cfg disagree on N/H/seed.
// `tiers_out`, when non-null, records the tier per histogram entry.
KeyIsolatorPartitioner kip_update(const KeyIsolatorPartitioner& prev,
                                  const Histogram& hist,
                                  const PartitionerConfig& cfg,
                                  std::vector<PlacementTier>* tiers_out = nullptr);

// Per-partition estimated load: heavy-key frequencies routed there plus
// hostload per routed host. Sums to 1 when the histogram is a proper
// relative-frequency histogram.
LoadVector estimated_loads(const KeyIsolatorPartitioner& p,
                           const Histogram& hist,
                           const PartitionerConfig& cfg);

using StateSizeMap = std::unordered_map<std::string, std::uint64_t>;

// Fraction of total state held by keys whose route differs between the two
// partitioners. Returns 0 when total state is 0.
double migration_fraction(const KeyIsolatorPartitioner& old_p,
                          const KeyIsolatorPartitioner& new_p,
                          const StateSizeMap& state);

// Versioned JSON round-trip; keys are hex-encoded.
std::string partitioner_to_json(const KeyIsolatorPartitioner& p);
KeyIsolatorPartitioner partitioner_from_json(const std::string& text);

std::string hex_encode(std::string_view raw);
std::string hex_decode(std::string_view hex);

}  // namespace kipsim
