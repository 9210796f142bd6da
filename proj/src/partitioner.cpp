#include "kipsim/partitioner.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

namespace kipsim {

void PartitionerConfig::validate() const {
  if (num_partitions < 1)
    throw std::invalid_argument("num_partitions must be >= 1");
  if (num_hosts < num_partitions)
    throw std::invalid_argument("num_hosts must be >= num_partitions");
  if (lambda < 1) throw std::invalid_argument("lambda must be >= 1");
  if (epsilon < 0.0 || epsilon >= 1.0)
    throw std::invalid_argument("epsilon must be in [0, 1)");
}

KeyIsolatorPartitioner KeyIsolatorPartitioner::fresh(
    const PartitionerConfig& cfg) {
  cfg.validate();
  KeyIsolatorPartitioner p;
  p.weighted.num_partitions = cfg.num_partitions;
  p.weighted.hash_seed = cfg.hash_seed;
  p.weighted.host_routing.resize(cfg.num_hosts);
  for (std::uint32_t h = 0; h < cfg.num_hosts; ++h)
    p.weighted.host_routing[h] = h % cfg.num_partitions;
  p.version = 0;
  return p;
}

double LoadVector::max() const {
  double m = 0.0;
  for (double v : loads) m = std::max(m, v);
  return m;
}

double compute_maxload(const Histogram& hist, const PartitionerConfig& cfg) {
  return std::max(1.0 / cfg.num_partitions, hist.top_freq()) + cfg.epsilon;
}

double compute_hostload(const Histogram& hist, const PartitionerConfig& cfg) {
  return (1.0 - hist.total_freq()) / cfg.num_hosts;
}

static void check_compatible(const KeyIsolatorPartitioner& prev,
                             const PartitionerConfig& cfg) {
  if (prev.weighted.num_partitions != cfg.num_partitions ||
      prev.weighted.host_routing.size() != cfg.num_hosts ||
      prev.weighted.hash_seed != cfg.hash_seed)
    throw ConfigMismatch(
        "kip_update: partitioner and config disagree on N/H/seed");
}

KeyIsolatorPartitioner kip_update(const KeyIsolatorPartitioner& prev,
                                  const Histogram& hist,
                                  const PartitionerConfig& cfg,
                                  std::vector<PlacementTier>* tiers_out) {
  cfg.validate();
  check_compatible(prev, cfg);

  const std::uint32_t n = cfg.num_partitions;
  const double maxload = compute_maxload(hist, cfg);
  const double hostload = compute_hostload(hist, cfg);

  KeyIsolatorPartitioner next;
  next.weighted = prev.weighted;
  next.version = prev.version + 1;
  if (tiers_out) tiers_out->clear();

  // Heavy-key placement. Loads here cover placed heavy keys only; host load
  // is layered on afterwards.
  std::vector<double> loads(n, 0.0);
  for (const auto& e : hist.entries) {
    const double f = e.freq;
    std::uint32_t p = prev.route(e.key);
    PlacementTier tier = PlacementTier::Previous;
    if (loads[p] >= maxload - f) {
      p = next.weighted.route(e.key);
      tier = PlacementTier::HashLocation;
      if (loads[p] >= maxload - f) {
        p = 0;
        for (std::uint32_t i = 1; i < n; ++i)
          if (loads[i] < loads[p]) p = i;
        tier = PlacementTier::LowestLoad;
      }
    }
    next.explicit_routes[e.key] = p;
    loads[p] += f;
    if (tiers_out) tiers_out->push_back(tier);
  }

  // Layer in the host loads, then shed hosts from overloaded partitions into
  // the first partitions that still have room.
  std::vector<std::uint32_t>& routing = next.weighted.host_routing;
  for (std::uint32_t r : routing) loads[r] += hostload;

  if (hostload > 0.0) {
    for (std::uint32_t p = 0; p < n; ++p) {
      if (loads[p] <= maxload) continue;
      for (std::size_t h = 0; h < routing.size() && loads[p] > maxload; ++h) {
        if (routing[h] != p) continue;
        std::uint32_t dest = n;
        for (std::uint32_t q = 0; q < n; ++q) {
          if (q != p && loads[q] < maxload - hostload) {
            dest = q;
            break;
          }
        }
        if (dest == n) break;  // nowhere to go; leave residual imbalance
        routing[h] = dest;
        loads[p] -= hostload;
        loads[dest] += hostload;
      }
    }
  }

  return next;
}

LoadVector estimated_loads(const KeyIsolatorPartitioner& p,
                           const Histogram& hist,
                           const PartitionerConfig& cfg) {
  LoadVector lv;
  lv.maxload = compute_maxload(hist, cfg);
  lv.hostload = compute_hostload(hist, cfg);
  lv.loads.assign(cfg.num_partitions, 0.0);
  for (const auto& e : hist.entries) lv.loads[p.route(e.key)] += e.freq;
  for (std::uint32_t r : p.weighted.host_routing) lv.loads[r] += lv.hostload;
  return lv;
}

double migration_fraction(const KeyIsolatorPartitioner& old_p,
                          const KeyIsolatorPartitioner& new_p,
                          const StateSizeMap& state) {
  if (old_p.num_partitions() != new_p.num_partitions())
    throw ConfigMismatch("migration_fraction: partition counts differ");
  std::uint64_t total = 0, moved = 0;
  for (const auto& [key, size] : state) {
    total += size;
    if (old_p.route(key) != new_p.route(key)) moved += size;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(moved) / static_cast<double>(total);
}

std::string hex_encode(std::string_view raw) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(raw.size() * 2);
  for (unsigned char c : raw) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xf]);
  }
  return out;
}

std::string hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0)
    throw std::invalid_argument("hex string has odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("invalid hex digit");
  };
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2)
    out.push_back(static_cast<char>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  return out;
}

std::string partitioner_to_json(const KeyIsolatorPartitioner& p) {
  nlohmann::ordered_json j;
  j["version"] = p.version;
  j["num_partitions"] = p.weighted.num_partitions;
  j["num_hosts"] = p.weighted.host_routing.size();
  j["hash_seed"] = p.weighted.hash_seed;
  j["host_routing"] = p.weighted.host_routing;

  std::map<std::string, std::uint32_t> sorted(p.explicit_routes.begin(),
                                              p.explicit_routes.end());
  auto routes = nlohmann::ordered_json::array();
  for (const auto& [key, part] : sorted)
    routes.push_back({{"key_hex", hex_encode(key)}, {"partition", part}});
  j["explicit_routes"] = std::move(routes);
  return j.dump(2);
}

KeyIsolatorPartitioner partitioner_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  KeyIsolatorPartitioner p;
  p.version = j.at("version").get<std::uint64_t>();
  p.weighted.num_partitions = j.at("num_partitions").get<std::uint32_t>();
  p.weighted.hash_seed = j.at("hash_seed").get<std::uint64_t>();
  p.weighted.host_routing =
      j.at("host_routing").get<std::vector<std::uint32_t>>();
  if (p.weighted.host_routing.size() != j.at("num_hosts").get<std::size_t>())
    throw std::invalid_argument("host_routing length != num_hosts");
  for (const auto& r : j.at("explicit_routes")) {
    std::uint32_t part = r.at("partition").get<std::uint32_t>();
    if (part >= p.weighted.num_partitions)
      throw std::invalid_argument("explicit route partition out of range");
    p.explicit_routes[hex_decode(r.at("key_hex").get<std::string>())] = part;
  }
  for (std::uint32_t r : p.weighted.host_routing)
    if (r >= p.weighted.num_partitions)
      throw std::invalid_argument("host route out of range");
  return p;
}

}  // namespace kipsim
