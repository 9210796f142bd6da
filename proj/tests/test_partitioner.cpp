#include <doctest.h>

#include <random>

#include "kipsim/partitioner.hpp"
#include "oracles.hpp"

using namespace kipsim;

TEST_CASE("config invariants") {
  PartitionerConfig cfg;
  cfg.num_partitions = 4;
  cfg.num_hosts = 40;
  CHECK_NOTHROW(cfg.validate());
  cfg.num_hosts = 3;  // H < N
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.num_hosts = 40;
  cfg.epsilon = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.epsilon = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("route: explicit hit wins") {
  PartitionerConfig cfg{8, 80, 2, 0.05, 1};
  auto p = KeyIsolatorPartitioner::fresh(cfg);
  p.explicit_routes["hot"] = 7;
  CHECK(p.route("hot") == 7);
}

TEST_CASE("route: constant host routing") {
  PartitionerConfig cfg{4, 16, 2, 0.05, 1};
  auto p = KeyIsolatorPartitioner::fresh(cfg);
  std::fill(p.weighted.host_routing.begin(), p.weighted.host_routing.end(), 0u);
  for (int i = 0; i < 50; ++i)
    CHECK(p.route("key" + std::to_string(i)) == 0);
}

TEST_CASE("fresh KIP routes like the bare weighted composition") {
  PartitionerConfig cfg{5, 60, 2, 0.05, 42};
  auto p = KeyIsolatorPartitioner::fresh(cfg);
  CHECK(p.explicit_routes.empty());
  for (int i = 0; i < 1000; ++i) {
    std::string key = "sample" + std::to_string(i);
    const auto host = uniform_hash(key, cfg.num_hosts, cfg.hash_seed);
    CHECK(p.route(key) == p.weighted.host_routing[host]);
    CHECK(p.weighted.host_routing[host] == host % cfg.num_partitions);
  }
}

TEST_CASE("routes always land in [0, N) and repeat calls agree") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = kipsim::testing::random_small_instance(rng);
    for (int i = 0; i < 200; ++i) {
      std::string key = "k" + std::to_string(i);
      const auto r = inst.prev.route(key);
      CHECK(r < inst.cfg.num_partitions);
      CHECK(inst.prev.route(key) == r);
    }
  }
}

TEST_CASE("kip_update: empty histogram is a routing no-op") {
  PartitionerConfig cfg{4, 40, 2, 0.05, 9};
  auto prev = KeyIsolatorPartitioner::fresh(cfg);
  Histogram empty;
  empty.capacity = 8;
  auto next = kip_update(prev, empty, cfg);
  CHECK(next.version == 1);
  CHECK(next.explicit_routes.empty());
  CHECK(next.weighted.host_routing == prev.weighted.host_routing);
  for (int i = 0; i < 500; ++i) {
    std::string key = "k" + std::to_string(i);
    CHECK(next.route(key) == prev.route(key));
  }
}

TEST_CASE("kip_update: forced explicit placement of an oversized key") {
  // N=2, H=4, eps=0, f(k1)=0.6: maxload = 0.6, hostload = 0.1; no partition
  // has load < 0.6 - 0.6 = 0 at its hash location or previous slot, so k1
  // goes to the lowest-load partition, and hosts pack under 0.6.
  PartitionerConfig cfg{2, 4, 2, 0.0, 5};
  auto prev = KeyIsolatorPartitioner::fresh(cfg);
  Histogram hist;
  hist.capacity = 4;
  hist.entries = {{"k1", 0.6}};

  auto next = kip_update(prev, hist, cfg);
  REQUIRE(next.explicit_routes.count("k1") == 1);
  CHECK(next.explicit_routes.at("k1") == 0);  // lowest load, lowest index

  auto lv = estimated_loads(next, hist, cfg);
  CHECK(lv.maxload == doctest::Approx(0.6));
  CHECK(lv.hostload == doctest::Approx(0.1));
  CHECK(lv.max() <= 0.6 + 1e-9);
}

TEST_CASE("kip_update rejects mismatched configs") {
  PartitionerConfig cfg{4, 40, 2, 0.05, 9};
  auto prev = KeyIsolatorPartitioner::fresh(cfg);
  Histogram empty;
  empty.capacity = 8;

  PartitionerConfig other = cfg;
  other.num_partitions = 5;
  other.num_hosts = 50;
  CHECK_THROWS_AS(kip_update(prev, empty, other), ConfigMismatch);
  other = cfg;
  other.hash_seed = 10;
  CHECK_THROWS_AS(kip_update(prev, empty, other), ConfigMismatch);
}

TEST_CASE("kip_update keeps sticky keys in place") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = kipsim::testing::random_small_instance(rng);
    std::vector<PlacementTier> tiers;
    auto next = kip_update(inst.prev, inst.hist, inst.cfg, &tiers);
    REQUIRE(tiers.size() == inst.hist.entries.size());

    const double maxload = compute_maxload(inst.hist, inst.cfg);
    std::vector<double> running(inst.cfg.num_partitions, 0.0);
    for (std::size_t i = 0; i < inst.hist.entries.size(); ++i) {
      const auto& e = inst.hist.entries[i];
      const auto prev_part = inst.prev.route(e.key);
      if (running[prev_part] < maxload - e.freq) {
        // previous partition had room: the key must have stayed there
        CHECK(tiers[i] == PlacementTier::Previous);
        CHECK(next.explicit_routes.at(e.key) == prev_part);
      }
      running[next.explicit_routes.at(e.key)] += e.freq;
    }
  }
}

TEST_CASE("kip_update is pure and deterministic") {
  std::mt19937_64 rng(31);
  auto inst = kipsim::testing::random_small_instance(rng);
  auto prev_copy = inst.prev;

  auto a = kip_update(inst.prev, inst.hist, inst.cfg);
  auto b = kip_update(inst.prev, inst.hist, inst.cfg);

  CHECK(inst.prev.explicit_routes == prev_copy.explicit_routes);
  CHECK(inst.prev.weighted.host_routing == prev_copy.weighted.host_routing);
  CHECK(inst.prev.version == prev_copy.version);

  CHECK(a.explicit_routes == b.explicit_routes);
  CHECK(a.weighted.host_routing == b.weighted.host_routing);
  CHECK(a.version == inst.prev.version + 1);
  CHECK(b.version == inst.prev.version + 1);
}

TEST_CASE("kip_update meets the brute-force feasibility bound") {
  // smaller-count version of the acceptance property
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = kipsim::testing::random_small_instance(rng);
    const double maxload = compute_maxload(inst.hist, inst.cfg);
    const double hostload = compute_hostload(inst.hist, inst.cfg);

    std::vector<double> freqs;
    for (const auto& e : inst.hist.entries) freqs.push_back(e.freq);
    if (!kipsim::testing::feasible_assignment_exists(
            freqs, inst.cfg.num_partitions, inst.cfg.num_hosts, hostload,
            maxload))
      continue;

    auto next = kip_update(inst.prev, inst.hist, inst.cfg);
    auto lv = estimated_loads(next, inst.hist, inst.cfg);
    CHECK(lv.max() <= maxload + hostload + 1e-9);
  }
}

TEST_CASE("estimated_loads: empty histogram, even hosts") {
  PartitionerConfig cfg{4, 40, 2, 0.0, 3};
  auto p = KeyIsolatorPartitioner::fresh(cfg);
  Histogram empty;
  empty.capacity = 8;
  auto lv = estimated_loads(p, empty, cfg);
  for (double l : lv.loads) CHECK(l == doctest::Approx(0.25));
}

TEST_CASE("estimated_loads: degenerate single key with frequency 1") {
  PartitionerConfig cfg{3, 3, 1, 0.0, 3};
  auto p = KeyIsolatorPartitioner::fresh(cfg);
  p.explicit_routes["all"] = 0;
  Histogram hist;
  hist.capacity = 3;
  hist.entries = {{"all", 1.0}};
  auto lv = estimated_loads(p, hist, cfg);
  CHECK(lv.hostload == doctest::Approx(0.0));
  CHECK(lv.loads[0] == doctest::Approx(1.0));
  CHECK(lv.loads[1] == doctest::Approx(0.0));
  CHECK(lv.loads[2] == doctest::Approx(0.0));
}

TEST_CASE("estimated_loads always sums to 1") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = kipsim::testing::random_small_instance(rng);
    auto lv = estimated_loads(inst.prev, inst.hist, inst.cfg);
    double sum = 0.0;
    for (double l : lv.loads) sum += l;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("migration_fraction basics") {
  PartitionerConfig cfg{4, 40, 2, 0.05, 3};
  auto a = KeyIsolatorPartitioner::fresh(cfg);
  auto b = a;

  StateSizeMap state{{"x", 10}, {"y", 10}};
  CHECK(migration_fraction(a, b, state) == doctest::Approx(0.0));
  CHECK(migration_fraction(a, b, {}) == doctest::Approx(0.0));

  // reroute exactly one of two equal-state keys
  b.explicit_routes["x"] = (a.route("x") + 1) % 4;
  CHECK(migration_fraction(a, b, state) == doctest::Approx(0.5));
}

TEST_CASE("migration_fraction equals the per-key brute force") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = kipsim::testing::random_small_instance(rng);
    auto next = kip_update(inst.prev, inst.hist, inst.cfg);

    StateSizeMap state;
    std::uniform_int_distribution<std::uint64_t> spick(0, 20);
    for (int i = 0; i < 1000; ++i)
      state["sk" + std::to_string(i)] = spick(rng);

    std::uint64_t total = 0, moved = 0;
    for (const auto& [k, sz] : state) {
      total += sz;
      if (inst.prev.route(k) != next.route(k)) moved += sz;
    }
    const double expected =
        total == 0 ? 0.0
                   : static_cast<double>(moved) / static_cast<double>(total);
    CHECK(migration_fraction(inst.prev, next, state) ==
          doctest::Approx(expected));
  }
}

TEST_CASE("json round-trip is lossless, including binary keys") {
  PartitionerConfig cfg{4, 16, 2, 0.05, 0xfeedULL};
  auto p = KeyIsolatorPartitioner::fresh(cfg);
  p.version = 12;
  p.explicit_routes[std::string("\x00\x01\xff bin", 7)] = 2;
  p.explicit_routes["plain"] = 3;
  std::mt19937_64 rng(2);
  for (auto& r : p.weighted.host_routing)
    r = static_cast<std::uint32_t>(rng() % 4);

  auto q = partitioner_from_json(partitioner_to_json(p));
  CHECK(q.version == p.version);
  CHECK(q.weighted.num_partitions == p.weighted.num_partitions);
  CHECK(q.weighted.hash_seed == p.weighted.hash_seed);
  CHECK(q.weighted.host_routing == p.weighted.host_routing);
  CHECK(q.explicit_routes == p.explicit_routes);
}

TEST_CASE("hex codec") {
  CHECK(hex_encode("") == "");
  CHECK(hex_encode("ab") == "6162");
  CHECK(hex_decode("6162") == "ab");
  CHECK_THROWS_AS(hex_decode("0"), std::invalid_argument);
  CHECK_THROWS_AS(hex_decode("zz"), std::invalid_argument);
}
