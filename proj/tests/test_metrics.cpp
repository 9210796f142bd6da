#include <doctest.h>

#include <random>
#include <sstream>

#include "kipsim/metrics.hpp"

using namespace kipsim;

namespace {

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, delim)) out.push_back(part);
  return out;
}

}  // namespace

TEST_CASE("load_imbalance examples") {
  CHECK(load_imbalance({10, 10, 10, 10}) == doctest::Approx(1.0));
  CHECK(load_imbalance({30, 10, 10, 10}) == doctest::Approx(2.0));
  CHECK(load_imbalance({0, 0, 0}) == doctest::Approx(1.0));  // degenerate
  CHECK(load_imbalance({7}) == doctest::Approx(1.0));
}

TEST_CASE("load_imbalance matches brute force and is >= 1") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::uint64_t> pick(0, 1000);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint64_t> counts(1 + rng() % 16);
    std::uint64_t total = 0;
    for (auto& c : counts) {
      c = pick(rng);
      total += c;
    }
    const double got = load_imbalance(counts);
    if (total == 0) {
      CHECK(got == doctest::Approx(1.0));
      continue;
    }
    std::uint64_t mx = 0;
    for (auto c : counts) mx = std::max(mx, c);
    CHECK(got == doctest::Approx(static_cast<double>(mx) * counts.size() /
                                 static_cast<double>(total)));
    CHECK(got >= 1.0 - 1e-12);
  }
}

TEST_CASE("empty report list yields a header-only CSV") {
  const std::string csv = reports_to_csv({});
  CHECK(csv ==
        "batch,imbalance,migration,repartitioned,version,heavy_keys,"
        "est_maxload\n");
}

TEST_CASE("one-batch CSV parses back to the report") {
  BatchReport r;
  r.batch_index = 0;
  r.per_partition_counts = {40, 35, 25};
  r.imbalance = 1.2;
  r.migration = 0.0625;
  r.repartitioned = true;
  r.partitioner_version = 1;
  r.heavy_key_count = 6;
  r.est_maxload = 0.41231231231231239;

  const std::string csv = reports_to_csv({r});
  auto lines = split(csv, '\n');
  REQUIRE(lines.size() == 2);

  auto cols = split(lines[1], ',');
  REQUIRE(cols.size() == 10);
  CHECK(std::stoull(cols[0]) == r.batch_index);
  CHECK(std::stod(cols[1]) == r.imbalance);  // full precision round-trip
  CHECK(std::stod(cols[2]) == r.migration);
  CHECK(cols[3] == "1");
  CHECK(std::stoull(cols[4]) == r.partitioner_version);
  CHECK(std::stoull(cols[5]) == r.heavy_key_count);
  CHECK(std::stod(cols[6]) == r.est_maxload);
  CHECK(std::stoull(cols[7]) == 40);
  CHECK(std::stoull(cols[8]) == 35);
  CHECK(std::stoull(cols[9]) == 25);
}

TEST_CASE("summary aggregates match recomputation from the reports") {
  std::vector<BatchReport> reports;
  for (int i = 0; i < 6; ++i) {
    BatchReport r;
    r.batch_index = i;
    r.per_partition_counts = {10, 10};
    r.imbalance = 1.0 + 0.1 * i;
    r.migration = 0.01 * i;
    reports.push_back(r);
  }
  RunSummary s = summarize(reports, "");
  CHECK(s.batches == 6);
  CHECK(s.warmup_imbalance == doctest::Approx(1.0));

  // post-warmup means recomputed independently
  double imb = 0, mig = 0, mx = 0;
  for (int i = 1; i < 6; ++i) {
    imb += reports[i].imbalance;
    mig += reports[i].migration;
    mx = std::max(mx, reports[i].imbalance);
  }
  CHECK(s.mean_imbalance == doctest::Approx(imb / 5));
  CHECK(s.mean_migration == doctest::Approx(mig / 5));
  CHECK(s.max_imbalance == doctest::Approx(mx));
}

TEST_CASE("summary JSON is stable and substitution-flagged") {
  RunSummary s;
  s.batches = 1;
  const std::string j = summary_to_json(s);
  CHECK(j.find("\"sketch_substitution\": true") != std::string::npos);
  CHECK(j.find("\"mean_imbalance\"") != std::string::npos);
}
