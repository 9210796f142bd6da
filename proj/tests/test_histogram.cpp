#include <doctest.h>

#include "kipsim/histogram.hpp"

using namespace kipsim;

static Histogram make(std::initializer_list<HistEntry> entries,
                      std::size_t capacity) {
  Histogram h;
  h.entries = entries;
  h.capacity = capacity;
  return h;
}

TEST_CASE("histogram validity") {
  CHECK(make({}, 4).valid());
  CHECK(make({{"a", 0.6}, {"b", 0.3}}, 4).valid());
  CHECK_FALSE(make({{"a", 0.3}, {"b", 0.6}}, 4).valid());  // not sorted
  CHECK_FALSE(make({{"a", 0.6}, {"b", 0.6}}, 1).valid());  // over capacity
  CHECK_FALSE(make({{"a", 0.6}, {"a", 0.5}}, 4).valid());  // duplicate key
  CHECK_FALSE(make({{"a", 0.7}, {"b", 0.6}}, 4).valid());  // sums above 1
}

TEST_CASE("blend with empty history returns fresh unchanged") {
  HistogramHistory hist(5, 0.5);
  Histogram fresh = make({{"a", 0.4}, {"b", 0.2}}, 4);
  Histogram out = hist.blend(fresh);
  REQUIRE(out.entries.size() == 2);
  CHECK(out.entries[0].key == "a");
  CHECK(out.entries[0].freq == doctest::Approx(0.4));
  CHECK(out.entries[1].freq == doctest::Approx(0.2));
}

TEST_CASE("gamma=1 with identical histograms is a fixed point") {
  HistogramHistory hist(2, 1.0);
  Histogram h = make({{"a", 0.5}, {"b", 0.25}}, 4);
  hist.blend(h);
  Histogram out = hist.blend(h);
  REQUIRE(out.entries.size() == 2);
  CHECK(out.entries[0].freq == doctest::Approx(0.5));
  CHECK(out.entries[1].freq == doctest::Approx(0.25));
}

TEST_CASE("gamma=0.5 weighted average over two histograms") {
  // shared key: blended = (f_new + 0.5 * f_old) / 1.5
  HistogramHistory hist(5, 0.5);
  hist.blend(make({{"a", 0.4}}, 4));
  Histogram out = hist.blend(make({{"a", 0.1}, {"b", 0.3}}, 4));

  // a: (0.1 + 0.5*0.4)/1.5 = 0.2, b: 0.3/1.5 = 0.2 -- a tie, so bytewise
  // key order decides
  REQUIRE(out.entries.size() == 2);
  CHECK(out.entries[0].key == "a");
  CHECK(out.entries[0].freq == doctest::Approx((0.1 + 0.5 * 0.4) / 1.5));
  CHECK(out.entries[1].key == "b");
  CHECK(out.entries[1].freq == doctest::Approx(0.3 / 1.5));
}

TEST_CASE("blend truncates to capacity and keeps ring bounded") {
  HistogramHistory hist(2, 0.5);
  hist.blend(make({{"a", 0.3}, {"b", 0.2}}, 2));
  hist.blend(make({{"c", 0.3}, {"d", 0.2}}, 2));
  Histogram out = hist.blend(make({{"e", 0.3}, {"f", 0.2}}, 2));
  CHECK(hist.size() == 2);
  CHECK(out.entries.size() == 2);  // a/b aged out of the ring entirely
  CHECK(out.valid());
}
