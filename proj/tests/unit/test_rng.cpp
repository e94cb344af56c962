#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "conewalk/parallel.hpp"
#include "conewalk/rng.hpp"

using namespace conewalk;

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same seed gives the same sequence") {
  RngStream a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("advanced(n) continues the stream after n draws") {
  RngStream a(9, 3);
  const RngStream skip = a.advanced(17);
  for (int i = 0; i < 17; ++i) (void)a.next_u64();
  CHECK(a == skip);
  RngStream b = skip;
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("children are distinct and reproducible") {
  const RngStream root(5);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 256; ++i) {
    RngStream c1 = root.child(i);
    RngStream c2 = root.child(i);
    const auto v = c1.next_u64();
    CHECK(v == c2.next_u64());
    firsts.insert(v);
  }
  CHECK(firsts.size() == 256);
  // A child does not depend on how far the parent has advanced.
  CHECK(root.advanced(100).child(7) == root.child(7));
}

TEST_CASE("uniform draws lie in range and have the right mean") {
  RngStream r(11);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = r.uniform_open();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
    sum += u;
  }
  // 6 standard errors of a uniform mean.
  CHECK(std::abs(sum / n - 0.5) < 6.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("normal draws have unit variance") {
  RngStream r(12);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
  }
  CHECK(std::abs(s1 / n) < 6.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 6.0 * std::sqrt(2.0 / n));
}

TEST_CASE("parallel_for covers every index once at any thread count") {
  for (unsigned t : {1u, 3u, 16u}) {
    set_thread_count(t);
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  set_thread_count(0);
}

TEST_CASE("parallel_for rethrows a worker exception") {
  set_thread_count(4);
  CHECK_THROWS_AS(parallel_for(100, [](std::size_t b, std::size_t) {
                    if (b > 0) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  set_thread_count(0);
}
