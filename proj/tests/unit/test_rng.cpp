#include <doctest.h>

#include <set>
#include <vector>

#include "htem/parallel.hpp"
#include "htem/rng.hpp"
#include "helpers.hpp"

using htem::RngStream;

TEST_CASE("philox matches the Random123 known-answer vectors") {
  // Known answers for philox4x64-10 from the Random123 distribution.
  auto zero = htem::philox4x64({0, 0, 0, 0}, {0, 0});
  CHECK(zero[0] == 0x16554d9eca36314cull);
  CHECK(zero[1] == 0xdb20fe9d672d0fdcull);
  CHECK(zero[2] == 0xd7e772cee186176bull);
  CHECK(zero[3] == 0x7e68b68aec7ba23bull);
  auto ones = htem::philox4x64({~0ull, ~0ull, ~0ull, ~0ull}, {~0ull, ~0ull});
  CHECK(ones[0] == 0x87b092c3013fe90bull);
  CHECK(ones[1] == 0x438c3c67be8d0224ull);
  CHECK(ones[2] == 0x9cc7d7c69cd777b6ull);
  CHECK(ones[3] == 0xa09caebf594f0ba0ull);
  auto pi = htem::philox4x64({0x243f6a8885a308d3ull, 0x13198a2e03707344ull,
                              0xa4093822299f31d0ull, 0x082efa98ec4e6c89ull},
                             {0x452821e638d01377ull, 0xbe5466cf34e90c6cull});
  CHECK(pi[0] == 0xa528f45403e61d95ull);
  CHECK(pi[1] == 0x38c72dbd566e9788ull);
  CHECK(pi[2] == 0xa5a1610e72fd18b5ull);
  CHECK(pi[3] == 0x57bd43b5e52b7fe6ull);
}

TEST_CASE("streams are pure functions of (seed, stream_id)") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
  }
}

TEST_CASE("copies fork a stream") {
  RngStream a(1, 2);
  a.next_u64();
  RngStream b = a;
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform stays in the open unit interval") {
  CHECK(RngStream::to_open_unit(0) > 0.0);
  CHECK(RngStream::to_open_unit(~0ull) < 1.0);
  CHECK(RngStream::to_open_unit(~0ull) == 1.0 - 0x1.0p-53);
  CHECK(RngStream::to_open_unit(0) == 0x1.0p-53);
  RngStream s(3, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // mean 1/2, sd 1/sqrt(12 n)
  CHECK(std::abs(sum / n - 0.5) < 5.0 / std::sqrt(12.0 * n));
}

TEST_CASE("derived seeds do not collide on small tags") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s)
    for (std::uint64_t t = 0; t < 200; ++t) seen.insert(htem::derive_seed(s, t));
  CHECK(seen.size() == 20u * 200u);
}

TEST_CASE("parallel_for visits each index once for any worker count") {
  for (int threads : {1, 2, 3, 8}) {
    testing::ThreadsGuard g(threads);
    CHECK(htem::worker_count() == static_cast<std::size_t>(threads));
    for (std::size_t n : {0u, 1u, 7u, 1000u}) {
      std::vector<int> hits(n, 0);
      htem::parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) ++hits[i];
      });
      for (int h : hits) CHECK(h == 1);
    }
  }
}

TEST_CASE("parallel_for rethrows the lowest failing chunk") {
  testing::ThreadsGuard g(4);
  try {
    htem::parallel_for(100, [](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        if (i == 30 || i == 80) throw std::runtime_error(std::to_string(i));
    });
    FAIL("no exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "30");
  }
}
