#include <doctest.h>

#include <cmath>
#include <vector>

#include "minigpt/rng.hpp"

using minigpt::RandomState;

TEST_CASE("same seed, same stream") {
  RandomState a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
}

TEST_CASE("uniform lies in [0, 1) with the right moments") {
  RandomState rng(1);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1.0 / 12).epsilon(0.02));
}

TEST_CASE("uniform_int is unbiased over a non power of two") {
  RandomState rng(2);
  const std::uint64_t k = 7;
  std::vector<double> counts(k);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = rng.uniform_int(k);
    REQUIRE(v < k);
    counts[v] += 1;
  }
  double chi2 = 0;
  for (double c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  CHECK(chi2 < 22.46);  // 6 dof, p = 0.001
  CHECK(rng.uniform_int(1) == 0);
}

TEST_CASE("normal draws have the requested moments") {
  RandomState rng(3);
  double s = 0, s2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(1.5, 0.02);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  CHECK(mean == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(std::sqrt(s2 / n - mean * mean) == doctest::Approx(0.02).epsilon(0.02));
}

TEST_CASE("split yields an independent but deterministic child") {
  RandomState a(9), b(9);
  RandomState ca = a.split(), cb = b.split();
  CHECK(ca == cb);
  CHECK(a == b);
  CHECK(ca.next_u64() != a.next_u64());
}
