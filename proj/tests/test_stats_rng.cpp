#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "uel/rng.hpp"
#include "uel/stats.hpp"

using Catch::Approx;

// Reference values frozen from an independent high-precision evaluation of
// the inverse normal CDF (published quantile tables agree to the digits shown).
TEST_CASE("normal quantile matches the independent oracle") {
  struct Case {
    double p, expected;
  };
  const Case cases[] = {
      {1e-300, -37.0470962993612},
      {1e-12, -7.034483825301131},
      {0.01, -2.3263478740408408},
      {0.1, -1.2815515655446004},
      {0.3, -0.5244005127080409},
      {0.5, 0.0},
      {0.7, 0.5244005127080407},
      {0.975, 1.959963984540054},
      {0.999999999999, 7.0344869100478356},
  };
  for (const auto& c : cases) {
    CHECK(uel::normal_quantile(c.p) == Approx(c.expected).margin(1e-12));
  }
  CHECK_THROWS_AS(uel::normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(uel::normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("chi-squared quantile, one degree of freedom") {
  CHECK(uel::chi2_quantile_1df(0.0) == 0.0);
  CHECK(std::fabs(uel::chi2_quantile_1df(0.95) - 3.841459) < 1e-6);
  CHECK(std::fabs(uel::chi2_quantile_1df(0.5) - 0.454936) < 1e-6);
  CHECK(uel::chi2_quantile_1df(0.9) == Approx(2.705543454095404).margin(1e-10));
  CHECK(uel::chi2_quantile_1df(0.99) == Approx(6.6348966010212145).margin(1e-10));
  CHECK_THROWS_AS(uel::chi2_quantile_1df(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(uel::chi2_quantile_1df(1.0), std::invalid_argument);
}

TEST_CASE("rng streams are deterministic and well-ranged") {
  uel::Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }

  uel::Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = r.uniform_open();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("derived streams differ by tag") {
  const std::uint64_t base = 12345;
  CHECK(uel::derive_seed(base, 1) != uel::derive_seed(base, 2));
  CHECK(uel::derive_seed(base, 1, 2) != uel::derive_seed(base, 2, 1));
  CHECK(uel::derive_seed(base, 1, 2) == uel::derive_seed(base, 1, 2));
}

TEST_CASE("below produces the full range uniformly enough") {
  uel::Rng r(1);
  std::vector<int> counts(5, 0);
  const int draws = 50000;
  for (int i = 0; i < draws; ++i) {
    const auto x = r.below(5);
    REQUIRE(x < 5);
    ++counts[static_cast<std::size_t>(x)];
  }
  for (const int c : counts) {
    // 6 sigma around draws/5 for a Binomial(draws, 1/5)
    CHECK(std::fabs(c - draws / 5.0) < 6.0 * std::sqrt(draws * 0.2 * 0.8));
  }
}

TEST_CASE("sample_sorted draws distinct sorted indices") {
  uel::Rng r(99);
  for (int rep = 0; rep < 100; ++rep) {
    const auto sample = r.sample_sorted(20, 7);
    REQUIRE(sample.size() == 7);
    CHECK(std::is_sorted(sample.begin(), sample.end()));
    const std::set<int> unique(sample.begin(), sample.end());
    CHECK(unique.size() == 7);
    CHECK(sample.front() >= 0);
    CHECK(sample.back() < 20);
  }
}

TEST_CASE("normal deviates have the right first two moments") {
  uel::Rng r(2024);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 1.0) < 0.02);
}
