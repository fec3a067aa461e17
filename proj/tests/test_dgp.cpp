#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <vector>

#include "uel/dataset.hpp"
#include "uel/dgp.hpp"

using Catch::Approx;

TEST_CASE("uniform features: range, determinism, column means") {
  uel::Rng r1(5);
  const auto single = uel::gen_uniform_features(1, 1, r1);
  REQUIRE(single.size() == 1);
  CHECK(single[0] >= 0.0);
  CHECK(single[0] <= 1.0);

  uel::Rng a(11), b(11);
  const auto fa = uel::gen_uniform_features(50, 3, a);
  const auto fb = uel::gen_uniform_features(50, 3, b);
  CHECK(fa == fb);  // bitwise identical under the same seed

  const int n = 10000, d = 6;
  uel::Rng r2(123);
  const auto features = uel::gen_uniform_features(n, d, r2);
  for (int j = 0; j < d; ++j) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += features[static_cast<std::size_t>(i) * d + j];
    mean /= n;
    CHECK(std::fabs(mean - 0.5) < 0.02);  // ~7 SE at SE = 1/sqrt(12 n)
  }
}

TEST_CASE("design means at fixed points") {
  const std::vector<double> zeros(6, 0.0);
  const std::vector<double> x04(6, 0.4);

  CHECK(uel::mlr_mean(zeros) == 1.0);
  CHECK(uel::mlr_mean(x04) == Approx(0.6).margin(1e-12));
  CHECK(uel::mars_mean(zeros) == Approx(0.005).margin(1e-15));
  CHECK(uel::mars_mean(x04) == Approx(0.526754).margin(1e-6));

  CHECK(uel::true_mean(uel::Dgp::MLR, x04) == Approx(0.6).margin(1e-12));
  CHECK(uel::true_mean(uel::Dgp::MARS, x04) == Approx(0.526754).margin(1e-6));
  CHECK(uel::true_mean(uel::Dgp::MLR, zeros) == 1.0);

  CHECK_THROWS_AS(uel::dgp_from_string("NOPE"), std::invalid_argument);
}

TEST_CASE("mars mean ignores the sixth feature") {
  std::vector<double> x = {0.2, 0.8, 0.5, 0.1, 0.9, 0.0};
  const double base = uel::mars_mean(x);
  x[5] = 1.0;
  CHECK(uel::mars_mean(x) == base);
}

TEST_CASE("dimension requirements") {
  uel::Rng rng(1);
  CHECK_THROWS_AS(uel::gen_mlr(10, 3, rng), std::invalid_argument);
  CHECK_THROWS_AS(uel::gen_mars(10, 4, rng), std::invalid_argument);
}

TEST_CASE("responses are the design mean plus 2-sigma noise") {
  const int n = 100000;
  uel::Rng rng(321);
  const uel::Dataset data = uel::gen_mlr(n, 6, rng);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::span<const double> row(data.features.data() + static_cast<std::size_t>(i) * 6, 6);
    const double resid = data.y(i) - uel::mlr_mean(row);
    sum += resid;
    sum_sq += resid * resid;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::fabs(mean) < 4.0 * 2.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 4.0) < 0.15);
}

TEST_CASE("mean-zero residuals hold for MARS too") {
  const int n = 20000;
  uel::Rng rng(77);
  const uel::Dataset data = uel::gen_mars(n, 6, rng);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::span<const double> row(data.features.data() + static_cast<std::size_t>(i) * 6, 6);
    sum += data.y(i) - uel::mars_mean(row);
  }
  CHECK(std::fabs(sum / n) < 4.0 * 2.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("same seed regenerates the identical dataset") {
  uel::Rng a(555), b(555);
  const uel::Dataset da = uel::gen_mars(200, 6, a);
  const uel::Dataset db = uel::gen_mars(200, 6, b);
  CHECK(da.features == db.features);
  CHECK(da.responses == db.responses);
}

TEST_CASE("csv round trip and schema errors") {
  const char* path = "test_dgp_fixture.csv";
  {
    std::ofstream out(path);
    out << "x1,x2,y\n0.1,0.2,3.5\n0.9,0.4,-1.25\n";
  }
  const uel::Dataset data = uel::load_csv(path);
  REQUIRE(data.n == 2);
  REQUIRE(data.d == 2);
  CHECK(data.x(0, 0) == 0.1);
  CHECK(data.x(1, 1) == 0.4);
  CHECK(data.y(1) == -1.25);

  {
    std::ofstream out(path);
    out << "x1,x2,y\n0.1,oops,3.5\n";
  }
  CHECK_THROWS_WITH(uel::load_csv(path), Catch::Matchers::ContainsSubstring("x2"));

  {
    std::ofstream out(path);
    out << "x1,z2,y\n0.1,0.2,3.5\n";
  }
  CHECK_THROWS_AS(uel::load_csv(path), std::invalid_argument);

  {
    std::ofstream out(path);
    out << "x1,x2,y\n0.1,1.2,3.5\n";
  }
  CHECK_THROWS_WITH(uel::load_csv(path), Catch::Matchers::ContainsSubstring("out of [0,1]"));
  std::remove(path);
}
