#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <vector>

#include "uel/dgp.hpp"
#include "uel/ensemble.hpp"
#include "uel/ensemble_json.hpp"

using Catch::Approx;

namespace {

uel::Dataset random_dataset(int n, int d, std::uint64_t seed) {
  uel::Rng rng(seed);
  uel::Dataset data;
  data.n = n;
  data.d = d;
  data.features = uel::gen_uniform_features(n, d, rng);
  data.responses.resize(static_cast<std::size_t>(n));
  for (auto& y : data.responses) y = rng.normal();
  return data;
}

}  // namespace

TEST_CASE("draw_subsamples: structure, determinism, frequency") {
  uel::Rng rng(17);
  const auto sets = uel::draw_subsamples(10, 4, 200, rng);
  REQUIRE(sets.size() == 200);
  for (const auto& set : sets) {
    REQUIRE(set.size() == 4);
    CHECK(std::is_sorted(set.begin(), set.end()));
    CHECK(std::set<int>(set.begin(), set.end()).size() == 4);
    CHECK(set.front() >= 0);
    CHECK(set.back() < 10);
  }

  uel::Rng a(5), b(5);
  CHECK(uel::draw_subsamples(7, 3, 50, a) == uel::draw_subsamples(7, 3, 50, b));

  // n = 2, s = 1: index 0 is drawn with probability 1/2
  uel::Rng freq_rng(29);
  const auto draws = uel::draw_subsamples(2, 1, 10000, freq_rng);
  int zeros = 0;
  for (const auto& set : draws) zeros += set[0] == 0 ? 1 : 0;
  CHECK(std::fabs(zeros / 10000.0 - 0.5) < 0.02);

  CHECK_THROWS_AS(uel::draw_subsamples(5, 5, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(uel::draw_subsamples(5, 2, 0, rng), std::invalid_argument);
}

TEST_CASE("constant responses give theta_hat equal to the constant") {
  uel::Dataset data = random_dataset(30, 3, 3);
  std::fill(data.responses.begin(), data.responses.end(), 4.25);
  const std::vector<double> x0 = {0.4, 0.4, 0.4};
  const uel::EnsembleFit fit = uel::fit_forest(data, x0, 10, 50, uel::TreeParams{}, 7);
  CHECK(fit.theta_hat == 4.25);
  CHECK(uel::constant_kernel(fit));
  CHECK(uel::kernel_variance(fit) == 0.0);
}

TEST_CASE("B = 1 makes theta_hat the single tree value") {
  const uel::Dataset data = random_dataset(20, 2, 5);
  const std::vector<double> x0 = {0.5, 0.5};
  const uel::EnsembleFit fit = uel::fit_forest(data, x0, 8, 1, uel::TreeParams{}, 11);
  REQUIRE(fit.tree_values.size() == 1);
  CHECK(fit.theta_hat == fit.tree_values[0]);
}

TEST_CASE("theta_hat is the mean of the tree values") {
  const uel::Dataset data = random_dataset(40, 3, 9);
  const std::vector<double> x0 = {0.3, 0.3, 0.3};
  const uel::EnsembleFit fit = uel::fit_forest(data, x0, 12, 77, uel::TreeParams{}, 13);
  double mean = 0.0;
  for (const double h : fit.tree_values) mean += h;
  mean /= 77.0;
  CHECK(fit.theta_hat == Approx(mean).margin(77.0 * 1e-16));
  for (const auto& set : fit.memberships) {
    REQUIRE(set.size() == 12);
    CHECK(std::is_sorted(set.begin(), set.end()));
  }
}

TEST_CASE("kernel variance arithmetic") {
  uel::EnsembleFit fit;
  fit.n = 10;
  fit.s = 2;
  fit.B = 3;
  fit.tree_values = {1.0, 2.0, 3.0};
  fit.theta_hat = 2.0;
  CHECK(uel::kernel_variance(fit) == Approx(2.0 / 3.0).margin(1e-15));

  std::swap(fit.tree_values[0], fit.tree_values[2]);
  CHECK(uel::kernel_variance(fit) == Approx(2.0 / 3.0).margin(1e-12));

  fit.tree_values = {5.0, 5.0, 5.0};
  fit.theta_hat = 5.0;
  CHECK(uel::kernel_variance(fit) == 0.0);
}

TEST_CASE("single-observation kernels average the sampled responses") {
  // s = 1 kernels shortcut the tree machinery: each value is one response,
  // and the ensemble mean must match direct computation over the draws
  const uel::Dataset data = random_dataset(15, 2, 23);
  uel::Rng rng(31);
  uel::EnsembleFit fit;
  fit.n = data.n;
  fit.s = 1;
  fit.B = 500;
  fit.memberships = uel::draw_subsamples(data.n, 1, fit.B, rng);
  double sum = 0.0;
  for (const auto& set : fit.memberships) {
    fit.tree_values.push_back(data.y(set[0]));
    sum += data.y(set[0]);
  }
  fit.theta_hat = sum / fit.B;

  double direct = 0.0;
  for (const auto& set : fit.memberships) direct += data.y(set[0]);
  CHECK(fit.theta_hat == Approx(direct / fit.B).margin(1e-14));
  CHECK(uel::kernel_variance(fit) >= 0.0);
}

TEST_CASE("forest fitting is deterministic and thread-invariant") {
  const uel::Dataset data = random_dataset(50, 4, 43);
  const std::vector<double> x0 = {0.4, 0.4, 0.4, 0.4};
  const uel::EnsembleFit one = uel::fit_forest(data, x0, 15, 60, uel::TreeParams{}, 99, 1);
  const uel::EnsembleFit two = uel::fit_forest(data, x0, 15, 60, uel::TreeParams{}, 99, 4);
  CHECK(one.tree_values == two.tree_values);
  CHECK(one.memberships == two.memberships);
  CHECK(one.theta_hat == two.theta_hat);
}

TEST_CASE("MLR forest lands near the true conditional mean") {
  uel::Rng data_rng(2027);
  const uel::Dataset data = uel::gen_mlr(800, 6, data_rng);
  const std::vector<double> x0(6, 0.4);
  const int s = static_cast<int>(std::ceil(std::pow(800.0, 0.8)));
  uel::TreeParams params;
  params.random_split_prob = 0.05;
  const uel::EnsembleFit fit = uel::fit_forest(data, x0, s, 4000, params, 31337, 2);
  // Monte Carlo sanity band around mu(x0) = 0.6
  CHECK(std::fabs(fit.theta_hat - 0.6) < 0.15);
}

TEST_CASE("ensemble fit round-trips through JSON") {
  const uel::Dataset data = random_dataset(25, 3, 53);
  const std::vector<double> x0 = {0.2, 0.5, 0.8};
  const uel::EnsembleFit fit = uel::fit_forest(data, x0, 9, 40, uel::TreeParams{}, 3);

  const char* path = "test_ensemble_fit.json";
  uel::save_fit(fit, path);
  const uel::EnsembleFit loaded = uel::load_fit(path);
  CHECK(loaded.n == fit.n);
  CHECK(loaded.s == fit.s);
  CHECK(loaded.B == fit.B);
  CHECK(loaded.x0 == fit.x0);
  CHECK(loaded.theta_hat == fit.theta_hat);
  CHECK(loaded.tree_values == fit.tree_values);
  CHECK(loaded.memberships == fit.memberships);
  std::remove(path);
}

TEST_CASE("fit_forest input validation") {
  const uel::Dataset data = random_dataset(20, 2, 73);
  const std::vector<double> x0 = {0.5, 0.5};
  CHECK_THROWS_AS(uel::fit_forest(data, x0, 20, 10, uel::TreeParams{}, 1),
                  std::invalid_argument);  // s >= n
  CHECK_THROWS_AS(uel::fit_forest(data, x0, 5, 0, uel::TreeParams{}, 1),
                  std::invalid_argument);  // B = 0
  const std::vector<double> bad_x0 = {0.5};
  CHECK_THROWS_AS(uel::fit_forest(data, bad_x0, 5, 10, uel::TreeParams{}, 1),
                  std::invalid_argument);  // x0 dimension
}
