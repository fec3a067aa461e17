#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uel/dataset.hpp"
#include "uel/rng.hpp"

namespace uel {

enum class Dgp { MLR, MARS };

inline const char* to_string(Dgp dgp) {
  switch (dgp) {
    case Dgp::MLR: return "MLR";
    case Dgp::MARS: return "MARS";
  }
  throw std::invalid_argument("unknown dgp id");
}

inline Dgp dgp_from_string(const std::string& name) {
  if (name == "MLR") return Dgp::MLR;
  if (name == "MARS") return Dgp::MARS;
  throw std::invalid_argument("unknown dgp '" + name + "' (expected MLR or MARS)");
}

// Smallest feature dimension each design uses.
inline int min_dim(Dgp dgp) { return dgp == Dgp::MLR ? 4 : 5; }

inline std::vector<double> gen_uniform_features(int n, int d, Rng& rng) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_uniform_features: n, d must be >= 1");
  std::vector<double> features(static_cast<std::size_t>(n) * d);
  for (auto& v : features) v = rng.uniform();
  return features;
}

inline double mlr_mean(std::span<const double> x) {
  if (x.size() < 4) throw std::invalid_argument("mlr_mean: needs at least 4 features");
  return 2.0 * x[0] + 3.0 * x[1] - 5.0 * x[2] - x[3] + 1.0;
}

inline double mars_mean(std::span<const double> x) {
  if (x.size() < 5) throw std::invalid_argument("mars_mean: needs at least 5 features");
  return std::sin(std::numbers::pi * x[0] * x[1]) +
         2.0 * (x[2] - 0.05) * (x[2] - 0.05) - x[3] + 0.5 * x[4];
}

/// Noiseless conditional mean of the given design at x0.
inline double true_mean(Dgp dgp, std::span<const double> x0) {
  switch (dgp) {
    case Dgp::MLR: return mlr_mean(x0);
    case Dgp::MARS: return mars_mean(x0);
  }
  throw std::invalid_argument("unknown dgp id");
}

namespace detail {

template <class MeanFn>
Dataset gen_design(int n, int d, int dmin, Rng& rng, MeanFn&& mean) {
  if (d < dmin) {
    throw std::invalid_argument("dgp: needs d >= " + std::to_string(dmin) + ", got " +
                                std::to_string(d));
  }
  Dataset data;
  data.n = n;
  data.d = d;
  data.features = gen_uniform_features(n, d, rng);
  data.responses.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::span<const double> row(data.features.data() + static_cast<std::size_t>(i) * d,
                                      static_cast<std::size_t>(d));
    data.responses[static_cast<std::size_t>(i)] = mean(row) + 2.0 * rng.normal();
  }
  return data;
}

}  // namespace detail

// Y = 2 X1 + 3 X2 - 5 X3 - X4 + 1 + 2 eps,  eps ~ N(0,1)
inline Dataset gen_mlr(int n, int d, Rng& rng) {
  return detail::gen_design(n, d, 4, rng, [](std::span<const double> x) { return mlr_mean(x); });
}

// Y = sin(pi X1 X2) + 2 (X3 - 0.05)^2 - X4 + 0.5 X5 + 2 eps,  eps ~ N(0,1)
inline Dataset gen_mars(int n, int d, Rng& rng) {
  return detail::gen_design(n, d, 5, rng, [](std::span<const double> x) { return mars_mean(x); });
}

inline Dataset gen_dataset(Dgp dgp, int n, int d, Rng& rng) {
  return dgp == Dgp::MLR ? gen_mlr(n, d, rng) : gen_mars(n, d, rng);
}

}  // namespace uel
