#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "uel/baselines.hpp"
#include "uel/dgp.hpp"
#include "uel/el.hpp"
#include "uel/ensemble.hpp"
#include "uel/pseudo.hpp"
#include "uel/rng.hpp"

namespace uel {

// Split-feature randomization used by the simulation study, so the
// random-split probability floor p/d of the honest-tree theory is positive.
inline constexpr double kSimulationRandomSplitProb = 0.05;

struct SimulationConfig {
  Dgp dgp = Dgp::MLR;
  std::vector<int> n_list = {200, 400, 800};
  double s_exponent = 0.8;       // s = ceil(n^s_exponent)
  double tree_exponent = 1.1;    // B = ceil((10 n)^tree_exponent)
  int d = 6;
  int mtry = 0;  // 0 -> ceil(d/2)
  int k = 1;
  double alpha_regularity = 0.05;
  std::vector<double> x0;  // empty -> (0.4, ..., 0.4)
  double level = 0.95;
  int replications = 2000;
  std::uint64_t master_seed = 1;
  std::vector<Method> methods = {Method::EL, Method::mEL, Method::IJWald, Method::JWald};
  int threads = 1;

  bool operator==(const SimulationConfig&) const = default;

  int subsample_size(int n) const {
    return static_cast<int>(std::ceil(std::pow(n, s_exponent)));
  }
  int tree_count(int n) const {
    return static_cast<int>(std::ceil(std::pow(10.0 * n, tree_exponent)));
  }
  std::vector<double> query_point() const {
    return x0.empty() ? std::vector<double>(static_cast<std::size_t>(d), 0.4) : x0;
  }
};

inline void validate(const SimulationConfig& cfg) {
  if (cfg.n_list.empty()) throw std::invalid_argument("config: n_list must be non-empty");
  for (const int n : cfg.n_list) {
    if (n < 2) throw std::invalid_argument("config: n_list entries must be >= 2");
    if (cfg.subsample_size(n) >= n) {
      throw std::invalid_argument("config: s_exponent gives s >= n for n = " + std::to_string(n));
    }
  }
  if (!(cfg.s_exponent > 0.0)) throw std::invalid_argument("config: s_exponent must be positive");
  if (!(cfg.tree_exponent > 0.0)) {
    throw std::invalid_argument("config: tree_exponent must be positive");
  }
  if (cfg.d < min_dim(cfg.dgp)) {
    throw std::invalid_argument(std::string("config: dgp ") + to_string(cfg.dgp) +
                                " needs d >= " + std::to_string(min_dim(cfg.dgp)));
  }
  if (cfg.mtry < 0 || cfg.mtry > cfg.d) {
    throw std::invalid_argument("config: mtry must lie in [1, d] (0 selects ceil(d/2))");
  }
  if (cfg.k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (!(cfg.alpha_regularity > 0.0 && cfg.alpha_regularity <= 0.2)) {
    throw std::invalid_argument("config: alpha_regularity must lie in (0, 0.2]");
  }
  if (!cfg.x0.empty()) {
    if (static_cast<int>(cfg.x0.size()) != cfg.d) {
      throw std::invalid_argument("config: x0 must have d entries");
    }
    for (const double v : cfg.x0) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("config: x0 entries must lie in [0,1]");
    }
  }
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
    throw std::invalid_argument("config: level must lie in (0, 1)");
  }
  if (cfg.replications < 1) throw std::invalid_argument("config: replications must be >= 1");
  if (cfg.methods.empty()) throw std::invalid_argument("config: methods must be non-empty");
  if (cfg.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

inline nlohmann::json config_to_json(const SimulationConfig& cfg) {
  nlohmann::json methods = nlohmann::json::array();
  for (const Method m : cfg.methods) methods.push_back(to_string(m));
  return nlohmann::json{{"dgp", to_string(cfg.dgp)},
                        {"n_list", cfg.n_list},
                        {"s_exponent", cfg.s_exponent},
                        {"tree_exponent", cfg.tree_exponent},
                        {"d", cfg.d},
                        {"mtry", cfg.mtry},
                        {"k", cfg.k},
                        {"alpha_regularity", cfg.alpha_regularity},
                        {"x0", cfg.x0},
                        {"level", cfg.level},
                        {"replications", cfg.replications},
                        {"master_seed", cfg.master_seed},
                        {"methods", methods},
                        {"threads", cfg.threads}};
}

/// Parses a SimulationConfig from JSON. `dgp` is required; every other key
/// is optional with the documented default; unknown keys are rejected by name.
inline SimulationConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: document must be a JSON object");
  static const std::set<std::string> known = {
      "dgp", "n_list", "s_exponent", "tree_exponent", "d",
      "mtry", "k", "alpha_regularity", "x0", "level",
      "replications", "master_seed", "methods", "threads"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (!doc.contains("dgp")) throw std::invalid_argument("config: missing required key 'dgp'");

  SimulationConfig cfg;
  try {
    cfg.dgp = dgp_from_string(doc.at("dgp").get<std::string>());
    if (doc.contains("n_list")) cfg.n_list = doc.at("n_list").get<std::vector<int>>();
    if (doc.contains("s_exponent")) cfg.s_exponent = doc.at("s_exponent").get<double>();
    if (doc.contains("tree_exponent")) cfg.tree_exponent = doc.at("tree_exponent").get<double>();
    if (doc.contains("d")) cfg.d = doc.at("d").get<int>();
    if (doc.contains("mtry")) cfg.mtry = doc.at("mtry").get<int>();
    if (doc.contains("k")) cfg.k = doc.at("k").get<int>();
    if (doc.contains("alpha_regularity")) {
      cfg.alpha_regularity = doc.at("alpha_regularity").get<double>();
    }
    if (doc.contains("x0")) {
      if (doc.at("x0").is_number()) {
        cfg.x0.assign(static_cast<std::size_t>(cfg.d), doc.at("x0").get<double>());
      } else {
        cfg.x0 = doc.at("x0").get<std::vector<double>>();
      }
    }
    if (doc.contains("level")) cfg.level = doc.at("level").get<double>();
    if (doc.contains("replications")) cfg.replications = doc.at("replications").get<int>();
    if (doc.contains("master_seed")) cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
    if (doc.contains("methods")) {
      cfg.methods.clear();
      for (const auto& name : doc.at("methods")) {
        cfg.methods.push_back(method_from_string(name.get<std::string>()));
      }
    }
    if (doc.contains("threads")) cfg.threads = doc.at("threads").get<int>();
  } catch (const nlohmann::json::exception& err) {
    throw std::invalid_argument(std::string("config: malformed value: ") + err.what());
  }
  validate(cfg);
  return cfg;
}

inline SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& err) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + err.what());
  }
  return config_from_json(doc);
}

struct CoverageRow {
  Dgp dgp = Dgp::MLR;
  int n = 0;
  int s = 0;
  int B = 0;
  Method method = Method::EL;
  double level = 0.0;
  double coverage = 0.0;
  double mean_ci_length = 0.0;
  int infeasible_count = 0;         // failed replications excluded from the cell
  int floored_variance_count = 0;   // IJ variances clipped at zero
  int replications = 0;
  std::uint64_t seed = 0;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
};

struct MethodOutcome {
  ConfidenceInterval ci;
  bool floored = false;
};

struct ReplicationResult {
  bool failed = false;
  std::string error;
  double shrink_c = 1.0;
  std::vector<MethodOutcome> outcomes;  // aligned with the requested methods
};

namespace detail {

inline constexpr std::uint64_t kDataTag = 0x64617461;
inline constexpr std::uint64_t kForestTag = 0x666f7274;

inline std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace detail

/// One Monte Carlo replication: a fresh dataset from the configured design,
/// one forest fit, and a confidence interval per requested method. All
/// randomness stems from (master_seed, dgp, n, rep_index), so any replication
/// can be replayed in isolation.
inline ReplicationResult run_replication(const SimulationConfig& cfg, int n, int rep_index) {
  ReplicationResult result;
  const std::uint64_t rep_seed =
      derive_seed(cfg.master_seed, static_cast<std::uint64_t>(cfg.dgp),
                  static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep_index));
  try {
    Rng data_rng(derive_seed(rep_seed, detail::kDataTag));
    const Dataset data = gen_dataset(cfg.dgp, n, cfg.d, data_rng);
    const std::vector<double> x0 = cfg.query_point();

    TreeParams params;
    params.k = cfg.k;
    params.alpha = cfg.alpha_regularity;
    params.mtry = cfg.mtry;
    params.random_split_prob = kSimulationRandomSplitProb;

    const EnsembleFit fit =
        fit_forest(data, x0, cfg.subsample_size(n), cfg.tree_count(n), params,
                   derive_seed(rep_seed, detail::kForestTag));
    const PseudoValueSet pvs = pseudo_values(fit);
    result.shrink_c = pvs.c;

    for (const Method method : cfg.methods) {
      MethodOutcome outcome;
      switch (method) {
        case Method::EL:
        case Method::mEL:
          outcome.ci = invert_ci(pvs, method, cfg.level);
          break;
        case Method::IJWald: {
          const VarianceEstimate var = ij_variance(fit);
          outcome.floored = var.floored;
          outcome.ci = wald_ci(fit.theta_hat, var, cfg.level);
          break;
        }
        case Method::JWald:
          outcome.ci = wald_ci(fit.theta_hat, jackknife_variance(pvs), cfg.level);
          break;
      }
      result.outcomes.push_back(outcome);
    }
  } catch (const std::exception& err) {
    result.failed = true;
    result.error = err.what();
    result.outcomes.clear();
  }
  return result;
}

namespace detail {

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Subsample-rate window from the honest-forest theory, with q = 6 moment
// bookkeeping. Advisory only: the default s = ceil(n^0.8) rule sits outside
// it for any positive random-split probability, which is worth a warning but
// never fatal.
inline void warn_subsample_window(const SimulationConfig& cfg, int n, int s) {
  const double p = kSimulationRandomSplitProb;
  const double alpha = cfg.alpha_regularity;
  const double ratio = std::log(1.0 / alpha) / std::log(1.0 / (1.0 - alpha));
  const double beta_min = 1.0 - 1.0 / (1.0 + cfg.d / p * ratio);
  const double lo = std::pow(n, beta_min);
  const double hi = std::pow(n, 1.0 - 2.0 / 6.0);
  if (!(s > lo && s < hi)) {
    std::cerr << "uel: warning: s = " << s << " lies outside the theoretical window (n^"
              << format_double(beta_min) << ", n^" << format_double(1.0 - 2.0 / 6.0)
              << ") = (" << format_double(lo) << ", " << format_double(hi) << ") for n = " << n
              << "\n";
  }
}

}  // namespace detail

/// Runs the full coverage study: `replications` independent replications per
/// sample size, aggregated per method. Deterministic for any thread count
/// (per-replication seeding plus an ordered reduction by replication index).
inline CoverageReport run_experiment(const SimulationConfig& cfg) {
  validate(cfg);
  CoverageReport report;
  const std::vector<double> x0 = cfg.query_point();
  const double truth = true_mean(cfg.dgp, x0);

  for (const int n : cfg.n_list) {
    const int s = cfg.subsample_size(n);
    const int B = cfg.tree_count(n);
    detail::warn_subsample_window(cfg, n, s);

    std::vector<ReplicationResult> results(static_cast<std::size_t>(cfg.replications));
    detail::parallel_for(cfg.replications, cfg.threads, [&](int rep) {
      results[static_cast<std::size_t>(rep)] = run_replication(cfg, n, rep);
    });

    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      CoverageRow row;
      row.dgp = cfg.dgp;
      row.n = n;
      row.s = s;
      row.B = B;
      row.method = cfg.methods[m];
      row.level = cfg.level;
      row.replications = cfg.replications;
      row.seed = cfg.master_seed;

      long hits = 0;
      long valid = 0;
      double total_length = 0.0;
      for (const ReplicationResult& rep : results) {
        if (rep.failed) {
          ++row.infeasible_count;
          continue;
        }
        const MethodOutcome& outcome = rep.outcomes[m];
        ++valid;
        if (outcome.ci.contains(truth)) ++hits;
        total_length += outcome.ci.length();
        if (outcome.floored) ++row.floored_variance_count;
      }
      row.coverage = valid > 0 ? static_cast<double>(hits) / static_cast<double>(valid) : 0.0;
      row.mean_ci_length = valid > 0 ? total_length / static_cast<double>(valid) : 0.0;
      report.rows.push_back(row);
    }
  }
  return report;
}

/// Writes the coverage report as CSV, one row per (dgp, n, method) cell.
inline void write_report(const CoverageReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report: cannot open '" + path + "'");
  out << "dgp,n,s,B,method,level,coverage,mean_ci_length,"
         "infeasible_count,floored_variance_count,replications,seed\n";
  for (const CoverageRow& row : report.rows) {
    out << to_string(row.dgp) << ',' << row.n << ',' << row.s << ',' << row.B << ','
        << to_string(row.method) << ',' << detail::format_double(row.level) << ','
        << detail::format_double(row.coverage) << ','
        << detail::format_double(row.mean_ci_length) << ',' << row.infeasible_count << ','
        << row.floored_variance_count << ',' << row.replications << ',' << row.seed << '\n';
  }
}

struct InferRequest {
  std::vector<double> x0;
  int s = 0;
  int B = 0;
  Method method = Method::EL;
  double level = 0.95;
  std::uint64_t seed = 0;
};

/// Inference result computed from an already-built ensemble record: the
/// requested interval plus the full diagnostic block.
inline nlohmann::json infer_from_fit(const EnsembleFit& fit, Method method, double level) {
  const PseudoValueSet pvs = pseudo_values(fit);

  ConfidenceInterval ci;
  switch (method) {
    case Method::EL:
    case Method::mEL:
      ci = invert_ci(pvs, method, level);
      break;
    case Method::IJWald:
      ci = wald_ci(fit.theta_hat, ij_variance(fit), level);
      break;
    case Method::JWald:
      ci = wald_ci(fit.theta_hat, jackknife_variance(pvs), level);
      break;
  }

  return nlohmann::json{{"theta_hat", fit.theta_hat},
                        {"ci_lower", ci.lower},
                        {"ci_upper", ci.upper},
                        {"method", to_string(method)},
                        {"level", level},
                        {"v1", pvs.v1},
                        {"v2", pvs.v2},
                        {"c", pvs.c},
                        {"sparsity_diagnostic", sparsity_diagnostic(pvs)},
                        {"var_ij", ij_variance(fit).value},
                        {"var_j", jackknife_variance(pvs).value},
                        {"B", fit.B},
                        {"s", fit.s}};
}

/// One-shot inference on a user dataset: fits the forest with the honest-tree
/// defaults, then reports as infer_from_fit.
inline nlohmann::json run_infer(const Dataset& data, const InferRequest& req) {
  TreeParams params;  // honest-tree defaults; infer leaves split randomization off
  const EnsembleFit fit = fit_forest(data, req.x0, req.s, req.B, params, req.seed);
  return infer_from_fit(fit, req.method, req.level);
}

}  // namespace uel
