#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "uel/ensemble.hpp"

namespace uel {

inline void to_json(nlohmann::json& j, const EnsembleFit& fit) {
  j = nlohmann::json{{"n", fit.n},
                     {"s", fit.s},
                     {"B", fit.B},
                     {"x0", fit.x0},
                     {"theta_hat", fit.theta_hat},
                     {"tree_values", fit.tree_values},
                     {"memberships", fit.memberships},
                     {"fallback_leaf_trees", fit.fallback_leaf_trees}};
}

inline void from_json(const nlohmann::json& j, EnsembleFit& fit) {
  j.at("n").get_to(fit.n);
  j.at("s").get_to(fit.s);
  j.at("B").get_to(fit.B);
  j.at("x0").get_to(fit.x0);
  j.at("theta_hat").get_to(fit.theta_hat);
  j.at("tree_values").get_to(fit.tree_values);
  j.at("memberships").get_to(fit.memberships);
  fit.fallback_leaf_trees = j.value("fallback_leaf_trees", 0);
}

inline void save_fit(const EnsembleFit& fit, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_fit: cannot open '" + path + "'");
  out << nlohmann::json(fit).dump(2) << '\n';
}

inline EnsembleFit load_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_fit: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return j.get<EnsembleFit>();
}

}  // namespace uel
