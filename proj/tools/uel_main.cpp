// uel: empirical-likelihood inference for subsampled ensembles.
//
//   uel simulate --config <json> --out <csv> [--threads N]
//   uel infer --data <csv> --x0 <comma-reals> --s <int> --trees <int>
//             --method <el|mel|ij|jk> --level <real> --seed <int>
//             [--save-fit <json>] [--load-fit <json>]
//
// Exit codes: 0 success, 2 configuration error, 1 runtime failure.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uel/dataset.hpp"
#include "uel/ensemble_json.hpp"
#include "uel/harness.hpp"

namespace {

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> values;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t end = text.find(',', begin);
    const std::string cell =
        text.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw std::invalid_argument("--x0: not a decimal real: '" + cell + "'");
    }
    if (end == std::string::npos) break;
    begin = end + 1;
  }
  return values;
}

int run_simulate(const std::string& config_path, const std::string& out_path, int threads) {
  uel::SimulationConfig cfg = uel::load_config(config_path);
  if (threads > 0) cfg.threads = threads;
  const uel::CoverageReport report = uel::run_experiment(cfg);
  uel::write_report(report, out_path);
  std::cout << "wrote " << report.rows.size() << " rows to " << out_path << "\n";
  return 0;
}

struct InferCli {
  std::string data_path;
  std::string x0_text;
  int s = 0;
  int trees = 0;
  std::string method = "el";
  double level = 0.95;
  std::uint64_t seed = 0;
  std::string save_fit_path;
  std::string load_fit_path;
};

int run_infer_cli(const InferCli& cli) {
  const uel::Dataset data = uel::load_csv(cli.data_path);

  uel::InferRequest req;
  req.x0 = parse_reals(cli.x0_text);
  req.s = cli.s;
  req.B = cli.trees;
  req.method = uel::method_from_string(cli.method);
  req.level = cli.level;
  req.seed = cli.seed;
  if (!(req.level > 0.0 && req.level < 1.0)) {
    throw std::invalid_argument("--level must lie in (0, 1)");
  }

  uel::EnsembleFit fit;
  if (!cli.load_fit_path.empty()) {
    fit = uel::load_fit(cli.load_fit_path);
    if (fit.n != data.n || fit.s != req.s || fit.B != req.B || fit.x0 != req.x0) {
      throw std::invalid_argument("--load-fit: cached fit does not match the request");
    }
  } else {
    uel::TreeParams params;
    fit = uel::fit_forest(data, req.x0, req.s, req.B, params, req.seed);
    if (!cli.save_fit_path.empty()) uel::save_fit(fit, cli.save_fit_path);
  }
  std::cout << uel::infer_from_fit(fit, req.method, req.level).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical-likelihood inference for subsampled ensemble predictors"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  int threads = 0;
  CLI::App* simulate = app.add_subcommand("simulate", "Run the Monte Carlo coverage study");
  simulate->add_option("--config", config_path, "Simulation config (JSON)")->required();
  simulate->add_option("--out", out_path, "Output coverage report (CSV)")->required();
  simulate->add_option("--threads", threads, "Worker threads (overrides config)");

  InferCli infer_cli;
  CLI::App* infer = app.add_subcommand("infer", "One-shot inference on a CSV dataset");
  infer->add_option("--data", infer_cli.data_path, "Dataset CSV (header x1,...,xd,y)")->required();
  infer->add_option("--x0", infer_cli.x0_text, "Query point, comma-separated reals")->required();
  infer->add_option("--s", infer_cli.s, "Subsample size")->required();
  infer->add_option("--trees", infer_cli.trees, "Number of trees")->required();
  infer->add_option("--method", infer_cli.method, "el|mel|ij|jk")->required();
  infer->add_option("--level", infer_cli.level, "Confidence level in (0, 1)")->required();
  infer->add_option("--seed", infer_cli.seed, "Master seed")->required();
  infer->add_option("--save-fit", infer_cli.save_fit_path, "Cache the ensemble fit as JSON");
  infer->add_option("--load-fit", infer_cli.load_fit_path, "Reuse a cached ensemble fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return run_simulate(config_path, out_path, threads);
    return run_infer_cli(infer_cli);
  } catch (const std::invalid_argument& err) {
    std::cerr << "uel: configuration error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "uel: error: " << err.what() << "\n";
    return 1;
  }
}
