// Command-line runner for closed-loop simulations, parameter sweeps and
// replay-based off-policy evaluation.

#include <cstdint>
#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tspp/harness.hpp"
#include "tspp/ope.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    // Accept fractions like 1/6.
    const auto slash = item.find('/');
    try {
      if (slash == std::string::npos) {
        values.push_back(std::stod(item));
      } else {
        values.push_back(std::stod(item.substr(0, slash)) / std::stod(item.substr(slash + 1)));
      }
    } catch (const std::logic_error&) {
      throw tspp::ConfigError("bad sweep value '" + item + "'");
    }
  }
  if (values.empty()) throw tspp::ConfigError("--values is empty");
  return values;
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate bandit experiments with Thompson-sampling path planning"};
  app.set_version_flag("--version", tspp::version_string());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool dump_models = false;

  auto* run = app.add_subcommand("run", "closed-loop simulation of every configured policy");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides config)");
  run->add_option("--threads", threads, "worker threads, 0 = all cores");
  run->add_flag("--dump-models", dump_models, "write each replication's simulator model as JSON");

  std::string axis;
  std::string values_text;
  auto* sweep = app.add_subcommand("sweep", "repeat the experiment over one parameter axis");
  sweep->add_option("--config", config_path, "experiment config (JSON)")->required();
  sweep->add_option("--axis", axis, "alpha2, N or D")->required();
  sweep->add_option("--values", values_text, "comma-separated values (fractions allowed)")->required();
  sweep->add_option("--out", out_dir, "output directory (overrides config)");
  auto* sweep_seed_opt = sweep->add_option("--seed", seed, "master seed (overrides config)");
  sweep->add_option("--threads", threads, "worker threads, 0 = all cores");

  std::string data_path;
  auto* ope = app.add_subcommand("ope", "replay evaluation on logged data");
  ope->add_option("--config", config_path, "experiment config (JSON)")->required();
  ope->add_option("--data", data_path, "logged data CSV (dim_1,...,dim_D,reward)")->required();
  ope->add_option("--out", out_dir, "output directory (overrides config)");
  auto* ope_seed_opt = ope->add_option("--seed", seed, "master seed (overrides config)");
  ope->add_option("--threads", threads, "worker threads, 0 = all cores");

  std::string libsvm_path;
  std::string bins_text;
  auto* discretize = app.add_subcommand("discretize", "bin a LIBSVM dataset into logged-data CSV");
  discretize->add_option("--libsvm", libsvm_path, "input file in LIBSVM format")->required();
  discretize->add_option("--bins", bins_text, "bins per feature, e.g. 4,4")->required();
  discretize->add_option("--out", out_dir, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (discretize->parsed()) {
      std::vector<int> bins;
      for (double v : parse_values(bins_text)) bins.push_back(static_cast<int>(v));
      const tspp::DimensionSpec spec(bins);
      const auto rows = tspp::read_libsvm(libsvm_path, spec.dims());
      tspp::write_logged(out_dir, tspp::discretize_features(rows, spec));
      std::cout << "wrote " << rows.size() << " rows to " << out_dir << '\n';
      return 0;
    }

    tspp::ExperimentConfig config = tspp::load_config(config_path);
    if (!out_dir.empty()) config.output = out_dir;
    if (*seed_opt || *sweep_seed_opt || *ope_seed_opt) config.seed = seed;
    const std::size_t workers = resolve_threads(threads);

    if (run->parsed()) {
      const auto result = tspp::run_experiment(config, workers);
      tspp::write_experiment(result, config.output);
      if (dump_models) {
        for (std::size_t h = 0; h < config.replications; ++h) {
          std::ofstream out(config.output / ("model_" + std::to_string(h) + ".json"));
          out << tspp::replication_model(config, h).to_json().dump(2) << '\n';
        }
      }
      std::cout << "wrote results to " << config.output.string() << '\n';
    } else if (sweep->parsed()) {
      const auto values = parse_values(values_text);
      const auto result = tspp::run_sweep(config, tspp::parse_axis(axis), values, workers);
      tspp::write_sweep(result, config.output);
      std::cout << "wrote sweep to " << config.output.string() << '\n';
    } else if (ope->parsed()) {
      const auto data = tspp::ingest_logged(data_path, config.spec);
      const auto rows = tspp::run_ope(config, data, workers);
      tspp::write_ope(config, rows, config.output);
      std::cout << "wrote replay evaluation to " << config.output.string() << '\n';
    }
  } catch (const tspp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
