#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tspp/core.hpp"
#include "tspp/metrics.hpp"
#include "tspp/ope.hpp"
#include "tspp/policies.hpp"
#include "tspp/simulator.hpp"

namespace tspp {

std::string version_string();

struct SimulatorConfig {
  std::size_t order = 2;
  double scale = 0.0;                           // required, > 0
  std::optional<std::vector<double>> controls;  // nullopt: default_controls(D, order)
  double bias = 0.0;

  std::vector<double> resolved_controls(std::size_t dims) const;
};

/// Everything a run depends on. A config document (JSON) looks like:
///
///   {
///     "choices": 10, "dims": 3,             // or "choices": [10, 10, 10]
///     "simulator": {"order": 2, "scale": 3, "controls": "default"},
///     "policies": ["FPF", {"variant": "PPF", "order": 2}, "DS",
///                  {"variant": "BoostedDS", "order": 2}, "FlatTS", "DMabs"],
///     "searches": 45, "rounds": 10, "prior": {"alpha": 1, "beta": 1},
///     "steps": 20000, "replications": 20, "window": 1000,
///     "seed": 1, "output": "results", "arm_cap": 1000000
///   }
///
/// "searches", "rounds" and "prior" at top level are defaults for policies
/// that do not set them.
struct ExperimentConfig {
  DimensionSpec spec;
  SimulatorConfig simulator;
  std::vector<PolicyConfig> policies;
  std::size_t steps = 1000;
  std::size_t replications = 1;
  std::size_t window = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path output = "results";
  std::uint64_t arm_cap = kDefaultArmCap;

  // Throws ConfigError describing the first problem found.
  void validate() const;
};

// Accepts a config document or a run manifest (its "config" member).
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
// Fully resolved document; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const ExperimentConfig& config);

struct PolicyRun {
  std::string policy;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  double average_regret = 0.0;   // realized rewards
  double expected_regret = 0.0;  // success probabilities of the played arms
  WindowSeries convergence;
  WindowSeries best_arm;
  WindowSeries window_regret;  // per-window expected regret
};

struct ReplicationInfo {
  std::uint64_t model_seed = 0;
  Layout best;
  double best_prob = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ReplicationInfo> replications;
  std::vector<PolicyRun> runs;  // ordered by (policy, replication)

  const PolicyRun& run(std::size_t policy, std::size_t replication) const {
    return runs.at(policy * replications.size() + replication);
  }
};

// Closed loop for one policy: select_arm -> draw_reward -> backpropagate.
RunHistory simulate(const PolicyConfig& policy, const SimulatorModel& model, std::size_t steps,
                    Rng& rng, std::uint64_t arm_cap = kDefaultArmCap);

// Simulator for replication `h`, seeded with derive_seed(seed, h, kModelStream).
SimulatorModel replication_model(const ExperimentConfig& config, std::size_t replication);

// Runs every (policy, replication) pair; `threads` workers share the jobs.
// Output is independent of the thread count and of job order.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t threads = 1);

// Writes metrics.csv, summary.csv and manifest.json into `dir`.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

struct SummaryStat {
  double mean = 0.0;
  double std_error = 0.0;  // sample SD / sqrt(n); 0 when n < 2
};
SummaryStat summarize(std::span<const double> values);

enum class SweepAxis { kAlpha2, kChoices, kDims };
SweepAxis parse_axis(const std::string& name);  // alpha2 | N | D
std::string axis_name(SweepAxis axis);

// The config for one sweep point: the axis value applied and the seed
// replaced by derive_seed(config.seed, index, kSweepStream).
ExperimentConfig sweep_point(const ExperimentConfig& config, SweepAxis axis, double value,
                             std::size_t index);

struct SweepRow {
  double value = 0.0;
  std::string policy;
  std::size_t replications = 0;
  SummaryStat average_regret;
  SummaryStat expected_regret;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kAlpha2;
  std::vector<double> values;
  std::vector<ExperimentResult> points;
  std::vector<SweepRow> rows;  // ordered by (value, policy)
};

SweepResult run_sweep(const ExperimentConfig& config, SweepAxis axis, std::span<const double> values,
                      std::size_t threads = 1);
// sweep.csv plus one run directory per point.
void write_sweep(const SweepResult& result, const std::filesystem::path& dir);

struct OpeRow {
  std::string policy;
  std::size_t repetition = 0;
  std::size_t matched_steps = 0;
  double estimated_value = 0.0;
  double regret_vs_best_arm = 0.0;
  std::size_t rows_scanned = 0;
  std::size_t cycles = 0;
};

// Replay evaluation of each policy, `config.replications` times, for
// `config.steps` matched steps; arm values come from James-Stein estimates
// over the whole dataset.
std::vector<OpeRow> run_ope(const ExperimentConfig& config, const LoggedDataset& data,
                            std::size_t threads = 1);
// ope.csv and manifest.json.
void write_ope(const ExperimentConfig& config, const std::vector<OpeRow>& rows,
               const std::filesystem::path& dir);

}  // namespace tspp
