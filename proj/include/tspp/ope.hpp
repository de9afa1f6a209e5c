#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tspp/core.hpp"
#include "tspp/metrics.hpp"
#include "tspp/policies.hpp"
#include "tspp/sampling.hpp"
#include "tspp/state_store.hpp"

namespace tspp {

struct LoggedRow {
  Layout layout;
  Reward reward = 0;
};

// Logged bandit feedback. The logging policy is assumed uniform over arms.
struct LoggedDataset {
  DimensionSpec spec;
  std::vector<LoggedRow> rows;
};

// CSV with header dim_1,...,dim_D,reward; choices 1-based, rewards 0/1.
// Throws DataError naming the offending line.
LoggedDataset ingest_logged(const std::filesystem::path& path, const DimensionSpec& spec);
LoggedDataset parse_logged(std::istream& in, const DimensionSpec& spec);
void write_logged(std::ostream& out, const LoggedDataset& data);
void write_logged(const std::filesystem::path& path, const LoggedDataset& data);

struct FeatureRow {
  std::vector<double> features;
  int label = 0;  // -1 or +1 (0 and 1 are accepted too)
};

// Parses "label idx:value ..." lines (1-based feature indices).
std::vector<FeatureRow> read_libsvm(const std::filesystem::path& path, std::size_t feature_count);

// Maps feature d to its equal-frequency quantile bin (spec.choices(d) bins)
// and label -1 -> 0, +1 -> 1. Throws DataError on a constant feature or when
// ties leave a bin empty.
LoggedDataset discretize_features(std::span<const FeatureRow> rows, const DimensionSpec& spec);

struct ArmStats {
  std::uint64_t successes = 0;
  std::uint64_t plays = 0;

  double mean() const {
    return plays == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(plays);
  }
};

// Per-arm tallies indexed by DimensionSpec::arm_index.
std::vector<ArmStats> arm_stats(const LoggedDataset& data);

struct ShrinkageResult {
  // Shrunk mean per input arm; empty for arms with no plays.
  std::vector<std::optional<double>> estimates;
  double grand_mean = 0.0;
  double factor = 1.0;  // c in x_bar + c (x_i - x_bar)
  std::vector<std::string> warnings;
};

// Positive-part James-Stein shrinkage of the arm means toward their grand
// mean, with the pooled binomial variance mean_i x_i (1 - x_i) / n_i. Fewer
// than four arms with plays are returned unshrunk.
ShrinkageResult james_stein(std::span<const ArmStats> arms);

using ArmSelector = std::function<Layout(const StateStore&, Rng&)>;

struct ReplayResult {
  RunHistory history;           // matched steps only
  std::size_t rows_scanned = 0;
  std::size_t cycles = 0;       // completed passes over the dataset
  bool exhausted = false;       // stopped by max_cycles before reaching `steps`
};

// Replay method: stream rows in order (cycling), keep the steps where the
// selector proposes the logged arm, and back-propagate those rewards into
// `store`.
ReplayResult replay_evaluate(const ArmSelector& select, StateStore& store,
                             const LoggedDataset& data, std::size_t steps, Rng& rng,
                             std::size_t max_cycles = 10'000);
ReplayResult replay_evaluate(const PolicyConfig& policy, const LoggedDataset& data,
                             std::size_t steps, Rng& rng, std::size_t max_cycles = 10'000);

struct ReplayScore {
  double estimated_value = 0.0;  // mean shrunk value of the matched arms
  double regret_vs_best_arm = 0.0;
};

// Scores a replay history against per-arm value estimates (arm_index order).
ReplayScore score_replay(const RunHistory& history, const DimensionSpec& spec,
                         const ShrinkageResult& values);

}  // namespace tspp
