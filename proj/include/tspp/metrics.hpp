#pragma once

#include <cstddef>
#include <vector>

#include "tspp/core.hpp"
#include "tspp/simulator.hpp"

namespace tspp {

struct RewardRecord {
  std::size_t step = 0;  // 1-based
  Layout layout;
  Reward reward = 0;
};

// Closed-loop history; steps are assigned 1, 2, ... on append.
class RunHistory {
 public:
  void append(Layout layout, Reward reward);
  const std::vector<RewardRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  void reserve(std::size_t n) { records_.reserve(n); }

 private:
  std::vector<RewardRecord> records_;
};

// One value per consecutive, complete window of `window` steps.
struct WindowSeries {
  std::size_t window = 1000;
  std::vector<double> values;

  // 1-based inclusive step bounds of window `i`.
  std::size_t start(std::size_t i) const { return i * window + 1; }
  std::size_t end(std::size_t i) const { return (i + 1) * window; }
};

// (1/T) * sum_t (best_prob - X^t) over realized rewards. Throws ConfigError
// on an empty history.
double average_regret(const RunHistory& history, double best_prob);
double average_regret(const RunHistory& history, const SimulatorModel& model);

// (1/T) * sum_t (best_prob - p(A^t)), the noise-free counterpart.
double expected_regret(const RunHistory& history, const SimulatorModel& model, double best_prob);

// Per window: share of steps occupied by the most frequent layout.
WindowSeries convergence_rate(const RunHistory& history, std::size_t window);

// Per window: share of steps that played `best`.
WindowSeries best_arm_rate(const RunHistory& history, const Layout& best, std::size_t window);
WindowSeries best_arm_rate(const RunHistory& history, const SimulatorModel& model,
                           std::size_t window);

// Per window: mean of best_prob - p(A^t).
WindowSeries windowed_expected_regret(const RunHistory& history, const SimulatorModel& model,
                                      double best_prob, std::size_t window);

}  // namespace tspp
