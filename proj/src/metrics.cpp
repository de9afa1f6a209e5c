#include "tspp/metrics.hpp"

#include <algorithm>
#include <map>

namespace tspp {
namespace {

void check_window(std::size_t window) {
  if (window < 1) throw ConfigError("window must be >= 1");
}

void check_non_empty(const RunHistory& history) {
  if (history.empty()) throw ConfigError("metric needs a non-empty history");
}

template <typename PerWindow>
WindowSeries per_window(const RunHistory& history, std::size_t window, PerWindow&& fn) {
  check_window(window);
  WindowSeries series{window, {}};
  const auto& records = history.records();
  for (std::size_t begin = 0; begin + window <= records.size(); begin += window) {
    series.values.push_back(fn(records.begin() + static_cast<std::ptrdiff_t>(begin),
                               records.begin() + static_cast<std::ptrdiff_t>(begin + window)));
  }
  return series;
}

}  // namespace

void RunHistory::append(Layout layout, Reward reward) {
  if (reward != 0 && reward != 1) throw SpecViolation("reward must be 0 or 1");
  records_.push_back({records_.size() + 1, std::move(layout), reward});
}

double average_regret(const RunHistory& history, double best_prob) {
  check_non_empty(history);
  double sum = 0.0;
  for (const auto& record : history.records()) sum += best_prob - record.reward;
  return sum / static_cast<double>(history.size());
}

double average_regret(const RunHistory& history, const SimulatorModel& model) {
  return average_regret(history, model.true_best().second);
}

double expected_regret(const RunHistory& history, const SimulatorModel& model, double best_prob) {
  check_non_empty(history);
  double sum = 0.0;
  for (const auto& record : history.records()) sum += best_prob - model.success_prob(record.layout);
  return sum / static_cast<double>(history.size());
}

WindowSeries convergence_rate(const RunHistory& history, std::size_t window) {
  return per_window(history, window, [window](auto first, auto last) {
    std::map<Layout, std::size_t> counts;
    for (auto it = first; it != last; ++it) ++counts[it->layout];
    std::size_t modal = 0;
    for (const auto& [layout, count] : counts) modal = std::max(modal, count);
    return static_cast<double>(modal) / static_cast<double>(window);
  });
}

WindowSeries best_arm_rate(const RunHistory& history, const Layout& best, std::size_t window) {
  return per_window(history, window, [&best, window](auto first, auto last) {
    const auto hits = std::count_if(first, last, [&best](const RewardRecord& r) { return r.layout == best; });
    return static_cast<double>(hits) / static_cast<double>(window);
  });
}

WindowSeries best_arm_rate(const RunHistory& history, const SimulatorModel& model,
                           std::size_t window) {
  return best_arm_rate(history, model.true_best().first, window);
}

WindowSeries windowed_expected_regret(const RunHistory& history, const SimulatorModel& model,
                                      double best_prob, std::size_t window) {
  return per_window(history, window, [&](auto first, auto last) {
    double sum = 0.0;
    for (auto it = first; it != last; ++it) sum += best_prob - model.success_prob(it->layout);
    return sum / static_cast<double>(window);
  });
}

}  // namespace tspp
