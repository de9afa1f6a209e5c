#include "tspp/simulator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tspp {
namespace {

void add_subsets(std::size_t dims, std::size_t size, std::size_t start,
                 std::vector<std::size_t>& current, std::vector<std::vector<std::size_t>>& out) {
  if (current.size() == size) {
    out.push_back(current);
    return;
  }
  for (std::size_t d = start; d < dims; ++d) {
    current.push_back(d);
    add_subsets(dims, size, d + 1, current, out);
    current.pop_back();
  }
}

std::size_t table_size(const DimensionSpec& spec, const std::vector<std::size_t>& dims) {
  std::size_t size = 1;
  for (std::size_t d : dims) size *= static_cast<std::size_t>(spec.choices(d));
  return size;
}

std::string subset_key(const std::vector<std::size_t>& dims) {
  std::string key;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) key += ',';
    key += std::to_string(dims[i] + 1);
  }
  return key;
}

}  // namespace

std::vector<std::vector<std::size_t>> interaction_subsets(std::size_t dims, std::size_t order) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;
  for (std::size_t k = 1; k <= order; ++k) add_subsets(dims, k, 0, current, out);
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::vector<double> default_controls(std::size_t dims, std::size_t order) {
  if (order < 1 || order > dims) {
    throw ConfigError("interaction order must be in [1, D]");
  }
  std::vector<double> controls;
  double falling = 1.0;    // D (D-1) ... (D-k+1)
  double factorial = 1.0;  // k!
  for (std::size_t k = 1; k <= order; ++k) {
    falling *= static_cast<double>(dims - k + 1);
    factorial *= static_cast<double>(k);
    controls.push_back(factorial / falling);
  }
  return controls;
}

SimulatorModel::SimulatorModel(DimensionSpec spec, std::size_t order, double scale,
                               std::vector<double> controls, std::vector<InteractionTable> tables,
                               double bias)
    : spec_(std::move(spec)),
      order_(order),
      scale_(scale),
      controls_(std::move(controls)),
      bias_(bias),
      tables_(std::move(tables)) {
  if (order_ < 1 || order_ > spec_.dims()) {
    throw ConfigError("interaction order " + std::to_string(order_) + " outside [1, " +
                      std::to_string(spec_.dims()) + "]");
  }
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw ConfigError("scale must be positive");
  if (controls_.size() != order_) {
    throw ConfigError("expected " + std::to_string(order_) + " control values, got " +
                      std::to_string(controls_.size()));
  }
  const auto subsets = interaction_subsets(spec_.dims(), order_);
  if (tables_.size() != subsets.size()) {
    throw ConfigError("expected " + std::to_string(subsets.size()) + " interaction tables");
  }
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (tables_[i].dims != subsets[i]) {
      throw ConfigError("interaction table " + std::to_string(i) + " has unexpected dimensions");
    }
    if (tables_[i].weights.size() != table_size(spec_, subsets[i])) {
      throw ConfigError("interaction table {" + subset_key(subsets[i]) + "} has wrong size");
    }
  }
}

SimulatorModel SimulatorModel::zeros(DimensionSpec spec, std::size_t order, double scale,
                                     std::vector<double> controls, double bias) {
  std::vector<InteractionTable> tables;
  if (order >= 1 && order <= spec.dims()) {
    for (auto& dims : interaction_subsets(spec.dims(), order)) {
      const std::size_t size = table_size(spec, dims);
      tables.push_back({std::move(dims), std::vector<double>(size, 0.0)});
    }
  }
  return SimulatorModel(std::move(spec), order, scale, std::move(controls), std::move(tables), bias);
}

std::size_t SimulatorModel::weight_count() const {
  std::size_t count = 0;
  for (const auto& table : tables_) count += table.weights.size();
  return count;
}

std::size_t SimulatorModel::table_index(const DimensionSpec& spec, const InteractionTable& table,
                                        const Layout& layout) {
  std::size_t index = 0;
  for (std::size_t d : table.dims) {
    index = index * static_cast<std::size_t>(spec.choices(d)) + static_cast<std::size_t>(layout[d]);
  }
  return index;
}

double SimulatorModel::linear_predictor(const Layout& layout) const {
  spec_.validate(layout);
  std::vector<double> by_order(order_, 0.0);
  for (const auto& table : tables_) {
    by_order[table.dims.size() - 1] += table.weights[table_index(spec_, table, layout)];
  }
  double sum = bias_;
  for (std::size_t k = 0; k < order_; ++k) sum += controls_[k] * by_order[k];
  return sum / scale_;
}

double SimulatorModel::success_prob(const Layout& layout) const {
  return normal_cdf(linear_predictor(layout));
}

Reward SimulatorModel::draw_reward(const Layout& layout, Rng& rng) const {
  return uniform01(rng) < success_prob(layout) ? 1 : 0;
}

std::pair<Layout, double> SimulatorModel::true_best(std::uint64_t arm_cap) const {
  const std::uint64_t arms = spec_.arm_count(arm_cap);
  Layout best_layout;
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t arm = 0; arm < arms; ++arm) {
    Layout layout = spec_.layout_at(arm);
    const double p = success_prob(layout);
    if (p > best) {
      best = p;
      best_layout = std::move(layout);
    }
  }
  return {best_layout, best};
}

nlohmann::json SimulatorModel::to_json() const {
  nlohmann::json weights = nlohmann::json::object();
  for (const auto& table : tables_) weights[subset_key(table.dims)] = table.weights;
  return {
      {"choices", spec_.all_choices()},
      {"order", order_},
      {"scale", scale_},
      {"controls", controls_},
      {"bias", bias_},
      {"weights", weights},
  };
}

SimulatorModel SimulatorModel::from_json(const nlohmann::json& doc) {
  try {
    DimensionSpec spec(doc.at("choices").get<std::vector<int>>());
    const auto order = doc.at("order").get<std::size_t>();
    const auto& weights = doc.at("weights");
    std::vector<InteractionTable> tables;
    for (auto& dims : interaction_subsets(spec.dims(), order)) {
      const std::string key = subset_key(dims);
      if (!weights.contains(key)) throw DataError("model dump is missing weights for {" + key + "}");
      tables.push_back({std::move(dims), weights.at(key).get<std::vector<double>>()});
    }
    if (weights.size() != tables.size()) throw DataError("model dump has unexpected weight tables");
    return SimulatorModel(std::move(spec), order, doc.at("scale").get<double>(),
                          doc.at("controls").get<std::vector<double>>(), std::move(tables),
                          doc.value("bias", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad model dump: ") + e.what());
  }
}

SimulatorModel init_model(const DimensionSpec& spec, std::size_t order, double scale,
                          std::vector<double> controls, Rng& rng) {
  if (order < 1 || order > spec.dims()) {
    throw ConfigError("interaction order " + std::to_string(order) + " exceeds " +
                      std::to_string(spec.dims()) + " dimensions");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<InteractionTable> tables;
  for (auto& dims : interaction_subsets(spec.dims(), order)) {
    std::vector<double> weights(table_size(spec, dims));
    for (double& w : weights) w = normal(rng);
    tables.push_back({std::move(dims), std::move(weights)});
  }
  return SimulatorModel(spec, order, scale, std::move(controls), std::move(tables));
}

}  // namespace tspp
