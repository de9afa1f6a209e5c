#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tspp/core.hpp"
#include "tspp/sampling.hpp"

namespace tspp {

/// Weights of one k-way interaction: a dense table over the choice
/// combinations of `dims` (sorted), first listed dimension most significant.
struct InteractionTable {
  std::vector<std::size_t> dims;
  std::vector<double> weights;
};

/// Bernoulli reward environment driven by a probit link over additive
/// interaction weights:
///
///   eta(A) = (1 / scale) * (bias + sum_k controls[k-1] * sum_{|S| = k} w_S(A|S))
///   p(A)   = Phi(eta(A))
///
/// where S ranges over the k-subsets of dimensions for k = 1..order. Models are
/// immutable once built and may be shared across threads.
class SimulatorModel {
 public:
  // Builds a model from explicit tables. `tables` must hold one entry per
  // k-subset for k = 1..order, ordered by k and then lexicographically.
  SimulatorModel(DimensionSpec spec, std::size_t order, double scale, std::vector<double> controls,
                 std::vector<InteractionTable> tables, double bias = 0.0);

  // Model with every weight set to zero.
  static SimulatorModel zeros(DimensionSpec spec, std::size_t order, double scale,
                              std::vector<double> controls, double bias = 0.0);

  const DimensionSpec& spec() const { return spec_; }
  std::size_t order() const { return order_; }
  double scale() const { return scale_; }
  const std::vector<double>& controls() const { return controls_; }
  double bias() const { return bias_; }
  const std::vector<InteractionTable>& tables() const { return tables_; }
  std::size_t weight_count() const;

  // Weight slot of `layout` inside `table`.
  static std::size_t table_index(const DimensionSpec& spec, const InteractionTable& table,
                                 const Layout& layout);
  double& weight(std::size_t table, std::size_t slot) { return tables_.at(table).weights.at(slot); }

  double linear_predictor(const Layout& layout) const;
  double success_prob(const Layout& layout) const;
  Reward draw_reward(const Layout& layout, Rng& rng) const;

  // Exhaustive argmax of success_prob; ties go to the lexicographically
  // smallest layout. Throws ConfigError when the arm count exceeds `arm_cap`.
  std::pair<Layout, double> true_best(std::uint64_t arm_cap = kDefaultArmCap) const;

  // JSON dump: spec, order, scale, controls, bias, and weights keyed by the
  // 1-based dimension subset ("1", "1,2", ...). Round-trips bit-exactly.
  nlohmann::json to_json() const;
  static SimulatorModel from_json(const nlohmann::json& doc);

 private:
  DimensionSpec spec_;
  std::size_t order_;
  double scale_;
  std::vector<double> controls_;
  double bias_;
  std::vector<InteractionTable> tables_;
};

// Every k-subset of {0..dims-1} for k = 1..order, ordered by k then lexicographically.
std::vector<std::vector<std::size_t>> interaction_subsets(std::size_t dims, std::size_t order);

// Standard normal CDF.
double normal_cdf(double x);

// controls[k-1] = k! / (D (D-1) ... (D-k+1)) for k = 1..order.
std::vector<double> default_controls(std::size_t dims, std::size_t order);

// All weights i.i.d. N(0, 1) from `rng`, bias 0.
SimulatorModel init_model(const DimensionSpec& spec, std::size_t order, double scale,
                          std::vector<double> controls, Rng& rng);

}  // namespace tspp
