#pragma once

#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "tspp/simulator.hpp"

namespace fixtures {

// One-dimensional, first-order model whose arms succeed with `rates`.
inline tspp::SimulatorModel rate_model(const std::vector<double>& rates) {
  boost::math::normal_distribution<double> normal;
  std::vector<double> weights;
  for (double p : rates) {
    if (p <= 0.0) {
      weights.push_back(-40.0);
    } else if (p >= 1.0) {
      weights.push_back(40.0);
    } else {
      weights.push_back(boost::math::quantile(normal, p));
    }
  }
  const int n = static_cast<int>(rates.size());
  return tspp::SimulatorModel(tspp::DimensionSpec({n}), 1, 1.0, {1.0},
                              {tspp::InteractionTable{{0}, weights}});
}

}  // namespace fixtures
