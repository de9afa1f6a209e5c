#include "tspp/sampling.hpp"

#include <cmath>

#include <boost/random/normal_distribution.hpp>

namespace tspp {

// Marsaglia & Tsang (2000) squeeze/rejection on a ziggurat normal; shapes
// below one are boosted with Gamma(a) = Gamma(a + 1) * U^(1/a).
double sample_gamma(double shape, Rng& rng) {
  if (shape < 1.0) {
    const double u = uniform01(rng);
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  boost::random::normal_distribution<double> normal;
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_beta(double a, double b, Rng& rng) {
  const double x = sample_gamma(a, rng);
  const double y = sample_gamma(b, rng);
  const double sum = x + y;
  // Both gammas underflow only for tiny shapes; fall back to the mean.
  if (!(sum > 0.0)) return a / (a + b);
  return x / sum;
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sample_theta(const StateStore& store, const PartialAssignment& key, const Prior& prior,
                    Rng& rng) {
  prior.validate();
  const BetaCounts counts = store.counts(key);
  return sample_beta(static_cast<double>(counts.alpha) + prior.alpha0,
                     static_cast<double>(counts.beta) + prior.beta0, rng);
}

PosteriorSampler::PosteriorSampler(const StateStore& store, const Prior& prior, Rng& rng)
    : store_(&store), prior_(prior), rng_(&rng) {
  prior_.validate();
}

}  // namespace tspp
