#pragma once

#include <cstdint>
#include <random>

#include "tspp/core.hpp"
#include "tspp/state_store.hpp"

namespace tspp {

// The per-replication deterministic random stream.
using Rng = std::mt19937_64;

// Gamma(shape, 1).
double sample_gamma(double shape, Rng& rng);

// Beta(a, b) via the gamma-ratio method.
double sample_beta(double a, double b, Rng& rng);

// Uniform double in [0, 1) from the top 53 bits of one engine output.
double uniform01(Rng& rng);

/// One draw from Beta(alpha + alpha0, beta + beta0) for the key's counts.
double sample_theta(const StateStore& store, const PartialAssignment& key, const Prior& prior,
                    Rng& rng);

/// Posterior draws against one store, counting every Beta draw it makes.
class PosteriorSampler {
 public:
  PosteriorSampler(const StateStore& store, const Prior& prior, Rng& rng);

  double draw(KeyCode code) {
    ++draws_;
    const BetaCounts counts = store_->counts(code);
    return sample_beta(static_cast<double>(counts.alpha) + prior_.alpha0,
                       static_cast<double>(counts.beta) + prior_.beta0, *rng_);
  }
  double draw(const PartialAssignment& key) { return draw(store_->encode(key)); }

  const StateStore& store() const { return *store_; }
  const DimensionSpec& spec() const { return store_->spec(); }
  const Prior& prior() const { return prior_; }
  Rng& rng() { return *rng_; }

  std::uint64_t draw_count() const { return draws_; }
  void reset_draw_count() { draws_ = 0; }

 private:
  const StateStore* store_;
  Prior prior_;
  Rng* rng_;
  std::uint64_t draws_ = 0;
};

}  // namespace tspp
