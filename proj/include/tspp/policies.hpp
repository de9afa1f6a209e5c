#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "tspp/core.hpp"
#include "tspp/sampling.hpp"
#include "tspp/state_store.hpp"

namespace tspp {

enum class Variant {
  kFullPath,          // FPF
  kPartialPath,       // PPF-m
  kDestinationShift,  // DS
  kBoostedShift,      // Boosted-DS-m
  kFlatTs,            // Thompson sampling over all N^D arms
  kDMabs,             // one independent bandit per dimension
};

std::string variant_name(Variant variant);
// Accepts FPF, PPF, DS, BoostedDS, FlatTS, DMabs (case-insensitive).
Variant parse_variant(const std::string& name);

struct PolicyConfig {
  Variant variant = Variant::kFullPath;
  std::size_t searches = 45;  // S: candidate layouts per selection
  std::size_t rounds = 10;    // K: hill-climbing rounds (DS variants)
  std::size_t order = 2;      // m: interaction order (PPF / Boosted-DS)
  Prior prior;
  std::string name;  // display label; empty means the default label

  // "FPF", "PPF2", "DS", "BoostedDS2", "FlatTS", "DMabs" unless `name` is set.
  std::string label() const;
  // Throws ConfigError when a parameter is out of range for `spec`.
  void validate(const DimensionSpec& spec) const;
  // Highest key size the variant needs eagerly maintained.
  std::size_t required_max_order(const DimensionSpec& spec) const;
};

// Fresh store with the key coverage the variant samples from.
StateStore make_store(const PolicyConfig& policy, const DimensionSpec& spec);

// Thompson step for one dimension: one draw per choice from the key
// fixed + {(target, v)}; returns the argmax, lowest choice on ties.
int ts_optimize(PosteriorSampler& sampler, std::size_t target_dim, const PartialAssignment& fixed);

// Boosted Thompson step: each choice scores the sum of draws from
// {(target, v)} and {(target, v)} + F for every subset F of `fixed` with
// 1 <= |F| <= order - 1.
int bst_ts_optimize(PosteriorSampler& sampler, std::size_t target_dim,
                    const PartialAssignment& fixed, std::size_t order);

// Full path finding: random dimension order, each dimension fixed
// conditioned on all earlier ones.
Layout plan_fpf(PosteriorSampler& sampler);

// Partial path finding of order m: m - 1 dimensions fixed sequentially, the
// rest optimized independently given those m - 1 pairs.
Layout plan_ppf(PosteriorSampler& sampler, std::size_t order);

// Destination shift: K rounds of hill climbing from a random layout.
Layout plan_ds(PosteriorSampler& sampler, std::size_t rounds);

// Destination shift scored with bst_ts_optimize.
Layout plan_boosted_ds(PosteriorSampler& sampler, std::size_t rounds, std::size_t order);

// Hill climbing from `start` along an explicit dimension sequence. With
// boosted_order == 0 each round uses ts_optimize, otherwise bst_ts_optimize.
Layout shift_destination(PosteriorSampler& sampler, Layout start,
                         std::span<const std::size_t> dims, std::size_t boosted_order = 0);

// One draw per full layout, argmax returned (lexicographically smallest on ties).
Layout flat_ts_select(PosteriorSampler& sampler, std::uint64_t arm_cap = kDefaultArmCap);

// Runs the variant's planner S times and keeps the candidate whose
// full-layout draw is highest. FlatTS and DMabs bypass the candidate loop.
// The sampler's prior is used for every draw.
Layout select_arm(const PolicyConfig& policy, PosteriorSampler& sampler,
                  std::uint64_t arm_cap = kDefaultArmCap);
Layout select_arm(const PolicyConfig& policy, const StateStore& store, Rng& rng,
                  std::uint64_t arm_cap = kDefaultArmCap);

}  // namespace tspp
