#include "tspp/policies.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <numeric>
#include <vector>

namespace tspp {
namespace {

void require_key_size(const StateStore& store, std::size_t key_size) {
  if (!store.maintains(key_size)) {
    throw ConfigError("store (max_order " + std::to_string(store.max_order()) +
                      ") does not maintain keys of size " + std::to_string(key_size));
  }
}

void check_target(const StateStore& store, std::size_t target_dim, const PartialAssignment& fixed) {
  if (target_dim >= store.spec().dims()) {
    throw SpecViolation("target dimension " + std::to_string(target_dim + 1) + " outside spec");
  }
  if (fixed.contains(target_dim)) {
    throw SpecViolation("target dimension " + std::to_string(target_dim + 1) + " is already fixed");
  }
}

KeyCode full_key(const DimensionSpec& spec, const Layout& layout) {
  KeyCode code = 0;
  for (std::size_t d = 0; d < spec.dims(); ++d) {
    code += static_cast<KeyCode>(layout[d] + 1) * spec.key_stride(d);
  }
  return code;
}

Layout random_layout(const DimensionSpec& spec, Rng& rng) {
  std::vector<int> choices(spec.dims());
  for (std::size_t d = 0; d < spec.dims(); ++d) {
    choices[d] = std::uniform_int_distribution<int>(0, spec.choices(d) - 1)(rng);
  }
  return Layout(std::move(choices));
}

std::size_t random_dim(const DimensionSpec& spec, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, spec.dims() - 1)(rng);
}

// Re-optimizes one dimension of `layout` given all its other entries.
void shift_once(PosteriorSampler& sampler, Layout& layout, std::size_t dim,
                std::size_t boosted_order) {
  PartialAssignment rest = PartialAssignment::from_layout(layout).without(dim);
  layout[dim] = boosted_order == 0 ? ts_optimize(sampler, dim, rest)
                                   : bst_ts_optimize(sampler, dim, rest, boosted_order);
}

// Codes of every subset of `fixed` with 1..max_size pairs.
void collect_subset_codes(const std::vector<KeyCode>& digits, std::size_t max_size,
                          std::size_t start, std::size_t size, KeyCode code,
                          std::vector<KeyCode>& out) {
  for (std::size_t i = start; i < digits.size(); ++i) {
    const KeyCode next = code + digits[i];
    out.push_back(next);
    if (size + 1 < max_size) collect_subset_codes(digits, max_size, i + 1, size + 1, next, out);
  }
}

}  // namespace

std::string variant_name(Variant variant) {
  switch (variant) {
    case Variant::kFullPath: return "FPF";
    case Variant::kPartialPath: return "PPF";
    case Variant::kDestinationShift: return "DS";
    case Variant::kBoostedShift: return "BoostedDS";
    case Variant::kFlatTs: return "FlatTS";
    case Variant::kDMabs: return "DMabs";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  std::string lower;
  for (char c : name) {
    if (c != '-' && c != '_') lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (lower == "fpf") return Variant::kFullPath;
  if (lower == "ppf") return Variant::kPartialPath;
  if (lower == "ds") return Variant::kDestinationShift;
  if (lower == "boostedds" || lower == "bds") return Variant::kBoostedShift;
  if (lower == "flatts" || lower == "ndmab") return Variant::kFlatTs;
  if (lower == "dmabs" || lower == "dmab") return Variant::kDMabs;
  throw ConfigError("unknown policy variant '" + name + "'");
}

std::string PolicyConfig::label() const {
  if (!name.empty()) return name;
  switch (variant) {
    case Variant::kPartialPath:
    case Variant::kBoostedShift:
      return variant_name(variant) + std::to_string(order);
    default:
      return variant_name(variant);
  }
}

void PolicyConfig::validate(const DimensionSpec& spec) const {
  prior.validate();
  if (searches < 1) throw ConfigError(label() + ": searches must be >= 1");
  if ((variant == Variant::kDestinationShift || variant == Variant::kBoostedShift) && rounds < 1) {
    throw ConfigError(label() + ": rounds must be >= 1");
  }
  if (variant == Variant::kPartialPath || variant == Variant::kBoostedShift) {
    if (order < 1 || order > spec.dims()) {
      throw ConfigError(label() + ": order must be in [1, " + std::to_string(spec.dims()) + "]");
    }
  }
}

std::size_t PolicyConfig::required_max_order(const DimensionSpec& spec) const {
  switch (variant) {
    case Variant::kFullPath:
    case Variant::kDestinationShift:
      return spec.dims();
    case Variant::kPartialPath:
    case Variant::kBoostedShift:
      return order;
    case Variant::kFlatTs:
      return 0;
    case Variant::kDMabs:
      return 1;
  }
  return spec.dims();
}

StateStore make_store(const PolicyConfig& policy, const DimensionSpec& spec) {
  policy.validate(spec);
  return StateStore(spec, policy.required_max_order(spec), /*track_full=*/true);
}

int ts_optimize(PosteriorSampler& sampler, std::size_t target_dim, const PartialAssignment& fixed) {
  const StateStore& store = sampler.store();
  check_target(store, target_dim, fixed);
  require_key_size(store, fixed.size() + 1);
  const KeyCode base = store.encode(fixed);
  const KeyCode stride = store.spec().key_stride(target_dim);
  int best_choice = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < store.spec().choices(target_dim); ++v) {
    const double theta = sampler.draw(base + static_cast<KeyCode>(v + 1) * stride);
    if (theta > best) {
      best = theta;
      best_choice = v;
    }
  }
  return best_choice;
}

int bst_ts_optimize(PosteriorSampler& sampler, std::size_t target_dim,
                    const PartialAssignment& fixed, std::size_t order) {
  const StateStore& store = sampler.store();
  check_target(store, target_dim, fixed);
  if (order < 1) throw ConfigError("boosted order must be >= 1");
  const std::size_t max_subset = std::min(order - 1, fixed.size());
  require_key_size(store, max_subset + 1);

  std::vector<KeyCode> digits;
  for (const auto& [dim, choice] : fixed.entries()) {
    digits.push_back(store.encode(PartialAssignment{{dim, choice}}));
  }
  std::vector<KeyCode> subsets;
  if (max_subset > 0) collect_subset_codes(digits, max_subset, 0, 0, 0, subsets);

  const KeyCode stride = store.spec().key_stride(target_dim);
  int best_choice = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < store.spec().choices(target_dim); ++v) {
    const KeyCode single = static_cast<KeyCode>(v + 1) * stride;
    double score = sampler.draw(single);
    for (KeyCode subset : subsets) score += sampler.draw(single + subset);
    if (score > best) {
      best = score;
      best_choice = v;
    }
  }
  return best_choice;
}

Layout plan_fpf(PosteriorSampler& sampler) {
  const DimensionSpec& spec = sampler.spec();
  std::vector<std::size_t> order(spec.dims());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), sampler.rng());

  std::vector<int> choices(spec.dims());
  PartialAssignment fixed;
  for (std::size_t dim : order) {
    choices[dim] = ts_optimize(sampler, dim, fixed);
    fixed.assign(dim, choices[dim]);
  }
  return Layout(std::move(choices));
}

Layout plan_ppf(PosteriorSampler& sampler, std::size_t order) {
  const DimensionSpec& spec = sampler.spec();
  if (order < 1 || order > spec.dims()) {
    throw ConfigError("partial path order " + std::to_string(order) + " outside [1, " +
                      std::to_string(spec.dims()) + "]");
  }
  std::vector<std::size_t> dims(spec.dims());
  std::iota(dims.begin(), dims.end(), std::size_t{0});
  if (order > 1) std::shuffle(dims.begin(), dims.end(), sampler.rng());

  std::vector<int> choices(spec.dims());
  PartialAssignment prefix;
  for (std::size_t i = 0; i + 1 < order; ++i) {
    choices[dims[i]] = ts_optimize(sampler, dims[i], prefix);
    prefix.assign(dims[i], choices[dims[i]]);
  }
  for (std::size_t d = 0; d < spec.dims(); ++d) {
    if (!prefix.contains(d)) choices[d] = ts_optimize(sampler, d, prefix);
  }
  return Layout(std::move(choices));
}

Layout plan_ds(PosteriorSampler& sampler, std::size_t rounds) {
  Layout layout = random_layout(sampler.spec(), sampler.rng());
  for (std::size_t k = 0; k < rounds; ++k) {
    shift_once(sampler, layout, random_dim(sampler.spec(), sampler.rng()), 0);
  }
  return layout;
}

Layout plan_boosted_ds(PosteriorSampler& sampler, std::size_t rounds, std::size_t order) {
  if (order < 1) throw ConfigError("boosted order must be >= 1");
  Layout layout = random_layout(sampler.spec(), sampler.rng());
  for (std::size_t k = 0; k < rounds; ++k) {
    shift_once(sampler, layout, random_dim(sampler.spec(), sampler.rng()), order);
  }
  return layout;
}

Layout shift_destination(PosteriorSampler& sampler, Layout start,
                         std::span<const std::size_t> dims, std::size_t boosted_order) {
  sampler.spec().validate(start);
  for (std::size_t dim : dims) shift_once(sampler, start, dim, boosted_order);
  return start;
}

Layout flat_ts_select(PosteriorSampler& sampler, std::uint64_t arm_cap) {
  const DimensionSpec& spec = sampler.spec();
  const std::uint64_t arms = spec.arm_count(arm_cap);
  require_key_size(sampler.store(), spec.dims());

  std::vector<int> current(spec.dims(), 0);
  std::vector<int> best_layout = current;
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t arm = 0; arm < arms; ++arm) {
    KeyCode code = 0;
    for (std::size_t d = 0; d < spec.dims(); ++d) {
      code += static_cast<KeyCode>(current[d] + 1) * spec.key_stride(d);
    }
    const double theta = sampler.draw(code);
    if (theta > best) {
      best = theta;
      best_layout = current;
    }
    // Lexicographic odometer, last dimension fastest.
    for (std::size_t d = spec.dims(); d-- > 0;) {
      if (++current[d] < spec.choices(d)) break;
      current[d] = 0;
    }
  }
  return Layout(std::move(best_layout));
}

Layout select_arm(const PolicyConfig& policy, PosteriorSampler& sampler, std::uint64_t arm_cap) {
  const DimensionSpec& spec = sampler.spec();
  policy.validate(spec);
  switch (policy.variant) {
    case Variant::kFlatTs:
      return flat_ts_select(sampler, arm_cap);
    case Variant::kDMabs:
      return plan_ppf(sampler, 1);
    default:
      break;
  }
  require_key_size(sampler.store(), spec.dims());

  Layout best_layout;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < policy.searches; ++s) {
    Layout candidate;
    switch (policy.variant) {
      case Variant::kFullPath:
        candidate = plan_fpf(sampler);
        break;
      case Variant::kPartialPath:
        candidate = plan_ppf(sampler, policy.order);
        break;
      case Variant::kDestinationShift:
        candidate = plan_ds(sampler, policy.rounds);
        break;
      case Variant::kBoostedShift:
        candidate = plan_boosted_ds(sampler, policy.rounds, policy.order);
        break;
      default:
        break;
    }
    const double theta = sampler.draw(full_key(spec, candidate));
    if (theta > best) {
      best = theta;
      best_layout = std::move(candidate);
    }
  }
  return best_layout;
}

Layout select_arm(const PolicyConfig& policy, const StateStore& store, Rng& rng,
                  std::uint64_t arm_cap) {
  PosteriorSampler sampler(store, policy.prior, rng);
  return select_arm(policy, sampler, arm_cap);
}

}  // namespace tspp
