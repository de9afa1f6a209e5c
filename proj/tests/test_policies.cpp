#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "tspp/policies.hpp"

using namespace tspp;

namespace {

constexpr double kChiAlpha = 0.001;

const std::array<Variant, 6> kAllVariants = {Variant::kFullPath,        Variant::kPartialPath,
                                             Variant::kDestinationShift, Variant::kBoostedShift,
                                             Variant::kFlatTs,           Variant::kDMabs};

PolicyConfig policy_of(Variant variant, std::size_t searches = 45, std::size_t rounds = 10,
                       std::size_t order = 2) {
  PolicyConfig policy;
  policy.variant = variant;
  policy.searches = searches;
  policy.rounds = rounds;
  policy.order = order;
  return policy;
}

// Tallies of `trials` calls to `pick`, indexed by arm.
template <typename Pick>
std::vector<std::uint64_t> arm_histogram(const DimensionSpec& spec, int trials, Pick pick) {
  std::vector<std::uint64_t> counts(spec.arm_count(), 0);
  for (int i = 0; i < trials; ++i) ++counts[spec.arm_index(pick())];
  return counts;
}

std::vector<std::uint64_t> choice_histogram(int choices, int trials, const auto& pick) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(choices), 0);
  for (int i = 0; i < trials; ++i) ++counts[static_cast<std::size_t>(pick())];
  return counts;
}

void fill_random(StateStore& store, std::size_t steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& spec = store.spec();
  for (std::size_t t = 0; t < steps; ++t) {
    store.backpropagate(spec.layout_at(rng() % spec.arm_count()), static_cast<int>(rng() % 2));
  }
}

}  // namespace

TEST_CASE("variant names and labels") {
  CHECK(parse_variant("fpf") == Variant::kFullPath);
  CHECK(parse_variant("Boosted-DS") == Variant::kBoostedShift);
  CHECK(parse_variant("FLAT_TS") == Variant::kFlatTs);
  CHECK(parse_variant("DMabs") == Variant::kDMabs);
  CHECK_THROWS_AS(parse_variant("greedy"), ConfigError);
  CHECK(policy_of(Variant::kPartialPath).label() == "PPF2");
  CHECK(policy_of(Variant::kBoostedShift, 45, 10, 3).label() == "BoostedDS3");
  CHECK(policy_of(Variant::kDMabs).label() == "DMabs");
  PolicyConfig named = policy_of(Variant::kFullPath);
  named.name = "full";
  CHECK(named.label() == "full");
}

TEST_CASE("policy parameter validation") {
  const auto spec = DimensionSpec::uniform(3, 4);
  CHECK_THROWS_AS(policy_of(Variant::kFullPath, 0).validate(spec), ConfigError);
  CHECK_THROWS_AS(policy_of(Variant::kDestinationShift, 45, 0).validate(spec), ConfigError);
  CHECK_THROWS_AS(policy_of(Variant::kPartialPath, 45, 10, 4).validate(spec), ConfigError);
  CHECK_THROWS_AS(policy_of(Variant::kBoostedShift, 45, 10, 0).validate(spec), ConfigError);
  CHECK_NOTHROW(policy_of(Variant::kFullPath, 45, 0).validate(spec));
  CHECK(make_store(policy_of(Variant::kFullPath), spec).max_order() == 3);
  CHECK(make_store(policy_of(Variant::kPartialPath), spec).max_order() == 2);
  CHECK(make_store(policy_of(Variant::kDestinationShift), spec).max_order() == 3);
  CHECK(make_store(policy_of(Variant::kBoostedShift), spec).max_order() == 2);
  CHECK(make_store(policy_of(Variant::kFlatTs), spec).max_order() == 0);
  CHECK(make_store(policy_of(Variant::kDMabs), spec).max_order() == 1);
}

TEST_CASE("ts_optimize on a fresh store is uniform") {
  StateStore store(DimensionSpec::uniform(3, 10), 2);
  Rng rng(1);
  PosteriorSampler sampler(store, Prior{}, rng);
  const auto counts = choice_histogram(10, 10000, [&] { return ts_optimize(sampler, 0, {}); });
  CHECK(oracle::chi_square_uniform_pvalue(counts) > kChiAlpha);
  CHECK(sampler.draw_count() == 10000u * 10u);
}

TEST_CASE("ts_optimize follows dominant evidence") {
  StateStore store(DimensionSpec::uniform(2, 5), 1);
  store.add_counts(PartialAssignment{{0, 0}}, {100, 0});
  for (int v = 1; v < 5; ++v) store.add_counts(PartialAssignment{{0, v}}, {0, 100});

  // Oracle: Beta(101, 1) against four Beta(1, 101) draws.
  std::mt19937_64 orng(99);
  int oracle_wins = 0;
  for (int i = 0; i < 100000; ++i) {
    const double top = oracle::beta_draw(101, 1, orng);
    bool win = true;
    for (int v = 1; v < 5; ++v) win = win && top > oracle::beta_draw(1, 101, orng);
    oracle_wins += win ? 1 : 0;
  }
  CHECK(oracle_wins >= 99900);

  Rng rng(2);
  PosteriorSampler sampler(store, Prior{}, rng);
  int wins = 0;
  for (int i = 0; i < 1000; ++i) wins += ts_optimize(sampler, 0, {}) == 0 ? 1 : 0;
  CHECK(wins >= 999);
}

TEST_CASE("ts_optimize over a single-choice dimension") {
  StateStore store(DimensionSpec({3, 1}), 2);
  Rng rng(3);
  PosteriorSampler sampler(store, Prior{}, rng);
  for (int i = 0; i < 20; ++i) CHECK(ts_optimize(sampler, 1, PartialAssignment{{0, i % 3}}) == 0);
}

TEST_CASE("ts_optimize rejects unsupported keys") {
  StateStore store(DimensionSpec::uniform(3, 4), 1, false);
  Rng rng(4);
  PosteriorSampler sampler(store, Prior{}, rng);
  CHECK_THROWS_AS(ts_optimize(sampler, 0, PartialAssignment{{1, 0}}), ConfigError);
  CHECK_THROWS_AS(ts_optimize(sampler, 1, PartialAssignment{{1, 0}}), SpecViolation);
  CHECK_THROWS_AS(ts_optimize(sampler, 3, {}), SpecViolation);
  CHECK_NOTHROW(ts_optimize(sampler, 0, {}));
}

TEST_CASE("bst_ts_optimize with nothing fixed is uniform") {
  StateStore store(DimensionSpec::uniform(3, 6), 2);
  Rng rng(5);
  PosteriorSampler sampler(store, Prior{}, rng);
  const auto counts = choice_histogram(6, 10000, [&] { return bst_ts_optimize(sampler, 1, {}, 2); });
  CHECK(oracle::chi_square_uniform_pvalue(counts) > kChiAlpha);
  CHECK(sampler.draw_count() == 60000u);
}

TEST_CASE("bst_ts_optimize sums one singleton and two pairs at m=2, D=3") {
  StateStore store(DimensionSpec::uniform(3, 10), 2);
  Rng rng(6);
  PosteriorSampler sampler(store, Prior{}, rng);
  bst_ts_optimize(sampler, 0, PartialAssignment{{1, 2}, {2, 3}}, 2);
  CHECK(sampler.draw_count() == 3u * 10u);

  StateStore triple(DimensionSpec::uniform(4, 5), 3);
  PosteriorSampler wide(triple, Prior{}, rng);
  // Singleton, three pairs and three triples per choice.
  bst_ts_optimize(wide, 0, PartialAssignment{{1, 0}, {2, 0}, {3, 0}}, 3);
  CHECK(wide.draw_count() == 7u * 5u);

  StateStore pairs_only(DimensionSpec::uniform(4, 5), 2, false);
  PosteriorSampler narrow(pairs_only, Prior{}, rng);
  CHECK_THROWS_AS(bst_ts_optimize(narrow, 0, PartialAssignment{{1, 0}, {2, 0}}, 3), ConfigError);
  CHECK_NOTHROW(bst_ts_optimize(narrow, 0, PartialAssignment{{1, 0}, {2, 0}}, 2));
}

TEST_CASE("bst_ts_optimize against a Monte Carlo oracle") {
  const auto spec = DimensionSpec::uniform(2, 3);
  const PartialAssignment fixed{{1, 1}};
  const int calls = 1000;

  // Score of choice v: singleton draw plus the draw for {(0, v), (1, 1)}.
  auto oracle_rate = [](const std::array<BetaCounts, 3>& single, const std::array<BetaCounts, 3>& pair) {
    std::mt19937_64 orng(1234);
    const int n = 200000;
    int wins = 0;
    for (int i = 0; i < n; ++i) {
      std::array<double, 3> score{};
      for (int v = 0; v < 3; ++v) {
        score[v] = oracle::beta_draw(single[v].alpha + 1.0, single[v].beta + 1.0, orng) +
                   oracle::beta_draw(pair[v].alpha + 1.0, pair[v].beta + 1.0, orng);
      }
      wins += (score[0] > score[1] && score[0] > score[2]) ? 1 : 0;
    }
    return static_cast<double>(wins) / n;
  };

  SUBCASE("pair evidence only") {
    // Only the pair key carries evidence; the singleton draws stay uniform and
    // dilute the pair's advantage.
    StateStore store(spec, 2);
    store.add_counts(PartialAssignment{{0, 0}, {1, 1}}, {200, 0});
    const double expected = oracle_rate({}, {BetaCounts{200, 0}, BetaCounts{}, BetaCounts{}});
    Rng rng(7);
    PosteriorSampler sampler(store, Prior{}, rng);
    int wins = 0;
    for (int i = 0; i < calls; ++i) wins += bst_ts_optimize(sampler, 0, fixed, 2) == 0 ? 1 : 0;
    CHECK(std::abs(wins / static_cast<double>(calls) - expected) <
          oracle::binomial_band(expected, calls) + 0.005);
    CHECK(expected < 0.99);
  }

  SUBCASE("evidence from a consistent history") {
    StateStore store(spec, 2);
    for (int i = 0; i < 200; ++i) store.backpropagate(Layout{0, 1}, 1);
    const double expected =
        oracle_rate({BetaCounts{200, 0}, BetaCounts{}, BetaCounts{}},
                    {BetaCounts{200, 0}, BetaCounts{}, BetaCounts{}});
    CHECK(expected >= 0.99);
    Rng rng(8);
    PosteriorSampler sampler(store, Prior{}, rng);
    int wins = 0;
    for (int i = 0; i < calls; ++i) wins += bst_ts_optimize(sampler, 0, fixed, 2) == 0 ? 1 : 0;
    CHECK(wins >= 990);
  }
}

TEST_CASE("plan_fpf on a fresh store is uniform over arms") {
  const auto spec = DimensionSpec::uniform(2, 3);
  StateStore store(spec, 2);
  Rng rng(9);
  PosteriorSampler sampler(store, Prior{}, rng);
  const auto counts = arm_histogram(spec, 10000, [&] { return plan_fpf(sampler); });
  CHECK(oracle::chi_square_uniform_pvalue(counts) > kChiAlpha);
}

TEST_CASE("plan_fpf with one dimension is a single Thompson step") {
  StateStore store(DimensionSpec::uniform(1, 7), 1);
  fill_random(store, 50, 10);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng a(seed);
    Rng b(seed);
    PosteriorSampler sa(store, Prior{}, a);
    PosteriorSampler sb(store, Prior{}, b);
    CHECK(plan_fpf(sa)[0] == ts_optimize(sb, 0, {}));
  }
}

TEST_CASE("plan_fpf follows two-stage dominance") {
  // [1, 2] (0-based [0, 1]) always succeeds, every other arm always fails.
  const auto spec = DimensionSpec::uniform(2, 3);
  StateStore store(spec, 2);
  std::vector<std::pair<Layout, int>> history;
  for (std::uint64_t arm = 0; arm < spec.arm_count(); ++arm) {
    const Layout layout = spec.layout_at(arm);
    const int reward = layout == Layout{0, 1} ? 1 : 0;
    for (int i = 0; i < 100; ++i) {
      store.backpropagate(layout, reward);
      history.emplace_back(layout, reward);
    }
  }

  // Oracle: the same two-stage search, run on brute-force tallies with an
  // independent Beta sampler.
  auto tally = [&](const std::vector<std::pair<std::size_t, int>>& pairs) {
    BetaCounts c;
    for (const auto& [layout, reward] : history) {
      bool match = true;
      for (auto [d, v] : pairs) match = match && layout[d] == v;
      if (match) (reward == 1 ? c.alpha : c.beta) += 1;
    }
    return c;
  };
  std::mt19937_64 orng(4321);
  const int n = 20000;
  int oracle_hits = 0;
  for (int i = 0; i < n; ++i) {
    const std::size_t first = orng() % 2;
    const std::size_t second = 1 - first;
    auto pick = [&](std::size_t dim, std::vector<std::pair<std::size_t, int>> given) {
      int best_v = 0;
      double best = -1.0;
      for (int v = 0; v < 3; ++v) {
        auto key = given;
        key.emplace_back(dim, v);
        const BetaCounts c = tally(key);
        const double theta = oracle::beta_draw(c.alpha + 1.0, c.beta + 1.0, orng);
        if (theta > best) {
          best = theta;
          best_v = v;
        }
      }
      return best_v;
    };
    std::array<int, 2> chosen{};
    chosen[first] = pick(first, {});
    chosen[second] = pick(second, {{first, chosen[first]}});
    oracle_hits += (chosen[0] == 0 && chosen[1] == 1) ? 1 : 0;
  }
  const double expected = static_cast<double>(oracle_hits) / n;
  CHECK(expected >= 0.95);

  Rng rng(11);
  PosteriorSampler sampler(store, Prior{}, rng);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) hits += plan_fpf(sampler) == Layout{0, 1} ? 1 : 0;
  CHECK(hits >= 950);
  CHECK(std::abs(hits / 1000.0 - expected) < oracle::binomial_band(expected, 1000) + 0.01);
}

TEST_CASE("plan_ppf structure") {
  const auto spec = DimensionSpec::uniform(3, 10);
  StateStore store(spec, 3);
  fill_random(store, 300, 12);
  Rng rng(13);
  PosteriorSampler sampler(store, Prior{}, rng);

  // m = 2, D = 3: one sequential fix, then two conditional optimizations.
  plan_ppf(sampler, 2);
  CHECK(sampler.draw_count() == 30u);
  sampler.reset_draw_count();
  plan_ppf(sampler, 1);
  CHECK(sampler.draw_count() == 30u);
  CHECK_THROWS_AS(plan_ppf(sampler, 4), ConfigError);
  CHECK_THROWS_AS(plan_ppf(sampler, 0), ConfigError);
}

TEST_CASE("plan_ppf of full order matches plan_fpf") {
  const auto spec = DimensionSpec({4, 3, 5});
  StateStore store(spec, 3);
  fill_random(store, 400, 14);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng a(seed);
    Rng b(seed);
    PosteriorSampler sa(store, Prior{}, a);
    PosteriorSampler sb(store, Prior{}, b);
    CHECK(plan_ppf(sa, 3) == plan_fpf(sb));
  }
}

TEST_CASE("DMabs is partial path finding of order one") {
  const auto spec = DimensionSpec::uniform(3, 6);
  StateStore store(spec, 1);
  fill_random(store, 400, 15);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng a(seed);
    Rng b(seed);
    PosteriorSampler sa(store, Prior{}, a);
    PosteriorSampler sb(store, Prior{}, b);
    CHECK(select_arm(policy_of(Variant::kDMabs), sa) == plan_ppf(sb, 1));
  }
}

TEST_CASE("plan_ds without rounds returns a uniform random layout") {
  const auto spec = DimensionSpec::uniform(2, 3);
  StateStore store(spec, 2);
  fill_random(store, 100, 16);
  Rng rng(17);
  PosteriorSampler sampler(store, Prior{}, rng);
  const auto counts = arm_histogram(spec, 9000, [&] { return plan_ds(sampler, 0); });
  CHECK(oracle::chi_square_uniform_pvalue(counts) > kChiAlpha);
  CHECK(sampler.draw_count() == 0);
  const auto boosted = arm_histogram(spec, 9000, [&] { return plan_boosted_ds(sampler, 0, 2); });
  CHECK(oracle::chi_square_uniform_pvalue(boosted) > kChiAlpha);
}

TEST_CASE("destination shift in one dimension is plain Thompson sampling") {
  StateStore store(DimensionSpec::uniform(1, 5), 1);
  fill_random(store, 60, 18);
  const std::array<std::size_t, 1> dims = {0};
  for (int start = 0; start < 5; ++start) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng a(seed);
      Rng b(seed);
      PosteriorSampler sa(store, Prior{}, a);
      PosteriorSampler sb(store, Prior{}, b);
      CHECK(shift_destination(sa, Layout{start}, dims)[0] == ts_optimize(sb, 0, {}));
    }
  }

  // With overwhelming evidence the outcome no longer depends on the start.
  StateStore sharp(DimensionSpec::uniform(1, 4), 1);
  sharp.add_counts(PartialAssignment{{0, 2}}, {1000, 0});
  for (int v : {0, 1, 3}) sharp.add_counts(PartialAssignment{{0, v}}, {0, 1000});
  Rng rng(19);
  PosteriorSampler sampler(sharp, Prior{}, rng);
  for (int i = 0; i < 200; ++i) CHECK(plan_ds(sampler, 1) == Layout{2});
}

TEST_CASE("hand-traced destination shift") {
  // 0-based: [0, 0] dominates its neighbours. Start at [1, 0], shift dim 0.
  const auto spec = DimensionSpec::uniform(2, 2);
  StateStore store(spec, 2);
  store.add_counts(PartialAssignment{{0, 0}, {1, 0}}, {1000, 0});
  store.add_counts(PartialAssignment{{0, 1}, {1, 0}}, {0, 1000});
  store.add_counts(PartialAssignment{{0, 0}, {1, 1}}, {0, 1000});
  const std::array<std::size_t, 1> dims = {0};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    PosteriorSampler sampler(store, Prior{}, rng);
    CHECK(shift_destination(sampler, Layout{1, 0}, dims) == Layout{0, 0});
  }
}

TEST_CASE("boosted destination shift draw structure and uniformity") {
  const auto spec = DimensionSpec::uniform(2, 3);
  StateStore store(spec, 2);
  Rng rng(20);
  PosteriorSampler sampler(store, Prior{}, rng);
  plan_boosted_ds(sampler, 4, 2);
  // Each round: one singleton and one pair draw per choice.
  CHECK(sampler.draw_count() == 4u * 2u * 3u);
  const auto counts = arm_histogram(spec, 9000, [&] { return plan_boosted_ds(sampler, 3, 2); });
  CHECK(oracle::chi_square_uniform_pvalue(counts) > kChiAlpha);
}

TEST_CASE("one search equals the planner itself") {
  const auto spec = DimensionSpec({3, 4, 2});
  StateStore store(spec, 3);
  fill_random(store, 300, 21);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto same = [&](Variant variant, auto plan) {
      Rng a(seed);
      Rng b(seed);
      PosteriorSampler sa(store, Prior{}, a);
      PosteriorSampler sb(store, Prior{}, b);
      return select_arm(policy_of(variant, 1, 3, 2), sa) == plan(sb);
    };
    CHECK(same(Variant::kFullPath, [](PosteriorSampler& s) { return plan_fpf(s); }));
    CHECK(same(Variant::kPartialPath, [](PosteriorSampler& s) { return plan_ppf(s, 2); }));
    CHECK(same(Variant::kDestinationShift, [](PosteriorSampler& s) { return plan_ds(s, 3); }));
    CHECK(same(Variant::kBoostedShift, [](PosteriorSampler& s) { return plan_boosted_ds(s, 3, 2); }));
  }
}

TEST_CASE("FlatTS selection") {
  SUBCASE("fresh store is uniform") {
    const auto spec = DimensionSpec::uniform(2, 2);
    StateStore store(spec, 0);
    Rng rng(22);
    const auto counts =
        arm_histogram(spec, 10000, [&] { return select_arm(policy_of(Variant::kFlatTs), store, rng); });
    CHECK(oracle::chi_square_uniform_pvalue(counts) > kChiAlpha);
  }
  SUBCASE("dominant arm") {
    const auto spec = DimensionSpec::uniform(2, 2);
    StateStore store(spec, 0);
    for (std::uint64_t arm = 0; arm < 4; ++arm) {
      store.add_counts(PartialAssignment::from_layout(spec.layout_at(arm)),
                       arm == 0 ? BetaCounts{500, 0} : BetaCounts{0, 500});
    }
    Rng rng(23);
    int wins = 0;
    for (int i = 0; i < 1000; ++i) {
      wins += select_arm(policy_of(Variant::kFlatTs), store, rng) == Layout{0, 0} ? 1 : 0;
    }
    CHECK(wins >= 999);
  }
  SUBCASE("two arms with equal counts split evenly") {
    const auto spec = DimensionSpec::uniform(1, 2);
    StateStore store(spec, 0);
    store.add_counts(PartialAssignment{{0, 0}}, {30, 20});
    store.add_counts(PartialAssignment{{0, 1}}, {30, 20});
    Rng rng(24);
    PosteriorSampler sampler(store, Prior{}, rng);
    int first = 0;
    for (int i = 0; i < 10000; ++i) first += flat_ts_select(sampler) == Layout{0} ? 1 : 0;
    CHECK(std::abs(first / 10000.0 - 0.5) < oracle::binomial_band(0.5, 10000));
  }
  SUBCASE("arm cap") {
    StateStore store(DimensionSpec::uniform(3, 10), 0);
    Rng rng(25);
    PosteriorSampler sampler(store, Prior{}, rng);
    CHECK_THROWS_AS(flat_ts_select(sampler, 999), ConfigError);
    CHECK_NOTHROW(flat_ts_select(sampler, 1000));
  }
}

TEST_CASE("every variant is deterministic and returns valid layouts") {
  std::mt19937_64 gen(26);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dims = 1 + gen() % 4;
    std::vector<int> choices(dims);
    for (auto& n : choices) n = 1 + static_cast<int>(gen() % 5);
    const DimensionSpec spec(choices);
    for (Variant variant : kAllVariants) {
      const std::size_t order = 1 + gen() % dims;
      const PolicyConfig policy = policy_of(variant, 1 + gen() % 5, 1 + gen() % 4, order);
      StateStore store = make_store(policy, spec);
      fill_random(store, gen() % 100, gen());
      const std::uint64_t seed = gen();
      Rng a(seed);
      Rng b(seed);
      const Layout first = select_arm(policy, store, a);
      CHECK_NOTHROW(spec.validate(first));
      CHECK(first == select_arm(policy, store, b));
    }
  }
}

TEST_CASE("draw counts per selection stay within the planner ceilings") {
  const std::size_t D = 3;
  const std::size_t N = 10;
  const std::size_t S = 45;
  const std::size_t K = 10;
  const auto spec = DimensionSpec::uniform(D, static_cast<int>(N));
  const std::map<Variant, std::size_t> ceiling = {
      {Variant::kFullPath, S * N * D + S},
      {Variant::kPartialPath, S * N * D + S},
      {Variant::kDestinationShift, S * N * K + S},
      {Variant::kBoostedShift, S * K * N * D + S},
  };
  for (const auto& [variant, bound] : ceiling) {
    const PolicyConfig policy = policy_of(variant, S, K, 2);
    StateStore store = make_store(policy, spec);
    fill_random(store, 500, 27);
    Rng rng(28);
    for (int i = 0; i < 20; ++i) {
      PosteriorSampler sampler(store, Prior{}, rng);
      select_arm(policy, sampler);
      CHECK(sampler.draw_count() <= bound);
      CHECK(sampler.draw_count() >= S);
    }
  }
}
