#include "tspp/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "tspp/seed.hpp"

namespace tspp {
namespace {

using nlohmann::json;

std::string fmt_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  const std::size_t n_workers = std::min(threads, count);
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (error) std::rethrow_exception(error);
}

void check_keys(const json& doc, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* name : allowed) known = known || key == name;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

Prior parse_prior(const json& doc, Prior fallback) {
  check_keys(doc, {"alpha", "beta"}, "prior");
  Prior prior{get_or(doc, "alpha", fallback.alpha0), get_or(doc, "beta", fallback.beta0)};
  prior.validate();
  return prior;
}

PolicyConfig parse_policy(const json& doc, const PolicyConfig& defaults) {
  PolicyConfig policy = defaults;
  if (doc.is_string()) {
    policy.variant = parse_variant(doc.get<std::string>());
    return policy;
  }
  check_keys(doc, {"variant", "searches", "rounds", "order", "prior", "name"}, "policy");
  if (!doc.contains("variant")) throw ConfigError("policy entry needs a 'variant'");
  policy.variant = parse_variant(get_or<std::string>(doc, "variant", ""));
  policy.searches = get_or(doc, "searches", defaults.searches);
  policy.rounds = get_or(doc, "rounds", defaults.rounds);
  policy.order = get_or(doc, "order", defaults.order);
  if (doc.contains("prior")) policy.prior = parse_prior(doc.at("prior"), defaults.prior);
  policy.name = get_or<std::string>(doc, "name", "");
  return policy;
}

json policy_to_json(const PolicyConfig& policy) {
  json doc = {
      {"variant", variant_name(policy.variant)},
      {"searches", policy.searches},
      {"rounds", policy.rounds},
      {"order", policy.order},
      {"prior", {{"alpha", policy.prior.alpha0}, {"beta", policy.prior.beta0}}},
  };
  if (!policy.name.empty()) doc["name"] = policy.name;
  return doc;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

constexpr const char* kMetricHeader = "policy,replication,metric,window_start,window_end,value\n";

void write_row(std::ostream& out, const std::string& policy, const std::string& replication,
               const std::string& metric, std::size_t start, std::size_t end, double value) {
  out << policy << ',' << replication << ',' << metric << ',' << start << ',' << end << ','
      << fmt_double(value) << '\n';
}

// Visits every (metric, window_start, window_end, value) of a run in a fixed order.
template <typename Fn>
void for_each_metric(const PolicyRun& run, std::size_t steps, Fn&& fn) {
  fn("average_regret", 1, steps, run.average_regret);
  fn("expected_regret", 1, steps, run.expected_regret);
  auto series = [&](const char* name, const WindowSeries& s) {
    for (std::size_t i = 0; i < s.values.size(); ++i) fn(name, s.start(i), s.end(i), s.values[i]);
  };
  series("convergence_rate", run.convergence);
  series("best_arm_rate", run.best_arm);
  series("window_expected_regret", run.window_regret);
}

}  // namespace

std::string version_string() { return std::string("tspp ") + TSPP_VERSION; }

std::vector<double> SimulatorConfig::resolved_controls(std::size_t dims) const {
  return controls ? *controls : default_controls(dims, order);
}

void ExperimentConfig::validate() const {
  if (spec.dims() == 0) throw ConfigError("config needs a dimension spec");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (window < 1) throw ConfigError("window must be >= 1");
  if (steps < window) throw ConfigError("steps must be >= window");
  if (policies.empty()) throw ConfigError("config lists no policies");
  if (simulator.order < 1 || simulator.order > spec.dims()) {
    throw ConfigError("simulator order must be in [1, D]");
  }
  if (!(simulator.scale > 0.0)) throw ConfigError("simulator scale must be set and positive");
  if (simulator.resolved_controls(spec.dims()).size() != simulator.order) {
    throw ConfigError("simulator controls must list one value per interaction order");
  }
  spec.arm_count(arm_cap);
  std::set<std::string> labels;
  for (const auto& policy : policies) {
    policy.validate(spec);
    if (!labels.insert(policy.label()).second) {
      throw ConfigError("duplicate policy label '" + policy.label() + "'");
    }
  }
}

ExperimentConfig parse_config(const json& input) {
  const json& doc = input.contains("config") ? input.at("config") : input;
  check_keys(doc,
             {"dims", "choices", "simulator", "policies", "searches", "rounds", "prior", "steps",
              "replications", "window", "seed", "output", "arm_cap"},
             "config");
  ExperimentConfig config;
  try {
    if (!doc.contains("choices")) throw ConfigError("config needs 'choices'");
    const json& choices = doc.at("choices");
    if (choices.is_array()) {
      config.spec = DimensionSpec(choices.get<std::vector<int>>());
      if (doc.contains("dims") && doc.at("dims").get<std::size_t>() != config.spec.dims()) {
        throw ConfigError("'dims' disagrees with the length of 'choices'");
      }
    } else {
      if (!doc.contains("dims")) throw ConfigError("config needs 'dims' when 'choices' is a number");
      config.spec = DimensionSpec::uniform(doc.at("dims").get<std::size_t>(), choices.get<int>());
    }

    if (!doc.contains("simulator")) throw ConfigError("config needs a 'simulator' section");
    const json& sim = doc.at("simulator");
    check_keys(sim, {"order", "scale", "controls", "bias"}, "simulator");
    config.simulator.order = get_or<std::size_t>(sim, "order", 2);
    if (!sim.contains("scale")) throw ConfigError("simulator needs an explicit 'scale'");
    config.simulator.scale = sim.at("scale").get<double>();
    config.simulator.bias = get_or(sim, "bias", 0.0);
    if (sim.contains("controls") && !sim.at("controls").is_string()) {
      config.simulator.controls = sim.at("controls").get<std::vector<double>>();
    } else if (sim.contains("controls") && sim.at("controls").get<std::string>() != "default") {
      throw ConfigError("simulator controls must be a list or \"default\"");
    }

    PolicyConfig defaults;
    defaults.searches = get_or<std::size_t>(doc, "searches", defaults.searches);
    defaults.rounds = get_or<std::size_t>(doc, "rounds", defaults.rounds);
    if (doc.contains("prior")) defaults.prior = parse_prior(doc.at("prior"), defaults.prior);
    if (!doc.contains("policies") || !doc.at("policies").is_array()) {
      throw ConfigError("config needs a 'policies' list");
    }
    for (const auto& entry : doc.at("policies")) config.policies.push_back(parse_policy(entry, defaults));

    config.steps = get_or<std::size_t>(doc, "steps", config.steps);
    config.replications = get_or<std::size_t>(doc, "replications", config.replications);
    config.window = get_or<std::size_t>(doc, "window", config.window);
    config.seed = get_or<std::uint64_t>(doc, "seed", config.seed);
    config.output = get_or<std::string>(doc, "output", config.output.string());
    config.arm_cap = get_or<std::uint64_t>(doc, "arm_cap", config.arm_cap);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const ExperimentConfig& config) {
  json policies = json::array();
  for (const auto& policy : config.policies) policies.push_back(policy_to_json(policy));
  return {
      {"choices", config.spec.all_choices()},
      {"simulator",
       {{"order", config.simulator.order},
        {"scale", config.simulator.scale},
        {"controls", config.simulator.resolved_controls(config.spec.dims())},
        {"bias", config.simulator.bias}}},
      {"policies", policies},
      {"steps", config.steps},
      {"replications", config.replications},
      {"window", config.window},
      {"seed", config.seed},
      {"output", config.output.string()},
      {"arm_cap", config.arm_cap},
  };
}

RunHistory simulate(const PolicyConfig& policy, const SimulatorModel& model, std::size_t steps,
                    Rng& rng, std::uint64_t arm_cap) {
  StateStore store = make_store(policy, model.spec());
  PosteriorSampler sampler(store, policy.prior, rng);
  RunHistory history;
  history.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Layout arm = select_arm(policy, sampler, arm_cap);
    const Reward reward = model.draw_reward(arm, rng);
    store.backpropagate(arm, reward);
    history.append(std::move(arm), reward);
  }
  return history;
}

SimulatorModel replication_model(const ExperimentConfig& config, std::size_t replication) {
  Rng rng(derive_seed(config.seed, replication, kModelStream));
  SimulatorModel model = init_model(config.spec, config.simulator.order, config.simulator.scale,
                                    config.simulator.resolved_controls(config.spec.dims()), rng);
  if (config.simulator.bias == 0.0) return model;
  return SimulatorModel(model.spec(), model.order(), model.scale(), model.controls(), model.tables(),
                        config.simulator.bias);
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t threads) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  const std::size_t reps = config.replications;

  std::vector<SimulatorModel> models;
  models.reserve(reps);
  for (std::size_t h = 0; h < reps; ++h) {
    models.push_back(replication_model(config, h));
    auto [best, best_prob] = models.back().true_best(config.arm_cap);
    result.replications.push_back({derive_seed(config.seed, h, kModelStream), std::move(best), best_prob});
  }

  result.runs.resize(config.policies.size() * reps);
  parallel_for(result.runs.size(), threads, [&](std::size_t job) {
    const std::size_t p = job / reps;
    const std::size_t h = job % reps;
    const PolicyConfig& policy = config.policies[p];
    const SimulatorModel& model = models[h];
    const ReplicationInfo& info = result.replications[h];

    PolicyRun run;
    run.policy = policy.label();
    run.replication = h;
    run.seed = derive_seed(config.seed, h, p);
    Rng rng(run.seed);
    const RunHistory history = simulate(policy, model, config.steps, rng, config.arm_cap);
    run.average_regret = average_regret(history, info.best_prob);
    run.expected_regret = expected_regret(history, model, info.best_prob);
    run.convergence = convergence_rate(history, config.window);
    run.best_arm = best_arm_rate(history, info.best, config.window);
    run.window_regret = windowed_expected_regret(history, model, info.best_prob, config.window);
    result.runs[job] = std::move(run);
  });
  return result;
}

SummaryStat summarize(std::span<const double> values) {
  SummaryStat stat;
  if (values.empty()) return stat;
  const auto n = static_cast<double>(values.size());
  for (double v : values) stat.mean += v;
  stat.mean /= n;
  if (values.size() < 2) return stat;
  double ss = 0.0;
  for (double v : values) ss += (v - stat.mean) * (v - stat.mean);
  stat.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return stat;
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir) {
  ensure_dir(dir);
  const ExperimentConfig& config = result.config;
  const std::size_t reps = result.replications.size();
  {
    auto out = open_out(dir / "metrics.csv");
    out << kMetricHeader;
    for (const auto& run : result.runs) {
      for_each_metric(run, config.steps, [&](const char* metric, std::size_t start, std::size_t end, double value) {
        write_row(out, run.policy, std::to_string(run.replication), metric, start, end, value);
      });
    }
  }
  {
    auto out = open_out(dir / "summary.csv");
    out << kMetricHeader;
    for (std::size_t p = 0; p < config.policies.size(); ++p) {
      // Collect each metric slot across replications, in emission order.
      std::vector<std::tuple<std::string, std::size_t, std::size_t>> slots;
      std::vector<std::vector<double>> values;
      for (std::size_t h = 0; h < reps; ++h) {
        std::size_t i = 0;
        for_each_metric(result.run(p, h), config.steps,
                        [&](const char* metric, std::size_t start, std::size_t end, double value) {
                          if (h == 0) {
                            slots.emplace_back(metric, start, end);
                            values.emplace_back();
                          }
                          values[i++].push_back(value);
                        });
      }
      const std::string label = config.policies[p].label();
      for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto stat = summarize(values[i]);
        const auto& [metric, start, end] = slots[i];
        write_row(out, label, "mean", metric, start, end, stat.mean);
        write_row(out, label, "stderr", metric, start, end, stat.std_error);
      }
    }
  }
  json seeds = json::array();
  for (std::size_t h = 0; h < reps; ++h) {
    json policy_seeds = json::object();
    for (std::size_t p = 0; p < config.policies.size(); ++p) {
      policy_seeds[result.run(p, h).policy] = result.run(p, h).seed;
    }
    seeds.push_back({{"replication", h},
                     {"model_seed", result.replications[h].model_seed},
                     {"best_layout", result.replications[h].best.to_string()},
                     {"best_prob", result.replications[h].best_prob},
                     {"policy_seeds", policy_seeds}});
  }
  json manifest = {
      {"version", version_string()},
      {"seed_derivation", "splitmix64(splitmix64(splitmix64(master) ^ replication) ^ stream)"},
      {"config", config_to_json(config)},
      {"replications", seeds},
      {"outputs", {"metrics.csv", "summary.csv"}},
  };
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "alpha2") return SweepAxis::kAlpha2;
  if (name == "N") return SweepAxis::kChoices;
  if (name == "D") return SweepAxis::kDims;
  throw ConfigError("unknown sweep axis '" + name + "' (expected alpha2, N or D)");
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kAlpha2: return "alpha2";
    case SweepAxis::kChoices: return "N";
    case SweepAxis::kDims: return "D";
  }
  return "unknown";
}

ExperimentConfig sweep_point(const ExperimentConfig& config, SweepAxis axis, double value,
                             std::size_t index) {
  ExperimentConfig point = config;
  point.seed = derive_seed(config.seed, index, kSweepStream);
  auto as_count = [&](double v) {
    if (!(v >= 1.0) || v != std::floor(v)) {
      throw ConfigError("sweep value " + fmt_double(v) + " is not a positive integer");
    }
    return static_cast<std::size_t>(v);
  };
  switch (axis) {
    case SweepAxis::kAlpha2: {
      if (config.simulator.order < 2) throw ConfigError("alpha2 sweep needs simulator order >= 2");
      auto controls = config.simulator.resolved_controls(config.spec.dims());
      controls[1] = value;
      point.simulator.controls = controls;
      break;
    }
    case SweepAxis::kChoices:
      point.spec = DimensionSpec::uniform(config.spec.dims(), static_cast<int>(as_count(value)));
      break;
    case SweepAxis::kDims:
      point.spec = DimensionSpec::uniform(as_count(value), config.spec.choices(0));
      break;
  }
  point.output = config.output / (axis_name(axis) + "_" + std::to_string(index));
  point.validate();
  return point;
}

SweepResult run_sweep(const ExperimentConfig& config, SweepAxis axis, std::span<const double> values,
                      std::size_t threads) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  SweepResult result;
  result.axis = axis;
  result.values.assign(values.begin(), values.end());
  std::vector<ExperimentConfig> points;
  for (std::size_t i = 0; i < values.size(); ++i) points.push_back(sweep_point(config, axis, values[i], i));
  for (const auto& point : points) {
    result.points.push_back(run_experiment(point, threads));
    const ExperimentResult& run = result.points.back();
    for (std::size_t p = 0; p < point.policies.size(); ++p) {
      std::vector<double> realized;
      std::vector<double> expected;
      for (std::size_t h = 0; h < point.replications; ++h) {
        realized.push_back(run.run(p, h).average_regret);
        expected.push_back(run.run(p, h).expected_regret);
      }
      result.rows.push_back({values[&point - points.data()], point.policies[p].label(), point.replications,
                             summarize(realized), summarize(expected)});
    }
  }
  return result;
}

void write_sweep(const SweepResult& result, const std::filesystem::path& dir) {
  ensure_dir(dir);
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    write_experiment(result.points[i], dir / (axis_name(result.axis) + "_" + std::to_string(i)));
  }
  auto out = open_out(dir / "sweep.csv");
  out << "axis,value,policy,replications,average_regret_mean,average_regret_stderr,"
         "expected_regret_mean,expected_regret_stderr\n";
  for (const auto& row : result.rows) {
    out << axis_name(result.axis) << ',' << fmt_double(row.value) << ',' << row.policy << ','
        << row.replications << ',' << fmt_double(row.average_regret.mean) << ','
        << fmt_double(row.average_regret.std_error) << ',' << fmt_double(row.expected_regret.mean) << ','
        << fmt_double(row.expected_regret.std_error) << '\n';
  }
}

std::vector<OpeRow> run_ope(const ExperimentConfig& config, const LoggedDataset& data, std::size_t threads) {
  if (!(data.spec == config.spec)) throw ConfigError("logged data spec differs from the config spec");
  for (const auto& policy : config.policies) policy.validate(config.spec);
  const auto stats = arm_stats(data);
  const ShrinkageResult values = james_stein(stats);
  const std::size_t reps = config.replications;

  std::vector<OpeRow> rows(config.policies.size() * reps);
  parallel_for(rows.size(), threads, [&](std::size_t job) {
    const std::size_t p = job / reps;
    const std::size_t h = job % reps;
    Rng rng(derive_seed(config.seed, h, p));
    const ReplayResult replay = replay_evaluate(config.policies[p], data, config.steps, rng);
    OpeRow row;
    row.policy = config.policies[p].label();
    row.repetition = h;
    row.matched_steps = replay.history.size();
    row.rows_scanned = replay.rows_scanned;
    row.cycles = replay.cycles;
    if (replay.history.empty()) {
      row.estimated_value = std::numeric_limits<double>::quiet_NaN();
      row.regret_vs_best_arm = std::numeric_limits<double>::quiet_NaN();
    } else {
      const ReplayScore score = score_replay(replay.history, data.spec, values);
      row.estimated_value = score.estimated_value;
      row.regret_vs_best_arm = score.regret_vs_best_arm;
    }
    rows[job] = std::move(row);
  });
  return rows;
}

void write_ope(const ExperimentConfig& config, const std::vector<OpeRow>& rows,
               const std::filesystem::path& dir) {
  ensure_dir(dir);
  {
    auto out = open_out(dir / "ope.csv");
    out << "policy,repetition,matched_steps,estimated_value,regret_vs_best_arm\n";
    for (const auto& row : rows) {
      out << row.policy << ',' << row.repetition << ',' << row.matched_steps << ','
          << fmt_double(row.estimated_value) << ',' << fmt_double(row.regret_vs_best_arm) << '\n';
    }
  }
  json diagnostics = json::array();
  for (const auto& row : rows) {
    diagnostics.push_back({{"policy", row.policy},
                           {"repetition", row.repetition},
                           {"rows_scanned", row.rows_scanned},
                           {"cycles", row.cycles}});
  }
  json manifest = {
      {"version", version_string()},
      {"config", config_to_json(config)},
      {"replay", diagnostics},
      {"outputs", {"ope.csv"}},
  };
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace tspp
