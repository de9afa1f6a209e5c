#include "tspp/ope.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace tspp {
namespace {

std::string expected_header(std::size_t dims) {
  std::string header;
  for (std::size_t d = 0; d < dims; ++d) header += "dim_" + std::to_string(d + 1) + ",";
  return header + "reward";
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = text.find(sep);
    out.push_back(text.substr(0, pos));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

std::optional<long> parse_long(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

LoggedDataset parse_logged(std::istream& in, const DimensionSpec& spec) {
  LoggedDataset data{spec, {}};
  std::string line;
  if (!std::getline(in, line)) throw DataError("logged data is empty (missing header)");
  strip_cr(line);
  if (line != expected_header(spec.dims())) {
    throw DataError("line 1: bad header '" + line + "', expected '" + expected_header(spec.dims()) + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != spec.dims() + 1) {
      fail_line(line_no, "expected " + std::to_string(spec.dims() + 1) + " fields, got " +
                             std::to_string(fields.size()));
    }
    std::vector<int> choices(spec.dims());
    for (std::size_t d = 0; d < spec.dims(); ++d) {
      const auto value = parse_long(fields[d]);
      if (!value) fail_line(line_no, "dim_" + std::to_string(d + 1) + " is not an integer");
      if (*value < 1 || *value > spec.choices(d)) {
        fail_line(line_no, "dim_" + std::to_string(d + 1) + " choice " + std::to_string(*value) +
                               " outside [1, " + std::to_string(spec.choices(d)) + "]");
      }
      choices[d] = static_cast<int>(*value - 1);
    }
    const auto reward = parse_long(fields.back());
    if (!reward || (*reward != 0 && *reward != 1)) {
      fail_line(line_no, "reward '" + std::string(fields.back()) + "' is not 0 or 1");
    }
    data.rows.push_back({Layout(std::move(choices)), static_cast<Reward>(*reward)});
  }
  return data;
}

LoggedDataset ingest_logged(const std::filesystem::path& path, const DimensionSpec& spec) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open logged data file " + path.string());
  return parse_logged(in, spec);
}

void write_logged(std::ostream& out, const LoggedDataset& data) {
  out << expected_header(data.spec.dims()) << '\n';
  for (const auto& row : data.rows) {
    for (int choice : row.layout) out << choice + 1 << ',';
    out << row.reward << '\n';
  }
}

void write_logged(const std::filesystem::path& path, const LoggedDataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_logged(out, data);
}

std::vector<FeatureRow> read_libsvm(const std::filesystem::path& path, std::size_t feature_count) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<FeatureRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string label_text;
    fields >> label_text;
    FeatureRow row;
    row.features.assign(feature_count, 0.0);
    try {
      row.label = static_cast<int>(std::lround(std::stod(label_text)));
      std::string pair;
      while (fields >> pair) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) fail_line(line_no, "bad feature '" + pair + "'");
        const auto index = std::stoul(pair.substr(0, colon));
        if (index < 1 || index > feature_count) fail_line(line_no, "feature index out of range");
        row.features[index - 1] = std::stod(pair.substr(colon + 1));
      }
    } catch (const std::logic_error&) {
      fail_line(line_no, "unparsable libsvm row");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

LoggedDataset discretize_features(std::span<const FeatureRow> rows, const DimensionSpec& spec) {
  LoggedDataset data{spec, {}};
  if (rows.empty()) return data;
  const std::size_t n = rows.size();
  std::vector<std::vector<int>> bins(n, std::vector<int>(spec.dims()));

  for (std::size_t d = 0; d < spec.dims(); ++d) {
    std::vector<double> sorted;
    sorted.reserve(n);
    for (const auto& row : rows) {
      if (row.features.size() != spec.dims()) {
        throw DataError("feature row has " + std::to_string(row.features.size()) + " features, expected " +
                        std::to_string(spec.dims()));
      }
      sorted.push_back(row.features[d]);
    }
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) {
      throw DataError("feature " + std::to_string(d + 1) + " is constant");
    }
    const auto nbins = static_cast<std::size_t>(spec.choices(d));
    std::vector<double> cuts;
    for (std::size_t k = 1; k < nbins; ++k) cuts.push_back(sorted[k * n / nbins]);

    std::vector<std::size_t> population(nbins, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = rows[i].features[d];
      const auto bin = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
      bins[i][d] = static_cast<int>(bin);
      ++population[bin];
    }
    if (std::find(population.begin(), population.end(), 0) != population.end()) {
      throw DataError("feature " + std::to_string(d + 1) + " has degenerate quantiles (empty bin)");
    }
  }

  data.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Reward reward = 0;
    switch (rows[i].label) {
      case -1:
      case 0:
        reward = 0;
        break;
      case 1:
        reward = 1;
        break;
      default:
        throw DataError("row " + std::to_string(i + 1) + ": label " + std::to_string(rows[i].label) +
                        " is not binary");
    }
    data.rows.push_back({Layout(std::move(bins[i])), reward});
  }
  return data;
}

std::vector<ArmStats> arm_stats(const LoggedDataset& data) {
  std::vector<ArmStats> stats(data.spec.arm_count());
  for (const auto& row : data.rows) {
    auto& arm = stats[data.spec.arm_index(row.layout)];
    ++arm.plays;
    arm.successes += static_cast<std::uint64_t>(row.reward);
  }
  return stats;
}

ShrinkageResult james_stein(std::span<const ArmStats> arms) {
  ShrinkageResult result;
  result.estimates.resize(arms.size());
  std::vector<std::size_t> included;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (arms[i].plays == 0) {
      result.warnings.push_back("arm " + std::to_string(i) + " has no plays; excluded");
    } else {
      included.push_back(i);
    }
  }
  if (included.empty()) return result;

  const auto k = static_cast<double>(included.size());
  double grand = 0.0;
  for (std::size_t i : included) grand += arms[i].mean();
  grand /= k;
  result.grand_mean = grand;

  double spread = 0.0;
  double variance = 0.0;
  for (std::size_t i : included) {
    const double x = arms[i].mean();
    spread += (x - grand) * (x - grand);
    variance += x * (1.0 - x) / static_cast<double>(arms[i].plays);
  }
  variance /= k;

  const bool shrink = included.size() >= 4 && spread > 0.0;
  if (shrink) result.factor = std::max(0.0, 1.0 - (k - 3.0) * variance / spread);
  for (std::size_t i : included) {
    const double x = arms[i].mean();
    result.estimates[i] = shrink ? std::clamp(grand + result.factor * (x - grand), 0.0, 1.0) : x;
  }
  return result;
}

ReplayResult replay_evaluate(const ArmSelector& select, StateStore& store,
                             const LoggedDataset& data, std::size_t steps, Rng& rng,
                             std::size_t max_cycles) {
  if (data.rows.empty()) throw ConfigError("replay needs a non-empty dataset");
  ReplayResult result;
  result.history.reserve(steps);
  std::size_t row = 0;
  while (result.history.size() < steps) {
    if (row == data.rows.size()) {
      row = 0;
      ++result.cycles;
      if (result.cycles >= max_cycles) {
        result.exhausted = true;
        break;
      }
    }
    const LoggedRow& logged = data.rows[row++];
    ++result.rows_scanned;
    Layout proposal = select(store, rng);
    if (proposal == logged.layout) {
      store.backpropagate(logged.layout, logged.reward);
      result.history.append(std::move(proposal), logged.reward);
    }
  }
  return result;
}

ReplayResult replay_evaluate(const PolicyConfig& policy, const LoggedDataset& data,
                             std::size_t steps, Rng& rng, std::size_t max_cycles) {
  StateStore store = make_store(policy, data.spec);
  ArmSelector select = [&policy](const StateStore& s, Rng& r) { return select_arm(policy, s, r); };
  return replay_evaluate(select, store, data, steps, rng, max_cycles);
}

ReplayScore score_replay(const RunHistory& history, const DimensionSpec& spec,
                         const ShrinkageResult& values) {
  if (history.empty()) throw ConfigError("cannot score an empty replay history");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : values.estimates) {
    if (v) best = std::max(best, *v);
  }
  double sum = 0.0;
  for (const auto& record : history.records()) {
    const auto& v = values.estimates.at(spec.arm_index(record.layout));
    if (!v) throw ConfigError("matched arm " + record.layout.to_string() + " has no value estimate");
    sum += *v;
  }
  ReplayScore score;
  score.estimated_value = sum / static_cast<double>(history.size());
  score.regret_vs_best_arm = best - score.estimated_value;
  return score;
}

}  // namespace tspp
