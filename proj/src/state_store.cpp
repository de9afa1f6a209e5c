#include "tspp/state_store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace tspp {
namespace {

// Dense storage is used when the whole key space fits in this many slots.
constexpr KeyCode kDenseKeyLimit = 1u << 16;

KeyCode key_space(const DimensionSpec& spec) {
  const std::size_t last = spec.dims() - 1;
  return spec.key_stride(last) * (static_cast<KeyCode>(spec.choices(last)) + 1);
}

std::uint64_t parse_u64(std::string_view text, std::size_t line_no) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw DataError("snapshot line " + std::to_string(line_no) + ": bad number '" +
                    std::string(text) + "'");
  }
  return value;
}

}  // namespace

StateStore::StateStore(DimensionSpec spec, std::size_t max_order, bool track_full)
    : spec_(std::move(spec)), max_order_(max_order), track_full_(track_full) {
  const std::size_t dims = spec_.dims();
  if (dims == 0) throw ConfigError("state store needs a non-empty dimension spec");
  if (max_order_ > dims) {
    throw ConfigError("store max_order " + std::to_string(max_order_) + " exceeds " +
                      std::to_string(dims) + " dimensions");
  }
  const std::uint32_t full = (1u << dims) - 1u;
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    if (maintains(static_cast<std::size_t>(std::popcount(mask)))) masks_.push_back(mask);
  }
  std::stable_sort(masks_.begin(), masks_.end(), [](std::uint32_t a, std::uint32_t b) {
    return std::popcount(a) < std::popcount(b);
  });
  if (key_space(spec_) <= kDenseKeyLimit) dense_.resize(key_space(spec_));
}

KeyCode StateStore::encode(const PartialAssignment& key) const {
  KeyCode code = 0;
  for (std::size_t dim = 0; dim < kMaxDims; ++dim) {
    if (!key.contains(dim)) continue;
    if (dim >= spec_.dims()) {
      throw SpecViolation("key dimension " + std::to_string(dim + 1) + " outside spec of " +
                          std::to_string(spec_.dims()) + " dimensions");
    }
    const int choice = key.choice(dim);
    if (choice >= spec_.choices(dim)) {
      throw SpecViolation("key choice " + std::to_string(choice + 1) + " out of range for dimension " +
                          std::to_string(dim + 1));
    }
    code += static_cast<KeyCode>(choice + 1) * spec_.key_stride(dim);
  }
  return code;
}

PartialAssignment StateStore::decode(KeyCode code) const {
  PartialAssignment key;
  for (std::size_t d = 0; d < spec_.dims(); ++d) {
    const auto base = static_cast<KeyCode>(spec_.choices(d)) + 1;
    const auto digit = (code / spec_.key_stride(d)) % base;
    if (digit != 0) key.assign(d, static_cast<int>(digit) - 1);
  }
  return key;
}

BetaCounts& StateStore::slot(KeyCode code) {
  BetaCounts& counts = dense_.empty() ? sparse_[code] : dense_[code];
  if (counts.total() == 0) ++key_count_;
  return counts;
}

void StateStore::backpropagate(const Layout& layout, Reward reward) {
  spec_.validate(layout);
  if (reward != 0 && reward != 1) throw SpecViolation("reward must be 0 or 1");
  std::array<KeyCode, kMaxDims> digit{};
  for (std::size_t d = 0; d < spec_.dims(); ++d) {
    digit[d] = static_cast<KeyCode>(layout[d] + 1) * spec_.key_stride(d);
  }
  for (std::uint32_t mask : masks_) {
    KeyCode code = 0;
    for (std::uint32_t bits = mask; bits != 0; bits &= bits - 1) {
      code += digit[static_cast<std::size_t>(std::countr_zero(bits))];
    }
    BetaCounts& counts = slot(code);
    if (reward == 1) {
      ++counts.alpha;
    } else {
      ++counts.beta;
    }
  }
}

void StateStore::add_counts(const PartialAssignment& key, BetaCounts counts) {
  const KeyCode code = encode(key);
  if (counts.total() == 0) return;
  BetaCounts& stored = slot(code);
  stored.alpha += counts.alpha;
  stored.beta += counts.beta;
}

std::vector<std::pair<PartialAssignment, BetaCounts>> StateStore::entries() const {
  std::vector<std::pair<std::vector<std::pair<std::size_t, int>>, std::pair<PartialAssignment, BetaCounts>>>
      sortable;
  auto add = [&](KeyCode code, const BetaCounts& counts) {
    if (counts.total() == 0) return;
    PartialAssignment key = decode(code);
    sortable.push_back({key.entries(), {key, counts}});
  };
  if (!dense_.empty()) {
    for (KeyCode code = 0; code < dense_.size(); ++code) add(code, dense_[code]);
  } else {
    for (const auto& [code, counts] : sparse_) add(code, counts);
  }
  std::sort(sortable.begin(), sortable.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a.first < b.first;
  });
  std::vector<std::pair<PartialAssignment, BetaCounts>> out;
  out.reserve(sortable.size());
  for (auto& item : sortable) out.push_back(std::move(item.second));
  return out;
}

void StateStore::write_snapshot(std::ostream& out) const {
  for (const auto& [key, counts] : entries()) {
    out << key.to_string() << '\t' << counts.alpha << ' ' << counts.beta << '\n';
  }
}

void StateStore::read_snapshot(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const auto space = line.find(' ', tab == std::string::npos ? 0 : tab);
    if (tab == std::string::npos || space == std::string::npos) {
      throw DataError("snapshot line " + std::to_string(line_no) + ": expected 'key<TAB>alpha beta'");
    }
    std::string_view view(line);
    std::string_view key_text = view.substr(0, tab);
    PartialAssignment key;
    while (!key_text.empty()) {
      const auto comma = key_text.find(',');
      std::string_view pair = key_text.substr(0, comma);
      const auto colon = pair.find(':');
      if (colon == std::string_view::npos) {
        throw DataError("snapshot line " + std::to_string(line_no) + ": bad pair '" +
                        std::string(pair) + "'");
      }
      const auto dim = parse_u64(pair.substr(0, colon), line_no);
      const auto choice = parse_u64(pair.substr(colon + 1), line_no);
      if (dim == 0 || choice == 0 || dim > kMaxDims || choice > static_cast<std::uint64_t>(kMaxChoices)) {
        throw SpecViolation("snapshot line " + std::to_string(line_no) + ": pair out of range");
      }
      key.assign(static_cast<std::size_t>(dim - 1), static_cast<int>(choice - 1));
      key_text = comma == std::string_view::npos ? std::string_view{} : key_text.substr(comma + 1);
    }
    const BetaCounts loaded{parse_u64(view.substr(tab + 1, space - tab - 1), line_no),
                            parse_u64(view.substr(space + 1), line_no)};
    add_counts(key, loaded);
  }
}

}  // namespace tspp
