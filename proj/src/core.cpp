#include "tspp/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tspp {

DimensionSpec::DimensionSpec(std::vector<int> choices) : choices_(std::move(choices)) {
  if (choices_.empty()) throw ConfigError("dimension spec needs at least one dimension");
  if (choices_.size() > kMaxDims) {
    throw ConfigError("dimension spec supports at most " + std::to_string(kMaxDims) +
                      " dimensions");
  }
  strides_.reserve(choices_.size());
  KeyCode stride = 1;
  for (std::size_t d = 0; d < choices_.size(); ++d) {
    const int n = choices_[d];
    if (n < 1 || n > kMaxChoices) {
      throw ConfigError("dimension " + std::to_string(d + 1) + " has invalid choice count " +
                        std::to_string(n));
    }
    strides_.push_back(stride);
    const auto base = static_cast<KeyCode>(n) + 1;
    if (stride > std::numeric_limits<KeyCode>::max() / base) {
      throw ConfigError("dimension spec too large for 64-bit key encoding");
    }
    stride *= base;
  }
}

DimensionSpec DimensionSpec::uniform(std::size_t dims, int choices) {
  return DimensionSpec(std::vector<int>(dims, choices));
}

std::uint64_t DimensionSpec::arm_count(std::uint64_t cap) const {
  std::uint64_t count = 1;
  for (int n : choices_) {
    count *= static_cast<std::uint64_t>(n);
    if (count > cap) {
      throw ConfigError("arm count exceeds cap of " + std::to_string(cap));
    }
  }
  return count;
}

std::uint64_t DimensionSpec::arm_index(const Layout& layout) const {
  std::uint64_t index = 0;
  for (std::size_t d = 0; d < choices_.size(); ++d) {
    index = index * static_cast<std::uint64_t>(choices_[d]) + static_cast<std::uint64_t>(layout[d]);
  }
  return index;
}

Layout DimensionSpec::layout_at(std::uint64_t index) const {
  std::vector<int> choices(choices_.size());
  for (std::size_t d = choices_.size(); d-- > 0;) {
    const auto n = static_cast<std::uint64_t>(choices_[d]);
    choices[d] = static_cast<int>(index % n);
    index /= n;
  }
  return Layout(std::move(choices));
}

void DimensionSpec::validate(const Layout& layout) const {
  if (layout.size() != choices_.size()) {
    throw SpecViolation("layout " + layout.to_string() + " has " +
                        std::to_string(layout.size()) + " entries, expected " +
                        std::to_string(choices_.size()));
  }
  for (std::size_t d = 0; d < choices_.size(); ++d) {
    if (layout[d] < 0 || layout[d] >= choices_[d]) {
      throw SpecViolation("layout " + layout.to_string() + " out of range at dimension " +
                          std::to_string(d + 1));
    }
  }
}

std::string Layout::to_string() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t d = 0; d < choices_.size(); ++d) {
    if (d) out << ',';
    out << choices_[d] + 1;
  }
  out << ']';
  return out.str();
}

PartialAssignment::PartialAssignment(std::initializer_list<std::pair<std::size_t, int>> pairs) {
  for (const auto& [dim, choice] : pairs) assign(dim, choice);
}

PartialAssignment PartialAssignment::from_layout(const Layout& layout) {
  PartialAssignment key;
  for (std::size_t d = 0; d < layout.size(); ++d) key.assign(d, layout[d]);
  return key;
}

std::size_t PartialAssignment::size() const {
  std::size_t n = 0;
  for (auto slot : slots_) n += slot != 0;
  return n;
}

void PartialAssignment::assign(std::size_t dim, int choice) {
  if (dim >= kMaxDims) throw SpecViolation("dimension index " + std::to_string(dim) + " too large");
  if (choice < 0 || choice >= kMaxChoices) {
    throw SpecViolation("choice " + std::to_string(choice) + " out of range");
  }
  if (slots_[dim] != 0) {
    throw SpecViolation("dimension " + std::to_string(dim + 1) + " assigned twice");
  }
  slots_[dim] = static_cast<std::uint8_t>(choice + 1);
}

void PartialAssignment::erase(std::size_t dim) {
  if (dim < kMaxDims) slots_[dim] = 0;
}

PartialAssignment PartialAssignment::with(std::size_t dim, int choice) const {
  PartialAssignment out = *this;
  out.assign(dim, choice);
  return out;
}

PartialAssignment PartialAssignment::without(std::size_t dim) const {
  PartialAssignment out = *this;
  out.erase(dim);
  return out;
}

std::vector<std::pair<std::size_t, int>> PartialAssignment::entries() const {
  std::vector<std::pair<std::size_t, int>> out;
  for (std::size_t d = 0; d < kMaxDims; ++d) {
    if (slots_[d] != 0) out.emplace_back(d, slots_[d] - 1);
  }
  return out;
}

std::string PartialAssignment::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [dim, choice] : entries()) {
    if (!first) out << ',';
    first = false;
    out << dim + 1 << ':' << choice + 1;
  }
  return out.str();
}

void Prior::validate() const {
  if (!(alpha0 > 0.0) || !(beta0 > 0.0) || !std::isfinite(alpha0) || !std::isfinite(beta0)) {
    throw ConfigError("prior parameters must be positive and finite");
  }
}

}  // namespace tspp
