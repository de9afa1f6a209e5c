#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tspp {

// Bad configuration or arguments the caller controls (exit code 1 in the CLI).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A key, layout or choice that does not fit the dimension spec.
class SpecViolation : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Malformed input data (logged datasets, snapshots, model dumps).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxDims = 16;
inline constexpr int kMaxChoices = 255;
inline constexpr std::uint64_t kDefaultArmCap = 1'000'000;

using KeyCode = std::uint64_t;

class Layout;

/// The arm space: D dimensions, each with its own number of choices.
///
/// Dimensions and choices are 0-based in the library API. Text formats
/// (CSV files, snapshots, model dumps) use 1-based values.
class DimensionSpec {
 public:
  DimensionSpec() = default;
  explicit DimensionSpec(std::vector<int> choices);
  static DimensionSpec uniform(std::size_t dims, int choices);

  std::size_t dims() const { return choices_.size(); }
  int choices(std::size_t dim) const { return choices_.at(dim); }
  const std::vector<int>& all_choices() const { return choices_; }

  // Product of choice counts; throws ConfigError when it exceeds `cap`.
  std::uint64_t arm_count(std::uint64_t cap = kDefaultArmCap) const;

  // Mixed-radix stride of `dim` inside a KeyCode (base N_d + 1 per dimension,
  // digit 0 meaning "unassigned").
  KeyCode key_stride(std::size_t dim) const { return strides_[dim]; }

  // Lexicographic arm enumeration, first dimension most significant.
  std::uint64_t arm_index(const Layout& layout) const;
  Layout layout_at(std::uint64_t index) const;

  // Throws SpecViolation when the layout is not fully specified and in range.
  void validate(const Layout& layout) const;

  friend bool operator==(const DimensionSpec& a, const DimensionSpec& b) {
    return a.choices_ == b.choices_;
  }

 private:
  std::vector<int> choices_;
  std::vector<KeyCode> strides_;
};

/// One full assignment of a choice to every dimension.
class Layout {
 public:
  Layout() = default;
  explicit Layout(std::vector<int> choices) : choices_(std::move(choices)) {}
  Layout(std::initializer_list<int> choices) : choices_(choices) {}

  std::size_t size() const { return choices_.size(); }
  int operator[](std::size_t dim) const { return choices_[dim]; }
  int& operator[](std::size_t dim) { return choices_[dim]; }
  const std::vector<int>& choices() const { return choices_; }
  auto begin() const { return choices_.begin(); }
  auto end() const { return choices_.end(); }

  std::string to_string() const;  // 1-based, e.g. "[1,2,3]"

  friend auto operator<=>(const Layout&, const Layout&) = default;
  friend bool operator==(const Layout&, const Layout&) = default;

 private:
  std::vector<int> choices_;
};

/// An unordered set of (dimension, choice) pairs with at most one pair per
/// dimension. Two assignments holding the same pairs are equal no matter the
/// order in which the pairs were added.
class PartialAssignment {
 public:
  PartialAssignment() = default;
  PartialAssignment(std::initializer_list<std::pair<std::size_t, int>> pairs);

  static PartialAssignment from_layout(const Layout& layout);

  bool contains(std::size_t dim) const { return dim < kMaxDims && slots_[dim] != 0; }
  // Choice at `dim`, or -1 when the dimension is unassigned.
  int choice(std::size_t dim) const { return contains(dim) ? slots_[dim] - 1 : -1; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  // Throws SpecViolation if `dim` is already assigned.
  void assign(std::size_t dim, int choice);
  void erase(std::size_t dim);
  PartialAssignment with(std::size_t dim, int choice) const;
  PartialAssignment without(std::size_t dim) const;

  // Pairs sorted by dimension.
  std::vector<std::pair<std::size_t, int>> entries() const;
  std::string to_string() const;  // 1-based "dim:choice" list

  friend bool operator==(const PartialAssignment&, const PartialAssignment&) = default;

 private:
  std::array<std::uint8_t, kMaxDims> slots_{};
};

struct BetaCounts {
  std::uint64_t alpha = 0;  // successes
  std::uint64_t beta = 0;   // failures

  std::uint64_t total() const { return alpha + beta; }
  friend bool operator==(const BetaCounts&, const BetaCounts&) = default;
};

struct Prior {
  double alpha0 = 1.0;
  double beta0 = 1.0;

  void validate() const;
};

using Reward = int;

}  // namespace tspp
