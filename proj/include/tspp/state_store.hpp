#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tspp/core.hpp"

namespace tspp {

/// Sparse joint-posterior store: success/failure tallies keyed by partial
/// assignments of the layout.
///
/// Every observed layout is back-propagated eagerly to each of its subsets of
/// size 1..max_order, to the root (empty) key, and to the full layout key when
/// track_full is set. Keys that were never touched read as (0, 0).
///
/// Single writer; concurrent const access is safe between writes.
class StateStore {
 public:
  StateStore(DimensionSpec spec, std::size_t max_order, bool track_full = true);

  const DimensionSpec& spec() const { return spec_; }
  std::size_t max_order() const { return max_order_; }
  bool track_full() const { return track_full_; }

  // True when keys with `key_size` pairs are kept up to date by backpropagate.
  bool maintains(std::size_t key_size) const {
    return key_size <= max_order_ || (track_full_ && key_size == spec_.dims());
  }

  // Throws SpecViolation when the key does not fit the dimension spec.
  KeyCode encode(const PartialAssignment& key) const;
  PartialAssignment decode(KeyCode code) const;

  BetaCounts counts(const PartialAssignment& key) const { return counts(encode(key)); }
  BetaCounts counts(KeyCode code) const {
    if (!dense_.empty()) return dense_[code];
    auto it = sparse_.find(code);
    return it == sparse_.end() ? BetaCounts{} : it->second;
  }

  // One observation: increments alpha (reward 1) or beta (reward 0) of every
  // maintained key consistent with `layout`.
  void backpropagate(const Layout& layout, Reward reward);

  // Adds counts to a single key without touching any other key. Used to seed
  // a store from earlier evidence; marginal consistency is the caller's job.
  void add_counts(const PartialAssignment& key, BetaCounts counts);

  // Number of keys with at least one observation.
  std::size_t key_count() const { return key_count_; }
  // Number of keys touched by a single backpropagate call.
  std::size_t keys_per_update() const { return masks_.size(); }

  // Stored keys with their counts, sorted by key size and then by pairs.
  std::vector<std::pair<PartialAssignment, BetaCounts>> entries() const;

  // Text snapshot: one key per line, "dim:choice" pairs (1-based, sorted by
  // dimension, comma-separated), a tab, then "alpha beta".
  void write_snapshot(std::ostream& out) const;
  // Adds the snapshot's counts into this store. Throws DataError on malformed
  // lines and SpecViolation on keys outside the dimension spec.
  void read_snapshot(std::istream& in);

 private:
  BetaCounts& slot(KeyCode code);

  DimensionSpec spec_;
  std::size_t max_order_;
  bool track_full_;
  std::vector<std::uint32_t> masks_;  // dimension subsets updated per observation
  std::vector<BetaCounts> dense_;     // used when the key space is small
  std::unordered_map<KeyCode, BetaCounts> sparse_;
  std::size_t key_count_ = 0;
};

}  // namespace tspp
