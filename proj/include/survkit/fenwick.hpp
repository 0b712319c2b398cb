// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#pragma once

#include <cstdint>
#include <vector>

namespace survkit {

/// Fenwick (binary indexed) tree over dense ranks, counting multiplicities.
/// Backs the O(n log n) pair-counting sweep.
class FenwickCounter {
 public:
  explicit FenwickCounter(std::size_t size) : tree_(size + 1, 0) {}

  void add(std::size_t rank) {
    for (std::size_t i = rank + 1; i < tree_.size(); i += i & (~i + 1))
      ++tree_[i];
    ++total_;
  }

  /// Number of inserted values with rank < `rank`.
  std::uint64_t count_below(std::size_t rank) const {
    std::uint64_t s = 0;
    for (std::size_t i = rank; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  /// Number of inserted values with rank == `rank`.
  std::uint64_t count_at(std::size_t rank) const {
    return count_below(rank + 1) - count_below(rank);
  }

  std::uint64_t total() const { return total_; }

 private:
  std::vector<std::uint64_t> tree_;
  std::uint64_t total_ = 0;
};

}  // namespace survkit
