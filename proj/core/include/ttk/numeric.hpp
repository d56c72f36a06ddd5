#pragma once

#include <cstddef>
#include <span>

namespace ttk {

/// Pairwise (cascade) summation: blocks of 8 summed naively, then combined
/// in a balanced tree. Error grows as O(log n) instead of O(n), and the
/// association order depends only on n, so results are platform-stable.
double pairwise_sum(std::span<const double> xs);

inline double mean(std::span<const double> xs) {
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

}  // namespace ttk
