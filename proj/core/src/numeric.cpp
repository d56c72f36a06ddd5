#include "ttk/numeric.hpp"

namespace ttk {

double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kBlock = 8;
  if (xs.size() <= kBlock) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace ttk
