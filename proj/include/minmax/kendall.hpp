#pragma once

#include <span>

namespace minmax {

/// Kendall tau-b between two equally long samples, computed in O(n log n)
/// (Knight's merge-sort algorithm). Returns 0 when either side is entirely
/// tied. NaN compares equal to NaN and above every number.
double kendall_tau(std::span<const double> a, std::span<const double> b);

} // namespace minmax
