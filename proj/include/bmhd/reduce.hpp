#pragma once

#include <span>

namespace bmhd {

/// Fixed-order pairwise (tree) summation. The split points depend only on
/// the length of the input, so the result is reproducible bit for bit.
double pairwise_sum(std::span<const double> values);

}  // namespace bmhd
