#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace surpdec {

/// ln(sum(exp(xs))) with max-shift. Returns -inf for an empty or all -inf input.
inline double logsumexp(std::span<const double> xs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

}  // namespace surpdec
