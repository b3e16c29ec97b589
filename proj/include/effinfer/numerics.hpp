#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "effinfer/distributions.hpp"
#include "effinfer/random.hpp"

namespace effinfer {

/// Every weight is zero probability, so nothing can be resampled.
class DegenerateWeights : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// log(sum(exp(ws))) with max subtraction. -inf for all -inf input.
/// Throws std::invalid_argument on empty input.
LogP log_sum_exp(std::span<const LogP> ws);

/// log(mean(exp(ws))). Throws std::invalid_argument on empty input.
LogP log_mean_exp(std::span<const LogP> ws);

/// ws - log_sum_exp(ws). Throws DegenerateWeights unless some entry is
/// finite and std::invalid_argument on empty input.
std::vector<LogP> normalise(std::span<const LogP> ws);

/// Inverse-CDF walk over exp(log_ws_norm) at the uniform r. The walk is
/// scaled by the actual total so rounding in the normalisation cannot run
/// off the end.
std::size_t categorical_index(std::span<const LogP> log_ws_norm, double r);

/// Cumulative weights built once for repeated draws; index(r) agrees with
/// categorical_index(log_ws_norm, r) in O(log n).
class CategoricalTable {
 public:
  explicit CategoricalTable(std::span<const LogP> log_ws_norm);
  std::size_t index(double r) const;

 private:
  std::vector<double> cumulative_;
};

/// One categorical draw consuming exactly one uniform from src.
std::size_t categorical(std::span<const LogP> log_ws_norm, RandomSource& src);

/// floor(r * n), clamped to n - 1. Throws std::invalid_argument if n == 0.
std::size_t uniform_index(std::size_t n, double r);

/// Uniform choice of one element using one uniform.
template <class T>
const T& random_from(std::span<const T> xs, RandomSource& src) {
  if (xs.empty()) throw std::invalid_argument("random_from: empty list");
  return xs[uniform_index(xs.size(), src.next_uniform())];
}

}  // namespace effinfer
