#include "effinfer/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace effinfer {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_non_empty(std::span<const LogP> ws, const char* what) {
  if (ws.empty()) throw std::invalid_argument(std::string(what) + ": empty weight list");
}

// log_sum_exp(ws) split as max + log(sum(exp(w - max))).
std::pair<double, double> shifted_log_sum(std::span<const LogP> ws) {
  const double max_w = *std::max_element(ws.begin(), ws.end());
  if (std::isinf(max_w)) return {max_w, 0.0};
  double total = 0.0;
  for (double w : ws) total += std::exp(w - max_w);
  return {max_w, std::log(total)};
}

}  // namespace

LogP log_sum_exp(std::span<const LogP> ws) {
  require_non_empty(ws, "log_sum_exp");
  const auto [max_w, rest] = shifted_log_sum(ws);
  return max_w + rest;
}

LogP log_mean_exp(std::span<const LogP> ws) {
  require_non_empty(ws, "log_mean_exp");
  return log_sum_exp(ws) - std::log(static_cast<double>(ws.size()));
}

std::vector<LogP> normalise(std::span<const LogP> ws) {
  require_non_empty(ws, "normalise");
  const auto [max_w, rest] = shifted_log_sum(ws);
  if (!std::isfinite(max_w)) {
    throw DegenerateWeights("normalise: no particle has finite log-weight");
  }
  // Subtracting the max first is exact for weights close to it.
  std::vector<LogP> out(ws.size());
  std::transform(ws.begin(), ws.end(), out.begin(),
                 [max_w = max_w, rest = rest](double w) { return (w - max_w) - rest; });
  return out;
}

CategoricalTable::CategoricalTable(std::span<const LogP> log_ws_norm) {
  require_non_empty(log_ws_norm, "categorical");
  cumulative_.resize(log_ws_norm.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_ws_norm.size(); ++i) {
    total += std::exp(log_ws_norm[i]);
    cumulative_[i] = total;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateWeights("categorical: all weights have zero probability");
  }
}

std::size_t CategoricalTable::index(double r) const {
  const double target = r * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it != cumulative_.end()) return static_cast<std::size_t>(it - cumulative_.begin());
  // r * total rounded up to total: take the last index with mass.
  std::size_t i = cumulative_.size() - 1;
  while (i > 0 && cumulative_[i] == cumulative_[i - 1]) --i;
  return i;
}

std::size_t categorical_index(std::span<const LogP> log_ws_norm, double r) {
  return CategoricalTable(log_ws_norm).index(r);
}

std::size_t categorical(std::span<const LogP> log_ws_norm, RandomSource& src) {
  return categorical_index(log_ws_norm, src.next_uniform());
}

std::size_t uniform_index(std::size_t n, double r) {
  if (n == 0) throw std::invalid_argument("random_from: empty list");
  auto i = static_cast<std::size_t>(std::floor(r * static_cast<double>(n)));
  return std::min(i, n - 1);
}

}  // namespace effinfer
