// SPDX-License-Identifier: Apache-2.0
#pragma once

// Quantile-based selection. Fitness is always minimized; ties are exact
// floating-point equality (near-ties are distinct values).

#include <optional>
#include <span>
#include <vector>

namespace igo {

/// A non-increasing, non-negative selection scheme w on [0, 1] with unit
/// integral, stored as a step function over pieces (b[k-1], b[k]].
class SelectionScheme {
 public:
  /// w(u) = 1[u <= q] / q with 0 < q < 1.
  static SelectionScheme truncation(double q);
  /// w = 1 everywhere; every point gets the same preference.
  static SelectionScheme uniform();
  /// Step function reproducing the given per-rank weights for a population of
  /// weights.size(): w(u) = n * bar_w[i] on ((i-1)/n, i/n]. Weights must be
  /// non-negative and non-increasing; they are normalized to sum to 1.
  static SelectionScheme tabulated(std::span<const double> bar_w);

  double value(double u) const;
  /// Integral of w over [a, b], 0 <= a <= b <= 1, by exact piece overlap.
  double integral(double a, double b) const;
  /// q for truncation schemes; improvement guarantees only apply to these.
  std::optional<double> truncation_q() const { return q_; }

 private:
  friend std::vector<double> bar_weights(int lambda, const SelectionScheme& scheme);

  SelectionScheme() = default;
  std::vector<double> breaks_;  // right endpoints, ascending, last == 1
  std::vector<double> values_;
  std::optional<double> q_;
  std::vector<double> table_;   // original per-rank weights when tabulated
};

struct RankBounds {
  std::vector<int> minus;  // # samples strictly better
  std::vector<int> plus;   // # samples better or equal, self included
};

/// bar_w[i] = integral of w over ((i-1)/lambda, i/lambda], i = 1..lambda.
std::vector<double> bar_weights(int lambda, const SelectionScheme& scheme);

RankBounds rank_bounds(std::span<const double> fitness);

/// Tie-averaged rank weights: the mean of bar_w over each sample's rank range.
std::vector<double> sample_weights(std::span<const double> fitness, const SelectionScheme& scheme);

/// Support points grouped into level sets of equal fitness, ascending.
class LevelSets {
 public:
  explicit LevelSets(std::span<const double> fitness);

  std::size_t levels() const noexcept { return starts_.size() - 1; }
  std::size_t points() const noexcept { return order_.size(); }
  double value(std::size_t level) const { return values_[level]; }
  std::span<const int> members(std::size_t level) const {
    return {order_.data() + starts_[level], order_.data() + starts_[level + 1]};
  }

 private:
  std::vector<int> order_;
  std::vector<std::size_t> starts_;
  std::vector<double> values_;
};

/// Exact weighted preference W(x) for every support point of a finite
/// distribution with probabilities `prob`.
std::vector<double> preference_exact(std::span<const double> prob,
                                     std::span<const double> fitness,
                                     const SelectionScheme& scheme);
std::vector<double> preference_exact(std::span<const double> prob, const LevelSets& levels,
                                     const SelectionScheme& scheme);

}  // namespace igo
