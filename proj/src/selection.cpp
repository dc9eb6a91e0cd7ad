// SPDX-License-Identifier: Apache-2.0
#include "igo/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "igo/error.hpp"

namespace igo {

namespace {

void check_fitness(std::span<const double> fitness) {
  if (fitness.empty()) fail(ErrorCode::invalid_input, "fitness sequence is empty");
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    if (std::isnan(fitness[i])) {
      fail(ErrorCode::invalid_input, "fitness value " + std::to_string(i) + " is NaN");
    }
  }
}

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

SelectionScheme SelectionScheme::truncation(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    fail(ErrorCode::invalid_input, "truncation quantile q must satisfy 0 < q < 1");
  }
  SelectionScheme s;
  s.breaks_ = {q, 1.0};
  s.values_ = {1.0 / q, 0.0};
  s.q_ = q;
  return s;
}

SelectionScheme SelectionScheme::uniform() {
  SelectionScheme s;
  s.breaks_ = {1.0};
  s.values_ = {1.0};
  return s;
}

SelectionScheme SelectionScheme::tabulated(std::span<const double> bar_w) {
  if (bar_w.empty()) fail(ErrorCode::invalid_input, "tabulated weights are empty");
  double total = 0.0;
  for (std::size_t i = 0; i < bar_w.size(); ++i) {
    if (!(bar_w[i] >= 0.0) || !std::isfinite(bar_w[i])) {
      fail(ErrorCode::invalid_input, "tabulated weights must be finite and non-negative");
    }
    if (i > 0 && bar_w[i] > bar_w[i - 1]) {
      fail(ErrorCode::invalid_input, "tabulated weights must be non-increasing");
    }
    total += bar_w[i];
  }
  if (!(total > 0.0)) fail(ErrorCode::invalid_input, "tabulated weights sum to zero");
  SelectionScheme s;
  const auto n = static_cast<double>(bar_w.size());
  for (std::size_t i = 0; i < bar_w.size(); ++i) {
    s.table_.push_back(bar_w[i] / total);
    s.breaks_.push_back(i + 1 == bar_w.size() ? 1.0 : static_cast<double>(i + 1) / n);
    s.values_.push_back(n * bar_w[i] / total);
  }
  return s;
}

double SelectionScheme::value(double u) const {
  const auto it = std::lower_bound(breaks_.begin(), breaks_.end(), u);
  if (it == breaks_.end()) return values_.back();
  return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

double SelectionScheme::integral(double a, double b) const {
  double acc = 0.0;
  double left = 0.0;
  for (std::size_t k = 0; k < breaks_.size(); ++k) {
    const double lo = std::max(a, left);
    const double hi = std::min(b, breaks_[k]);
    if (hi > lo) acc += (hi - lo) * values_[k];
    left = breaks_[k];
    if (left >= b) break;
  }
  return acc;
}

std::vector<double> bar_weights(int lambda, const SelectionScheme& scheme) {
  if (lambda < 1) fail(ErrorCode::invalid_input, "lambda must be >= 1");
  if (!scheme.table_.empty() && scheme.table_.size() == static_cast<std::size_t>(lambda)) {
    return scheme.table_;
  }
  std::vector<double> out(static_cast<std::size_t>(lambda));
  const auto n = static_cast<double>(lambda);
  for (int i = 0; i < lambda; ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = i + 1 == lambda ? 1.0 : static_cast<double>(i + 1) / n;
    out[static_cast<std::size_t>(i)] = scheme.integral(lo, hi);
  }
  return out;
}

RankBounds rank_bounds(std::span<const double> fitness) {
  check_fitness(fitness);
  const LevelSets levels(fitness);
  RankBounds rb;
  rb.minus.resize(fitness.size());
  rb.plus.resize(fitness.size());
  int below = 0;
  for (std::size_t k = 0; k < levels.levels(); ++k) {
    const auto members = levels.members(k);
    const int upto = below + static_cast<int>(members.size());
    for (int idx : members) {
      rb.minus[static_cast<std::size_t>(idx)] = below;
      rb.plus[static_cast<std::size_t>(idx)] = upto;
    }
    below = upto;
  }
  return rb;
}

std::vector<double> sample_weights(std::span<const double> fitness, const SelectionScheme& scheme) {
  check_fitness(fitness);
  const auto lambda = static_cast<int>(fitness.size());
  const std::vector<double> bar = bar_weights(lambda, scheme);
  const LevelSets levels(fitness);
  std::vector<double> w(fitness.size());
  std::size_t rank = 0;
  for (std::size_t k = 0; k < levels.levels(); ++k) {
    const auto members = levels.members(k);
    double acc = 0.0;
    for (std::size_t j = 0; j < members.size(); ++j) acc += bar[rank + j];
    const double shared = acc / static_cast<double>(members.size());
    for (int idx : members) w[static_cast<std::size_t>(idx)] = shared;
    rank += members.size();
  }
  return w;
}

LevelSets::LevelSets(std::span<const double> fitness) {
  check_fitness(fitness);
  order_.resize(fitness.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
    return fitness[static_cast<std::size_t>(a)] < fitness[static_cast<std::size_t>(b)];
  });
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const double v = fitness[static_cast<std::size_t>(order_[i])];
    if (i == 0 || v != values_.back()) {
      starts_.push_back(i);
      values_.push_back(v);
    }
  }
  starts_.push_back(order_.size());
}

std::vector<double> preference_exact(std::span<const double> prob, const LevelSets& levels,
                                     const SelectionScheme& scheme) {
  if (prob.size() != levels.points()) {
    fail(ErrorCode::invalid_input, "probability and fitness sequences differ in length");
  }
  if (prob.empty()) fail(ErrorCode::invalid_input, "distribution has empty support");
  std::vector<double> w(prob.size());
  CompensatedSum below;
  for (std::size_t k = 0; k < levels.levels(); ++k) {
    const auto members = levels.members(k);
    CompensatedSum level_mass;
    for (int idx : members) level_mass.add(prob[static_cast<std::size_t>(idx)]);
    const double q_minus = below.value();
    below.add(level_mass.value());
    const double q_plus = std::min(1.0, below.value());
    double pref;
    if (level_mass.value() <= 0.0 || !(q_plus > q_minus)) {
      pref = scheme.value(q_plus);
    } else {
      pref = scheme.integral(q_minus, q_plus) / (q_plus - q_minus);
    }
    for (int idx : members) w[static_cast<std::size_t>(idx)] = pref;
  }
  return w;
}

std::vector<double> preference_exact(std::span<const double> prob,
                                     std::span<const double> fitness,
                                     const SelectionScheme& scheme) {
  if (prob.empty()) fail(ErrorCode::invalid_input, "distribution has empty support");
  CompensatedSum total;
  for (double p : prob) {
    if (!(p >= 0.0)) fail(ErrorCode::invalid_input, "probabilities must be non-negative");
    total.add(p);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    fail(ErrorCode::invalid_input, "probabilities must sum to 1 within 1e-12");
  }
  return preference_exact(prob, LevelSets(fitness), scheme);
}

}  // namespace igo
