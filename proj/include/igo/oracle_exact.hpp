// SPDX-License-Identifier: Apache-2.0
#pragma once

// Exact infinite-population quantities on {0,1}^d, d <= 16, by enumerating
// the support. Support order is lexicographic with x_0 as the most
// significant bit, so every exact sum is reproducible bit for bit.

#include <span>
#include <vector>

#include "igo/exp_family.hpp"
#include "igo/selection.hpp"
#include "igo/updates.hpp"

namespace igo {

inline constexpr int kMaxEnumerationDim = 16;

struct FiniteDist {
  Samples support;          // 2^d rows
  std::vector<double> prob;
};

FiniteDist enumerate(const BernoulliParams& params);

/// Largest m with P[f <= m] >= q and P[f >= m] >= 1 - q.
struct QuantileReport {
  double value = 0.0;
  double lower_mass = 0.0;  // P[f <= value]
  double upper_mass = 0.0;  // P[f >= value]
};

QuantileReport exact_quantile(std::span<const double> prob, const LevelSets& levels, double q);
QuantileReport exact_quantile(const FiniteDist& dist, std::span<const double> fitness, double q);

/// A fitness (or reward) table over the enumerated support of {0,1}^d, with
/// the support and its level sets cached for repeated exact evaluation.
class ExactProblem {
 public:
  ExactProblem(int dim, std::vector<double> table);

  int dim() const noexcept { return dim_; }
  const Model& model() const noexcept { return model_; }
  const Samples& support() const noexcept { return support_; }
  std::span<const double> table() const noexcept { return table_; }
  const LevelSets& levels() const noexcept { return levels_; }

  /// Product probabilities of every support point; eta must be interior.
  std::vector<double> probabilities(const Vector& eta) const;
  /// ln p_eta(x) of every support point, summed per coordinate.
  std::vector<double> log_probabilities(const Vector& eta) const;
  /// p_next(x) - p_base(x) of every support point, telescoped so that small
  /// parameter changes keep their relative accuracy.
  std::vector<double> probability_differences(const Vector& next, const Vector& base) const;

 private:
  int dim_;
  Model model_;
  Samples support_;
  std::vector<double> table_;
  LevelSets levels_;
};

/// Support points of {0,1}^d in lexicographic order.
Samples binary_support(int dim);

QuantileReport exact_quantile(const ExactProblem& problem, const Vector& eta, double q);

/// W under eta for every support point.
std::vector<double> exact_preference(const ExactProblem& problem, const Vector& eta,
                                     const SelectionScheme& scheme);

/// eta + dt * E[W(x) (x - eta)], the infinite-population IGO / IGO-ML step.
Vector exact_infinite_population_step(const ExactProblem& problem, const Vector& eta,
                                      const SelectionScheme& scheme, double dt);

/// Infinite-population blockwise IGO-ML step over coordinate blocks.
Vector exact_blockwise_step(const ExactProblem& problem, const Vector& eta,
                            const SelectionScheme& scheme, const BlockDecomposition& blocks,
                            std::span<const double> dt_per_block);

/// Exact fitness-proportional step; the problem table holds the rewards.
Vector exact_fitness_proportional_step(const ExactProblem& problem, const Vector& eta, double dt);

/// J = E_{eval}[W_base(x)].
double exact_J(const ExactProblem& problem, const Vector& eta_eval, const Vector& eta_base,
               const SelectionScheme& scheme);
/// J - 1 computed from probability differences; keeps relative accuracy when
/// eval is close to base.
double exact_J_minus_one(const ExactProblem& problem, const Vector& eta_eval,
                         const Vector& eta_base, const SelectionScheme& scheme);

/// H = E_{base}[W_base(x) ln p_eval(x)].
double exact_H(const ExactProblem& problem, const Vector& eta_eval, const Vector& eta_base,
               const SelectionScheme& scheme);
/// H(eval) - H(base) with per-coordinate log ratios.
double exact_H_gain(const ExactProblem& problem, const Vector& eta_eval, const Vector& eta_base,
                    const SelectionScheme& scheme);

/// E_eta[table(x)].
double exact_expected_fitness(const ExactProblem& problem, const Vector& eta);

/// P_eta[table(x) == value].
double exact_level_mass(const ExactProblem& problem, const Vector& eta, double value);

}  // namespace igo
