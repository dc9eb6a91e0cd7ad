// SPDX-License-Identifier: Apache-2.0
#pragma once

// Parameter updates. All of them act on expectation parameters; Gaussian
// (m, C) views go through gaussian_params / to_expectation.
//
// Weighted sums over the population are reduced with a fixed pairwise tree,
// so a given (samples, weights) input always produces the same bits.
//
// Updates never clamp. A result outside the open domain raises
// ErrorCode::domain_exit; `safeguarded` is the opt-in retry wrapper.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "igo/exp_family.hpp"

namespace igo {

struct StepConfig {
  double dt = 0.5;
  std::vector<double> dt_per_block;  // blockwise updates only
  bool uncertified = false;          // permits step sizes above 1

  /// All step sizes inside (0, 1], where monotone improvement is guaranteed.
  bool certified() const;
  /// Throws config unless every step size is >= 0 and, without
  /// `uncertified`, <= 1.
  void validate() const;
};

/// Named slices of the expectation layout updated one after another.
class BlockDecomposition {
 public:
  struct Block {
    std::string name;
    std::vector<int> coords;  // expectation-layout indices
  };

  /// Gaussian blocks "C" (second moments, mean held fixed) then "m".
  /// This order recovers the pure rank-mu CMA-ES update.
  static BlockDecomposition gaussian_cov_then_mean(int dim);
  /// Gaussian "m" then "C": the EMNA-like order.
  static BlockDecomposition gaussian_mean_then_cov(int dim);
  /// One block per Bernoulli coordinate, in index order.
  static BlockDecomposition bernoulli_coordinates(int dim);
  /// Arbitrary partition of Bernoulli coordinates; throws unless `groups`
  /// partitions 0..dim-1.
  static BlockDecomposition bernoulli_groups(int dim, std::vector<std::vector<int>> groups);

  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::size_t size() const noexcept { return blocks_.size(); }

 private:
  std::vector<Block> blocks_;
};

/// eta + dt * sum_i w_i (T(x_i) - eta)
Vector igo_step(const Model& model, const Vector& eta, const Samples& samples,
                std::span<const double> weights, double dt);

/// Weighted maximum likelihood blended with the current distribution:
/// (1 - dt) eta + dt * sum_i w_i T(x_i).
Vector igo_ml_step(const Model& model, const Vector& eta, const Samples& samples,
                   std::span<const double> weights, double dt);

/// (1 - dt) eta + dt * argmax_theta sum_i w_i ln p_theta(x_i). The weighted ML
/// estimate itself must be a valid distribution (for dt > 0).
Vector smoothed_ce_step(const Model& model, const Vector& eta, const Samples& samples,
                        std::span<const double> weights, double dt);

/// Sequential partial maximum-likelihood updates, one per block, all on the
/// same sample.
Vector blockwise_igo_ml_step(const Model& model, const Vector& eta, const Samples& samples,
                             std::span<const double> weights,
                             const BlockDecomposition& blocks,
                             std::span<const double> dt_per_block);

/// Fitness-proportional natural-gradient step
///   eta + dt * E[(r(x) / E[r]) (T(x) - eta)].
/// The expectation runs over `points` with probabilities `prob`; an empty
/// `prob` means the uniform Monte Carlo weights 1/lambda.
/// Rewards must be non-negative with at least one positive value.
Vector fitness_proportional_step(const Model& model, const Vector& eta, const Samples& points,
                                 std::span<const double> rewards, double dt,
                                 std::span<const double> prob = {});

enum class MalagoScaling {
  per_sample,  // divide the sum by lambda
  none,        // sum as printed, step grows with lambda
};

/// Stochastic-relaxation descent on E[f] in expectation parameters:
///   eta - dt * (1/lambda) sum_i f(x_i) (T(x_i) - eta).
Vector malago_step(const Model& model, const Vector& eta, const Samples& samples,
                   std::span<const double> fitness, double dt,
                   MalagoScaling scaling = MalagoScaling::per_sample);

struct SafeguardedResult {
  Vector eta;
  double dt_used = 0.0;
  int halvings = 0;
};

/// Calls step(dt), halving dt on domain exit up to `max_halvings` times.
/// Rethrows the last domain exit if no step size succeeds.
SafeguardedResult safeguarded(const std::function<Vector(double)>& step, double dt,
                              int max_halvings = 30);

/// sum_i weights[i] * T(x_i) via the fixed pairwise reduction.
Vector weighted_statistic(const Model& model, const Samples& samples,
                          std::span<const double> weights);

}  // namespace igo
