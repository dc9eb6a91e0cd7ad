// SPDX-License-Identifier: Apache-2.0
#pragma once

// Statistical and numerical checks: empirical quantiles, Monte Carlo J,
// the progress bound, KL expansion errors, natural-gradient cross-checks and
// finite-population improvement counts.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "igo/algorithms.hpp"
#include "igo/exp_family.hpp"
#include "igo/oracle_exact.hpp"
#include "igo/rng.hpp"
#include "igo/selection.hpp"

namespace igo {

/// Largest sample value m with #{f <= m}/n >= q and #{f >= m}/n >= 1 - q.
double empirical_quantile(std::span<const double> values, double q);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo J: mean of W over n draws from eta_eval, with W built from
/// the exact quantile structure of eta_base (Bernoulli, d <= 16).
Estimate estimate_J(const ExactProblem& problem, const Vector& eta_eval, const Vector& eta_base,
                    const SelectionScheme& scheme, Rng& rng, int n);

/// Same, for any model: the quantile structure of eta_base is replaced by a
/// holdout sample of `holdout` draws from eta_base. W(x) is then the
/// preference of x among the holdout's empirical distribution.
Estimate estimate_J(const Model& model, const Vector& eta_eval, const Vector& eta_base,
                    const std::function<double(const PointRef&)>& cost,
                    const SelectionScheme& scheme, Rng& rng, int n, int holdout = 1000000);

struct BoundReport {
  double j_value = 0.0;
  double kl_value = 0.0;
  double bound = 1.0;         // exp(((1 - dt) / dt) * kl_value), 1 at dt = 1
  bool satisfied = false;     // j_value > bound
  bool fixed_point = false;   // eta_next == eta_t
};

/// Exact progress bound for one step eta_t -> eta_next taken with step dt.
/// The comparison uses J - 1 and log1p so that tiny steps still resolve.
BoundReport progress_bound(const ExactProblem& problem, const Vector& eta_t,
                           const Vector& eta_next, const SelectionScheme& scheme, double dt);

struct ImprovementStats {
  int steps_total = 0;
  int steps_improved = 0;   // Q strictly decreased
  int steps_equal = 0;
  int steps_worsened = 0;
  double improvement_rate = 0.0;  // (improved + equal) / total
};

/// Runs `n_seeds` copies of `config` (seeds derived from config.seed) for
/// n_steps each and compares Q^q before and after each executed step.
/// Bernoulli runs use the exact quantile; Gaussian runs use a surrogate from
/// `holdout` fresh draws of each distribution.
ImprovementStats finite_population_improvement(const AlgorithmConfig& config, int n_steps,
                                               int n_seeds, int holdout = 100000);

/// err_k = |KL(eta || eta + delta/2^k) - 0.5 (delta/2^k)^T F (delta/2^k)|.
std::vector<double> check_kl_expansion(const Model& model, const Vector& eta,
                                       const Vector& delta, int halvings);

/// Central-difference gradient of ln p_eta(x) with respect to eta.
Vector fd_grad_log_density(const Model& model, const Vector& eta, const PointRef& x,
                           double h = 1e-6);

/// Angle (radians) between the exact IGO displacement at step dt and
/// F^{-1} times the central-difference gradient of J at eta.
double natural_gradient_angle(const ExactProblem& problem, const Vector& eta,
                              const SelectionScheme& scheme, double dt = 1e-4);

}  // namespace igo
