// SPDX-License-Identifier: Apache-2.0
#pragma once

// Iteration loops for the algorithms recovered by the IGO family: PBIL,
// pure rank-mu CMA-ES (no evolution paths, no step-size control), smoothed
// CE/ML, the relative payoff procedure and generic IGO. Each front-end only
// draws the population and delegates the parameter change to updates.hpp.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "igo/exp_family.hpp"
#include "igo/objectives.hpp"
#include "igo/rng.hpp"
#include "igo/selection.hpp"

namespace igo {

enum class AlgorithmId { pbil, cma_rank_mu, ce_ml, rpp, igo_generic };
enum class DomainExitPolicy { halt, safeguard };
enum class RppMode { sample, exact };

const char* to_string(AlgorithmId id) noexcept;
std::optional<AlgorithmId> parse_algorithm(const std::string& name);

struct AlgorithmConfig {
  AlgorithmId algorithm = AlgorithmId::pbil;
  std::string objective = "onemax";
  int dim = 10;
  int lambda = 100;
  double q = 0.25;
  std::vector<double> weights;  // tabulated bar weights; overrides q when set
  double dt = 0.5;
  double dt_m = 1.0;            // cma_rank_mu mean rate
  double dt_c = 0.5;            // cma_rank_mu covariance rate
  int max_steps = 100;
  std::uint64_t seed = 1;
  std::uint64_t table_seed = 0;
  std::optional<double> target;
  DomainExitPolicy domain_exit = DomainExitPolicy::halt;
  bool uncertified = false;
  double init_prob = 0.5;       // Bernoulli start
  double init_mean = 1.0;       // Gaussian start: mean = init_mean * 1
  double init_var = 1.0;        // Gaussian start: cov = init_var * I
  RppMode rpp_mode = RppMode::sample;
  bool record_timing = false;   // elapsed_ns stays 0 otherwise
  bool exact_j = false;         // fill j_estimate from the exact oracle

  /// Throws ErrorCode::config naming the offending field.
  void validate() const;
  SelectionScheme scheme() const;
  Model model() const;
  Vector initial_eta() const;
};

/// A sampled, evaluated and weighted population.
struct Population {
  Samples x;
  std::vector<double> cost;     // minimized values
  std::vector<double> weights;  // selection weights, sum 1
};

Population draw_population(const Model& model, const Vector& eta, const Objective& objective,
                           const SelectionScheme& scheme, int lambda, Rng& rng);

struct StepResult {
  Vector eta;
  double best = 0.0;          // best sampled value, objective's own direction
  double emp_quantile = 0.0;  // empirical q-quantile of the sample, same units
  double w_entropy = 0.0;     // entropy of the selection weights
  double dt_used = 0.0;
  int halvings = 0;
};

/// theta + dt sum_i w_i (x_i - theta): igo_step on a Bernoulli model.
StepResult pbil_step(const Model& model, const Vector& eta, const Objective& objective,
                     const SelectionScheme& scheme, int lambda, double dt, Rng& rng,
                     DomainExitPolicy policy = DomainExitPolicy::halt);

/// Blockwise IGO-ML with blocks (C, m) and rates (dt_c, dt_m).
StepResult cma_rank_mu_step(const Model& model, const Vector& eta, const Objective& objective,
                            const SelectionScheme& scheme, int lambda, double dt_m, double dt_c,
                            Rng& rng, DomainExitPolicy policy = DomainExitPolicy::halt);

/// Smoothed CE/ML step.
StepResult ce_ml_step(const Model& model, const Vector& eta, const Objective& objective,
                      const SelectionScheme& scheme, int lambda, double dt, Rng& rng,
                      DomainExitPolicy policy = DomainExitPolicy::halt);

/// IGO step in expectation parameters on either family.
StepResult igo_generic_step(const Model& model, const Vector& eta, const Objective& objective,
                            const SelectionScheme& scheme, int lambda, double dt, Rng& rng,
                            DomainExitPolicy policy = DomainExitPolicy::halt);

/// Relative payoff procedure: fitness-proportional step on a non-negative
/// reward objective. dt = 1 is the classic RPP, dt < 1 the smoothed one.
/// Exact mode enumerates the support (d <= 16) and ignores lambda and rng.
StepResult rpp_step(const Model& model, const Vector& eta, const Objective& objective,
                    RppMode mode, int lambda, double dt, Rng& rng,
                    DomainExitPolicy policy = DomainExitPolicy::halt);

/// One iteration of config.algorithm from eta, under config.domain_exit.
StepResult algorithm_step(const AlgorithmConfig& config, const Model& model, const Vector& eta,
                          const Objective& objective, const SelectionScheme& scheme, Rng& rng);

struct TraceRow {
  int step = 0;
  Vector eta;
  double best = 0.0;
  double emp_quantile = 0.0;
  double w_entropy = 0.0;
  double kl_prev = 0.0;
  std::optional<double> j_estimate;
  double dt_used = 0.0;
  std::int64_t elapsed_ns = 0;
};

struct Trace {
  std::vector<TraceRow> rows;
  Vector initial_eta;
  Vector final_eta;
  std::optional<double> best;  // best sampled value over the run
  bool halted = false;         // stopped by a domain exit under the halt policy
  std::string stop_reason;     // "max_steps", "target", "domain_exit"
  std::string halt_message;
  int halvings = 0;            // total safeguard halvings
};

/// Runs config.max_steps iterations (or until a stop condition) on the
/// registry objective named by the config. Deterministic given the seed.
Trace run(const AlgorithmConfig& config);
/// Same, with a caller-supplied objective (must match config.dim).
Trace run(const AlgorithmConfig& config, const Objective& objective);

}  // namespace igo
