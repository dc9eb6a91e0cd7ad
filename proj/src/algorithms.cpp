// SPDX-License-Identifier: Apache-2.0
#include "igo/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "igo/config.hpp"
#include "igo/diagnostics.hpp"
#include "igo/error.hpp"
#include "igo/oracle_exact.hpp"
#include "igo/updates.hpp"

namespace igo {

namespace {

constexpr AlgorithmId kAllAlgorithms[] = {AlgorithmId::pbil, AlgorithmId::cma_rank_mu,
                                          AlgorithmId::ce_ml, AlgorithmId::rpp,
                                          AlgorithmId::igo_generic};

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  fail(ErrorCode::config, field + ": " + what);
}

void check_rate(const char* field, double dt, bool uncertified) {
  if (!std::isfinite(dt) || dt < 0.0) config_error(field, "step size must be >= 0");
  if (dt > 1.0 && !uncertified) {
    config_error(field, "step size " + format_real(dt) +
                            " exceeds 1: monotone q-quantile improvement is only guaranteed for "
                            "0 < dt <= 1 (pass --uncertified to run anyway)");
  }
}

double entropy(std::span<const double> w) {
  double h = 0.0;
  for (double v : w) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

// Converts a cost-space value back to the objective's own direction.
double as_value(const Objective& objective, double cost) {
  return objective.direction() == Direction::maximize ? -cost : cost;
}

StepResult summarize(const Objective& objective, const Population& pop, double q) {
  StepResult r;
  double best = std::numeric_limits<double>::infinity();
  for (double c : pop.cost) best = std::min(best, c);
  r.best = as_value(objective, best);
  r.emp_quantile = as_value(objective, empirical_quantile(pop.cost, q));
  r.w_entropy = entropy(pop.weights);
  return r;
}

template <class Fn>
void apply(StepResult& r, const Fn& update, double dt, DomainExitPolicy policy) {
  if (policy == DomainExitPolicy::halt) {
    r.eta = update(dt);
    r.dt_used = dt;
    return;
  }
  SafeguardedResult s = safeguarded(update, dt);
  r.eta = std::move(s.eta);
  r.dt_used = s.dt_used;
  r.halvings = s.halvings;
}

void require_space(const Model& model, const Objective& objective) {
  const bool binary = model.family() == Family::bernoulli;
  if (binary != (objective.space() == SearchSpace::binary)) {
    fail(ErrorCode::invalid_input, "objective '" + objective.id() + "' does not match the model");
  }
  if (model.dim() != objective.dim()) {
    fail(ErrorCode::invalid_input, "objective dimension differs from the model dimension");
  }
}

// The q used for trace quantiles when the scheme is tabulated.
double report_q(const SelectionScheme& scheme) {
  return scheme.truncation_q().value_or(0.5);
}

}  // namespace

const char* to_string(AlgorithmId id) noexcept {
  switch (id) {
    case AlgorithmId::pbil: return "pbil";
    case AlgorithmId::cma_rank_mu: return "cma_rank_mu";
    case AlgorithmId::ce_ml: return "ce_ml";
    case AlgorithmId::rpp: return "rpp";
    case AlgorithmId::igo_generic: return "igo_generic";
  }
  return "?";
}

std::optional<AlgorithmId> parse_algorithm(const std::string& name) {
  for (AlgorithmId id : kAllAlgorithms) {
    if (name == to_string(id)) return id;
  }
  return std::nullopt;
}

void AlgorithmConfig::validate() const {
  if (dim < 1) config_error("dim", "must be >= 1");
  const bool rank_based = algorithm != AlgorithmId::rpp;
  if (rank_based && lambda < 2) config_error("lambda", "rank-based selection needs lambda >= 2");
  if (!rank_based && rpp_mode == RppMode::sample && lambda < 1) {
    config_error("lambda", "must be >= 1");
  }
  if (weights.empty()) {
    if (!(q > 0.0 && q < 1.0)) config_error("q", "must be in (0, 1)");
  } else {
    try {
      (void)SelectionScheme::tabulated(weights);
    } catch (const Error& e) {
      config_error("weights", e.what());
    }
  }
  if (algorithm == AlgorithmId::cma_rank_mu) {
    check_rate("dt-m", dt_m, uncertified);
    check_rate("dt-c", dt_c, uncertified);
  } else {
    check_rate("dt", dt, uncertified);
  }
  if (max_steps < 0) config_error("steps", "must be >= 0");
  if (!(init_prob > 0.0 && init_prob < 1.0)) config_error("init-prob", "must be in (0, 1)");
  if (!std::isfinite(init_mean)) config_error("init-mean", "must be finite");
  if (!(init_var > 0.0) || !std::isfinite(init_var)) config_error("init-var", "must be > 0");

  std::unique_ptr<Objective> obj;
  try {
    obj = std::make_unique<Objective>(make_objective(objective, dim, table_seed));
  } catch (const Error& e) {
    config_error("objective", e.what());
  }
  const bool binary = obj->space() == SearchSpace::binary;
  switch (algorithm) {
    case AlgorithmId::pbil:
      if (!binary) config_error("algo", "pbil needs a binary objective");
      break;
    case AlgorithmId::rpp:
      if (!binary) config_error("algo", "rpp needs a binary objective");
      if (obj->direction() != Direction::maximize) {
        config_error("objective", "rpp needs a non-negative reward objective "
                                  "(onemax-reward, reward-table)");
      }
      if (rpp_mode == RppMode::exact && dim > kMaxEnumerationDim) {
        config_error("dim", "exact rpp enumerates {0,1}^d and needs dim <= 16");
      }
      break;
    case AlgorithmId::cma_rank_mu:
      if (binary) config_error("algo", "cma_rank_mu needs a continuous objective");
      break;
    case AlgorithmId::ce_ml:
    case AlgorithmId::igo_generic:
      break;
  }
  if (exact_j) {
    if (!binary || algorithm == AlgorithmId::rpp || dim > kMaxEnumerationDim) {
      config_error("j-estimate", "exact J needs a rank-based binary run with dim <= 16");
    }
  }
}

SelectionScheme AlgorithmConfig::scheme() const {
  return weights.empty() ? SelectionScheme::truncation(q) : SelectionScheme::tabulated(weights);
}

Model AlgorithmConfig::model() const {
  const Objective obj = make_objective(objective, dim, table_seed);
  return obj.space() == SearchSpace::binary ? Model::bernoulli(dim) : Model::gaussian(dim);
}

Vector AlgorithmConfig::initial_eta() const {
  if (model().family() == Family::bernoulli) {
    return to_expectation(BernoulliParams{Vector::Constant(dim, init_prob)});
  }
  return to_expectation(
      GaussianParams{Vector::Constant(dim, init_mean), Matrix::Identity(dim, dim) * init_var});
}

Population draw_population(const Model& model, const Vector& eta, const Objective& objective,
                           const SelectionScheme& scheme, int lambda, Rng& rng) {
  require_space(model, objective);
  Population pop;
  pop.x = sample(model, eta, rng, lambda);
  pop.cost.resize(static_cast<std::size_t>(lambda));
  for (int i = 0; i < lambda; ++i) pop.cost[static_cast<std::size_t>(i)] = objective.cost(pop.x.row(i));
  pop.weights = sample_weights(pop.cost, scheme);
  return pop;
}

StepResult pbil_step(const Model& model, const Vector& eta, const Objective& objective,
                     const SelectionScheme& scheme, int lambda, double dt, Rng& rng,
                     DomainExitPolicy policy) {
  if (model.family() != Family::bernoulli) fail(ErrorCode::invalid_input, "pbil needs a Bernoulli model");
  return igo_generic_step(model, eta, objective, scheme, lambda, dt, rng, policy);
}

StepResult igo_generic_step(const Model& model, const Vector& eta, const Objective& objective,
                            const SelectionScheme& scheme, int lambda, double dt, Rng& rng,
                            DomainExitPolicy policy) {
  const Population pop = draw_population(model, eta, objective, scheme, lambda, rng);
  StepResult r = summarize(objective, pop, report_q(scheme));
  apply(r, [&](double h) { return igo_step(model, eta, pop.x, pop.weights, h); }, dt, policy);
  return r;
}

StepResult ce_ml_step(const Model& model, const Vector& eta, const Objective& objective,
                      const SelectionScheme& scheme, int lambda, double dt, Rng& rng,
                      DomainExitPolicy policy) {
  const Population pop = draw_population(model, eta, objective, scheme, lambda, rng);
  StepResult r = summarize(objective, pop, report_q(scheme));
  apply(r, [&](double h) { return smoothed_ce_step(model, eta, pop.x, pop.weights, h); }, dt,
        policy);
  return r;
}

StepResult cma_rank_mu_step(const Model& model, const Vector& eta, const Objective& objective,
                            const SelectionScheme& scheme, int lambda, double dt_m, double dt_c,
                            Rng& rng, DomainExitPolicy policy) {
  if (model.family() != Family::gaussian) {
    fail(ErrorCode::invalid_input, "cma_rank_mu needs a Gaussian model");
  }
  const Population pop = draw_population(model, eta, objective, scheme, lambda, rng);
  StepResult r = summarize(objective, pop, report_q(scheme));
  const BlockDecomposition blocks = BlockDecomposition::gaussian_cov_then_mean(model.dim());
  // Safeguarding scales both rates together; dt_used reports the factor.
  const double scale = std::max(dt_m, dt_c);
  if (scale == 0.0) {
    r.eta = eta;
    r.dt_used = 0.0;
    return r;
  }
  apply(r,
        [&](double s) {
          const double f = s / scale;
          const double rates[2] = {dt_c * f, dt_m * f};
          return blockwise_igo_ml_step(model, eta, pop.x, pop.weights, blocks, rates);
        },
        scale, policy);
  return r;
}

StepResult rpp_step(const Model& model, const Vector& eta, const Objective& objective,
                    RppMode mode, int lambda, double dt, Rng& rng, DomainExitPolicy policy) {
  require_space(model, objective);
  if (objective.direction() != Direction::maximize) {
    fail(ErrorCode::invalid_input, "rpp needs a reward objective");
  }
  StepResult r;
  if (mode == RppMode::exact) {
    const ExactProblem problem(model.dim(), tabulate(objective));
    r.best = exact_expected_fitness(problem, eta);
    r.emp_quantile = std::numeric_limits<double>::quiet_NaN();
    const std::vector<double> p = problem.probabilities(eta);
    double total = 0.0;
    std::vector<double> w(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) total += (w[i] = p[i] * problem.table()[i]);
    if (total > 0.0) {
      for (double& v : w) v /= total;
    }
    r.w_entropy = entropy(w);
    apply(r, [&](double h) { return exact_fitness_proportional_step(problem, eta, h); }, dt,
          policy);
    return r;
  }
  const Samples x = sample(model, eta, rng, lambda);
  std::vector<double> reward(static_cast<std::size_t>(lambda));
  for (int i = 0; i < lambda; ++i) reward[static_cast<std::size_t>(i)] = objective.evaluate(x.row(i));
  double best = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (double v : reward) {
    best = std::max(best, v);
    total += v;
  }
  r.best = best;
  std::vector<double> cost(reward.size());
  for (std::size_t i = 0; i < reward.size(); ++i) cost[i] = -reward[i];
  r.emp_quantile = -empirical_quantile(cost, 0.5);
  if (total > 0.0) {
    std::vector<double> w(reward.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = reward[i] / total;
    r.w_entropy = entropy(w);
  }
  apply(r, [&](double h) { return fitness_proportional_step(model, eta, x, reward, h); }, dt,
        policy);
  return r;
}

StepResult algorithm_step(const AlgorithmConfig& config, const Model& model, const Vector& eta,
                          const Objective& objective, const SelectionScheme& scheme, Rng& rng) {
  const DomainExitPolicy policy = config.domain_exit;
  switch (config.algorithm) {
    case AlgorithmId::pbil:
      return pbil_step(model, eta, objective, scheme, config.lambda, config.dt, rng, policy);
    case AlgorithmId::cma_rank_mu:
      return cma_rank_mu_step(model, eta, objective, scheme, config.lambda, config.dt_m,
                              config.dt_c, rng, policy);
    case AlgorithmId::ce_ml:
      return ce_ml_step(model, eta, objective, scheme, config.lambda, config.dt, rng, policy);
    case AlgorithmId::rpp:
      return rpp_step(model, eta, objective, config.rpp_mode, config.lambda, config.dt, rng,
                      policy);
    case AlgorithmId::igo_generic:
      return igo_generic_step(model, eta, objective, scheme, config.lambda, config.dt, rng,
                              policy);
  }
  fail(ErrorCode::invalid_input, "unknown algorithm");
}

Trace run(const AlgorithmConfig& config) {
  config.validate();
  return run(config, make_objective(config.objective, config.dim, config.table_seed));
}

Trace run(const AlgorithmConfig& config, const Objective& objective) {
  config.validate();
  if (objective.dim() != config.dim) {
    config_error("dim", "does not match the objective dimension");
  }
  const Model model = objective.space() == SearchSpace::binary ? Model::bernoulli(config.dim)
                                                               : Model::gaussian(config.dim);
  const SelectionScheme scheme = config.scheme();
  Trace trace;
  trace.initial_eta = config.initial_eta();
  trace.final_eta = trace.initial_eta;
  trace.stop_reason = "max_steps";

  std::unique_ptr<ExactProblem> exact;
  if (config.exact_j) exact = std::make_unique<ExactProblem>(config.dim, tabulate(objective));

  Rng rng(config.seed);
  Vector eta = trace.initial_eta;
  using Clock = std::chrono::steady_clock;
  for (int step = 1; step <= config.max_steps; ++step) {
    const auto start = Clock::now();
    StepResult r;
    try {
      r = algorithm_step(config, model, eta, objective, scheme, rng);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::domain_exit) throw;
      trace.halted = true;
      trace.stop_reason = "domain_exit";
      trace.halt_message = e.what();
      break;
    }
    TraceRow row;
    row.step = step;
    row.best = r.best;
    row.emp_quantile = r.emp_quantile;
    row.w_entropy = r.w_entropy;
    row.kl_prev = kl_divergence(model, eta, r.eta);
    if (exact) row.j_estimate = exact_J(*exact, r.eta, eta, scheme);
    row.dt_used = r.dt_used;
    trace.halvings += r.halvings;
    eta = std::move(r.eta);
    row.eta = eta;
    if (config.record_timing) {
      row.elapsed_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start)
                           .count();
    }
    if (!trace.best || (objective.direction() == Direction::maximize ? row.best > *trace.best
                                                                     : row.best < *trace.best)) {
      trace.best = row.best;
    }
    trace.rows.push_back(std::move(row));
    if (config.target) {
      const bool hit = objective.direction() == Direction::maximize ? *trace.best >= *config.target
                                                                    : *trace.best <= *config.target;
      if (hit) {
        trace.stop_reason = "target";
        break;
      }
    }
  }
  trace.final_eta = eta;
  return trace;
}

}  // namespace igo
