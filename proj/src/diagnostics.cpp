// SPDX-License-Identifier: Apache-2.0
#include "igo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "igo/error.hpp"
#include "igo/updates.hpp"

namespace igo {

namespace {

class Accumulator {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  Estimate result() const {
    const double var = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    return {mean_, std::sqrt(var / static_cast<double>(n_))};
  }

 private:
  long long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

std::size_t support_index(const PointRef& x) {
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) idx = (idx << 1) | (x[i] != 0.0 ? 1u : 0u);
  return idx;
}

std::vector<double> cost_table(const Objective& objective) {
  std::vector<double> t = tabulate(objective);
  if (objective.direction() == Direction::maximize) {
    for (double& v : t) v = -v;
  }
  return t;
}

}  // namespace

double empirical_quantile(std::span<const double> values, double q) {
  if (values.empty()) fail(ErrorCode::invalid_input, "empirical quantile of an empty sample");
  if (!(q > 0.0 && q < 1.0)) fail(ErrorCode::invalid_input, "quantile level must be in (0, 1)");
  std::vector<double> v(values.begin(), values.end());
  for (double x : v) {
    if (std::isnan(x)) fail(ErrorCode::invalid_input, "empirical quantile of NaN");
  }
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  // Scan distinct values from the top; counts are exact integers.
  std::size_t end = v.size();
  while (end > 0) {
    const double m = v[end - 1];
    const std::size_t first = static_cast<std::size_t>(
        std::lower_bound(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(end), m) - v.begin());
    const double le = static_cast<double>(end);
    const double ge = static_cast<double>(v.size() - first);
    if (le / n >= q && ge / n >= 1.0 - q) return m;
    end = first;
  }
  return v.front();
}

constexpr int kMinJSamples = 100;

Estimate estimate_J(const ExactProblem& problem, const Vector& eta_eval, const Vector& eta_base,
                    const SelectionScheme& scheme, Rng& rng, int n) {
  if (n < kMinJSamples) fail(ErrorCode::invalid_input, "estimate_J needs n >= 100");
  const std::vector<double> w = exact_preference(problem, eta_base, scheme);
  const Samples x = sample(problem.model(), eta_eval, rng, n);
  Accumulator acc;
  for (int i = 0; i < n; ++i) acc.add(w[support_index(x.row(i))]);
  return acc.result();
}

Estimate estimate_J(const Model& model, const Vector& eta_eval, const Vector& eta_base,
                    const std::function<double(const PointRef&)>& cost,
                    const SelectionScheme& scheme, Rng& rng, int n, int holdout) {
  if (n < kMinJSamples || holdout < 1) {
    fail(ErrorCode::invalid_input, "estimate_J needs n >= 100 and holdout >= 1");
  }
  const Samples base = sample(model, eta_base, rng, holdout);
  std::vector<double> ref(static_cast<std::size_t>(holdout));
  for (int i = 0; i < holdout; ++i) ref[static_cast<std::size_t>(i)] = cost(base.row(i));
  std::sort(ref.begin(), ref.end());
  const double total = static_cast<double>(holdout);

  const Samples x = sample(model, eta_eval, rng, n);
  Accumulator acc;
  for (int i = 0; i < n; ++i) {
    const double c = cost(x.row(i));
    const double lo = static_cast<double>(std::lower_bound(ref.begin(), ref.end(), c) - ref.begin());
    const double hi = static_cast<double>(std::upper_bound(ref.begin(), ref.end(), c) - ref.begin());
    const double qm = lo / total;
    const double qp = hi / total;
    acc.add(qp > qm ? scheme.integral(qm, qp) / (qp - qm) : scheme.value(qm));
  }
  return acc.result();
}

BoundReport progress_bound(const ExactProblem& problem, const Vector& eta_t,
                           const Vector& eta_next, const SelectionScheme& scheme, double dt) {
  if (!(dt > 0.0 && dt <= 1.0)) fail(ErrorCode::invalid_input, "progress bound needs 0 < dt <= 1");
  BoundReport r;
  r.fixed_point = eta_t == eta_next;
  const double jm1 = exact_J_minus_one(problem, eta_next, eta_t, scheme);
  r.j_value = 1.0 + jm1;
  r.kl_value = kl_divergence(problem.model(), eta_t, eta_next);
  const double exponent = dt == 1.0 ? 0.0 : (1.0 - dt) / dt * r.kl_value;
  r.bound = std::exp(exponent);
  // ln J > exponent, evaluated without forming J - 1 from J.
  r.satisfied = jm1 > 0.0 && std::log1p(jm1) > exponent;
  return r;
}

ImprovementStats finite_population_improvement(const AlgorithmConfig& config, int n_steps,
                                               int n_seeds, int holdout) {
  config.validate();
  if (config.algorithm == AlgorithmId::rpp) {
    fail(ErrorCode::invalid_input, "quantile improvement applies to rank-based algorithms");
  }
  const Objective objective = make_objective(config.objective, config.dim, config.table_seed);
  const Model model = config.model();
  const SelectionScheme scheme = config.scheme();
  const double q = config.q;
  const bool exact = model.family() == Family::bernoulli;
  if (exact && config.dim > kMaxEnumerationDim) {
    fail(ErrorCode::capacity, "exact quantiles need dim <= 16");
  }
  std::unique_ptr<ExactProblem> problem;
  if (exact) problem = std::make_unique<ExactProblem>(config.dim, cost_table(objective));

  auto surrogate = [&](const Vector& eta, std::uint64_t stream) {
    Rng r(stream);
    const Samples x = sample(model, eta, r, holdout);
    std::vector<double> c(static_cast<std::size_t>(holdout));
    for (int i = 0; i < holdout; ++i) c[static_cast<std::size_t>(i)] = objective.cost(x.row(i));
    return empirical_quantile(c, q);
  };

  ImprovementStats stats;
  for (int s = 0; s < n_seeds; ++s) {
    AlgorithmConfig cfg = config;
    cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(s));
    Rng rng(cfg.seed);
    const std::uint64_t holdout_seed = derive_seed(cfg.seed, 0x486f6c64ULL);
    Vector eta = cfg.initial_eta();
    std::uint64_t draw = 0;
    double before = exact ? exact_quantile(*problem, eta, q).value
                          : surrogate(eta, derive_seed(holdout_seed, draw++));
    for (int t = 0; t < n_steps; ++t) {
      Vector next;
      try {
        next = algorithm_step(cfg, model, eta, objective, scheme, rng).eta;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::domain_exit) throw;
        break;
      }
      const double after = exact ? exact_quantile(*problem, next, q).value
                                 : surrogate(next, derive_seed(holdout_seed, draw++));
      ++stats.steps_total;
      if (after < before) {
        ++stats.steps_improved;
      } else if (after == before) {
        ++stats.steps_equal;
      } else {
        ++stats.steps_worsened;
      }
      eta = std::move(next);
      before = after;
    }
  }
  if (stats.steps_total > 0) {
    stats.improvement_rate = static_cast<double>(stats.steps_improved + stats.steps_equal) /
                             static_cast<double>(stats.steps_total);
  }
  return stats;
}

std::vector<double> check_kl_expansion(const Model& model, const Vector& eta,
                                       const Vector& delta, int halvings) {
  if (halvings < 0) fail(ErrorCode::invalid_input, "halvings must be >= 0");
  if (delta.size() != eta.size()) fail(ErrorCode::invalid_input, "delta has the wrong length");
  require_domain(model, eta, "KL expansion base point");
  require_domain(model, eta + delta, "KL expansion displaced point");
  std::vector<double> err;
  if (delta.isZero(0.0)) {
    err.assign(static_cast<std::size_t>(halvings) + 1, 0.0);
    return err;
  }
  const Matrix fim = fisher_information(model, eta);
  for (int k = 0; k <= halvings; ++k) {
    const Vector d = std::ldexp(1.0, -k) * delta;
    const double quad = 0.5 * d.dot(fim * d);
    err.push_back(std::abs(kl_divergence(model, eta, eta + d) - quad));
  }
  return err;
}

Vector fd_grad_log_density(const Model& model, const Vector& eta, const PointRef& x, double h) {
  Vector g(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    Vector up = eta;
    Vector down = eta;
    up[i] += h;
    down[i] -= h;
    g[i] = (log_density(model, up, x) - log_density(model, down, x)) / (2.0 * h);
  }
  return g;
}

double natural_gradient_angle(const ExactProblem& problem, const Vector& eta,
                              const SelectionScheme& scheme, double dt) {
  const Vector step = exact_infinite_population_step(problem, eta, scheme, dt) - eta;
  const std::vector<double> w = exact_preference(problem, eta, scheme);
  auto j_at = [&](const Vector& theta) {
    const std::vector<double> p = problem.probabilities(theta);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += w[i] * p[i];
    return s;
  };
  const double h = 1e-6;
  Vector grad(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    Vector up = eta;
    Vector down = eta;
    up[i] += h;
    down[i] -= h;
    grad[i] = (j_at(up) - j_at(down)) / (2.0 * h);
  }
  const Vector natural = fisher_information(problem.model(), eta).ldlt().solve(grad);
  const double a = step.norm();
  const double b = natural.norm();
  if (a == 0.0 && b == 0.0) return 0.0;
  if (a == 0.0 || b == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const Vector ua = step / a;
  const Vector ub = natural / b;
  return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

}  // namespace igo
