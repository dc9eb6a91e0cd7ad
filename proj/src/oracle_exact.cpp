// SPDX-License-Identifier: Apache-2.0
#include "igo/oracle_exact.hpp"

#include <cmath>
#include <string>

#include "igo/error.hpp"

namespace igo {

namespace {

void check_dim(int dim) {
  if (dim < 1) fail(ErrorCode::invalid_input, "enumeration needs dimension >= 1");
  if (dim > kMaxEnumerationDim) {
    fail(ErrorCode::capacity, "exact enumeration is limited to d <= " +
                                  std::to_string(kMaxEnumerationDim) + " (got " +
                                  std::to_string(dim) + ")");
  }
}

void check_eta(const ExactProblem& problem, const Vector& eta) {
  if (eta.size() != problem.dim()) {
    fail(ErrorCode::invalid_input, "parameter dimension does not match the exact problem");
  }
  if (!in_domain(problem.model(), eta)) {
    fail(ErrorCode::invalid_input, "exact evaluation needs an interior Bernoulli point");
  }
}

// Row k of the lexicographic support, x_0 most significant.
template <typename Leaf>
void expand(int dim, std::vector<double>& out, double init, const Leaf& leaf) {
  out.assign(1, init);
  for (int i = 0; i < dim; ++i) {
    std::vector<double> next(out.size() * 2);
    for (std::size_t k = 0; k < out.size(); ++k) {
      next[2 * k] = leaf(i, 0, out[k]);
      next[2 * k + 1] = leaf(i, 1, out[k]);
    }
    out.swap(next);
  }
}

double sum_in_order(std::span<const double> v) {
  double s = 0.0;
  double c = 0.0;
  for (double x : v) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

}  // namespace

Samples binary_support(int dim) {
  check_dim(dim);
  const Eigen::Index n = Eigen::Index{1} << dim;
  Samples s(n, dim);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (int i = 0; i < dim; ++i) s(k, i) = static_cast<double>((k >> (dim - 1 - i)) & 1);
  }
  return s;
}

FiniteDist enumerate(const BernoulliParams& params) {
  const auto dim = static_cast<int>(params.probs.size());
  check_dim(dim);
  const Vector eta = to_expectation(params);
  FiniteDist dist;
  dist.support = binary_support(dim);
  expand(dim, dist.prob, 1.0, [&](int i, int bit, double acc) {
    return acc * (bit ? eta[i] : 1.0 - eta[i]);
  });
  return dist;
}

QuantileReport exact_quantile(std::span<const double> prob, const LevelSets& levels, double q) {
  if (!(q > 0.0 && q < 1.0)) fail(ErrorCode::invalid_input, "quantile level must be in (0, 1)");
  if (prob.size() != levels.points()) {
    fail(ErrorCode::invalid_input, "probability and fitness sequences differ in length");
  }
  const std::size_t n = levels.levels();
  std::vector<double> mass(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> parts;
    for (int idx : levels.members(k)) parts.push_back(prob[static_cast<std::size_t>(idx)]);
    mass[k] = sum_in_order(parts);
  }
  // Prefix and suffix sums are accumulated separately; 1 - prefix would lose
  // the small tail masses that decide the upper condition.
  std::vector<double> lower(n);
  std::vector<double> upper(n);
  {
    double s = 0.0, c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = s + mass[k];
      c += std::abs(s) >= std::abs(mass[k]) ? (s - t) + mass[k] : (mass[k] - t) + s;
      s = t;
      lower[k] = s + c;
    }
  }
  {
    double s = 0.0, c = 0.0;
    for (std::size_t k = n; k-- > 0;) {
      const double t = s + mass[k];
      c += std::abs(s) >= std::abs(mass[k]) ? (s - t) + mass[k] : (mass[k] - t) + s;
      s = t;
      upper[k] = s + c;
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    if (upper[k] >= 1.0 - q && lower[k] >= q) {
      return QuantileReport{levels.value(k), lower[k], upper[k]};
    }
  }
  // Unreachable for a normalized distribution: the smallest level always has
  // full upper mass. Fall back to it for sub-normalized inputs.
  return QuantileReport{levels.value(0), lower[0], upper[0]};
}

QuantileReport exact_quantile(const FiniteDist& dist, std::span<const double> fitness, double q) {
  if (dist.prob.empty()) fail(ErrorCode::invalid_input, "distribution has empty support");
  return exact_quantile(dist.prob, LevelSets(fitness), q);
}

ExactProblem::ExactProblem(int dim, std::vector<double> table)
    : dim_(dim),
      model_(Model::bernoulli(dim)),
      support_(binary_support(dim)),
      table_(std::move(table)),
      levels_(table_) {
  if (table_.size() != static_cast<std::size_t>(support_.rows())) {
    fail(ErrorCode::invalid_input, "exact problem table must hold 2^d values");
  }
}

std::vector<double> ExactProblem::probabilities(const Vector& eta) const {
  check_eta(*this, eta);
  std::vector<double> p;
  expand(dim_, p, 1.0, [&](int i, int bit, double acc) {
    return acc * (bit ? eta[i] : 1.0 - eta[i]);
  });
  return p;
}

std::vector<double> ExactProblem::log_probabilities(const Vector& eta) const {
  check_eta(*this, eta);
  std::vector<double> lp;
  expand(dim_, lp, 0.0, [&](int i, int bit, double acc) {
    return acc + (bit ? std::log(eta[i]) : std::log1p(-eta[i]));
  });
  return lp;
}

std::vector<double> ExactProblem::probability_differences(const Vector& next,
                                                          const Vector& base) const {
  check_eta(*this, next);
  check_eta(*this, base);
  // Carry (p_base, p_next - p_base) per prefix; the difference of products
  // is telescoped one factor at a time.
  std::vector<double> pb{1.0};
  std::vector<double> diff{0.0};
  for (int i = 0; i < dim_; ++i) {
    const double step = next[i] - base[i];
    std::vector<double> pb2(pb.size() * 2);
    std::vector<double> diff2(pb.size() * 2);
    const double a0 = 1.0 - next[i];
    const double b0 = 1.0 - base[i];
    for (std::size_t k = 0; k < pb.size(); ++k) {
      pb2[2 * k] = pb[k] * b0;
      diff2[2 * k] = diff[k] * a0 - pb[k] * step;
      pb2[2 * k + 1] = pb[k] * base[i];
      diff2[2 * k + 1] = diff[k] * next[i] + pb[k] * step;
    }
    pb.swap(pb2);
    diff.swap(diff2);
  }
  return diff;
}

QuantileReport exact_quantile(const ExactProblem& problem, const Vector& eta, double q) {
  return exact_quantile(problem.probabilities(eta), problem.levels(), q);
}

std::vector<double> exact_preference(const ExactProblem& problem, const Vector& eta,
                                     const SelectionScheme& scheme) {
  return preference_exact(problem.probabilities(eta), problem.levels(), scheme);
}

namespace {

std::vector<double> selection_mass(const ExactProblem& problem, const Vector& eta,
                                   const SelectionScheme& scheme) {
  std::vector<double> p = problem.probabilities(eta);
  const std::vector<double> w = preference_exact(p, problem.levels(), scheme);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] *= w[k];
  return p;
}

}  // namespace

Vector exact_infinite_population_step(const ExactProblem& problem, const Vector& eta,
                                      const SelectionScheme& scheme, double dt) {
  const std::vector<double> mass = selection_mass(problem, eta, scheme);
  return igo_step(problem.model(), eta, problem.support(), mass, dt);
}

Vector exact_blockwise_step(const ExactProblem& problem, const Vector& eta,
                            const SelectionScheme& scheme, const BlockDecomposition& blocks,
                            std::span<const double> dt_per_block) {
  const std::vector<double> mass = selection_mass(problem, eta, scheme);
  return blockwise_igo_ml_step(problem.model(), eta, problem.support(), mass, blocks,
                               dt_per_block);
}

Vector exact_fitness_proportional_step(const ExactProblem& problem, const Vector& eta,
                                       double dt) {
  const std::vector<double> p = problem.probabilities(eta);
  return fitness_proportional_step(problem.model(), eta, problem.support(), problem.table(), dt, p);
}

double exact_J(const ExactProblem& problem, const Vector& eta_eval, const Vector& eta_base,
               const SelectionScheme& scheme) {
  const std::vector<double> w = exact_preference(problem, eta_base, scheme);
  std::vector<double> p = problem.probabilities(eta_eval);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] *= w[k];
  return sum_in_order(p);
}

double exact_J_minus_one(const ExactProblem& problem, const Vector& eta_eval,
                         const Vector& eta_base, const SelectionScheme& scheme) {
  const std::vector<double> w = exact_preference(problem, eta_base, scheme);
  std::vector<double> d = problem.probability_differences(eta_eval, eta_base);
  for (std::size_t k = 0; k < d.size(); ++k) d[k] *= w[k];
  return sum_in_order(d);
}

double exact_H(const ExactProblem& problem, const Vector& eta_eval, const Vector& eta_base,
               const SelectionScheme& scheme) {
  const std::vector<double> w = exact_preference(problem, eta_base, scheme);
  const std::vector<double> pb = problem.probabilities(eta_base);
  const std::vector<double> lp = problem.log_probabilities(eta_eval);
  std::vector<double> terms(pb.size());
  for (std::size_t k = 0; k < pb.size(); ++k) terms[k] = w[k] == 0.0 ? 0.0 : pb[k] * w[k] * lp[k];
  return sum_in_order(terms);
}

double exact_H_gain(const ExactProblem& problem, const Vector& eta_eval, const Vector& eta_base,
                    const SelectionScheme& scheme) {
  check_eta(problem, eta_eval);
  const std::vector<double> w = exact_preference(problem, eta_base, scheme);
  const std::vector<double> pb = problem.probabilities(eta_base);
  std::vector<double> ratio;
  expand(problem.dim(), ratio, 0.0, [&](int i, int bit, double acc) {
    const double d = eta_eval[i] - eta_base[i];
    return acc + (bit ? std::log1p(d / eta_base[i]) : std::log1p(-d / (1.0 - eta_base[i])));
  });
  std::vector<double> terms(pb.size());
  for (std::size_t k = 0; k < pb.size(); ++k) terms[k] = pb[k] * w[k] * ratio[k];
  return sum_in_order(terms);
}

double exact_expected_fitness(const ExactProblem& problem, const Vector& eta) {
  std::vector<double> p = problem.probabilities(eta);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] *= problem.table()[k];
  return sum_in_order(p);
}

double exact_level_mass(const ExactProblem& problem, const Vector& eta, double value) {
  const std::vector<double> p = problem.probabilities(eta);
  std::vector<double> parts;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (problem.table()[k] == value) parts.push_back(p[k]);
  }
  return sum_in_order(parts);
}

}  // namespace igo
