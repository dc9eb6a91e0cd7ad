// SPDX-License-Identifier: Apache-2.0
#include "igo/updates.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "igo/error.hpp"

namespace igo {

namespace {

constexpr Eigen::Index kLeaf = 8;

// sum_{i in [lo, hi)} term(i), split at the midpoint until leaves of kLeaf.
template <typename Term>
auto pairwise(Eigen::Index lo, Eigen::Index hi, const Term& term) -> decltype(term(lo)) {
  if (hi - lo <= kLeaf) {
    auto acc = term(lo);
    for (Eigen::Index i = lo + 1; i < hi; ++i) acc += term(i);
    return acc;
  }
  const Eigen::Index mid = lo + (hi - lo) / 2;
  auto left = pairwise(lo, mid, term);
  left += pairwise(mid, hi, term);
  return left;
}

void check_inputs(const Model& model, const Vector& eta, const Samples& samples,
                  std::span<const double> weights, const char* what) {
  if (eta.size() != model.param_size()) {
    fail(ErrorCode::invalid_input, std::string(what) + ": expectation parameter has wrong length");
  }
  if (samples.rows() < 1) fail(ErrorCode::invalid_input, std::string(what) + ": no samples");
  if (samples.cols() != model.dim()) {
    fail(ErrorCode::invalid_input, std::string(what) + ": sample dimension mismatch");
  }
  if (static_cast<Eigen::Index>(weights.size()) != samples.rows()) {
    fail(ErrorCode::invalid_input,
         std::string(what) + ": " + std::to_string(weights.size()) + " weights for " +
             std::to_string(samples.rows()) + " samples");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      fail(ErrorCode::invalid_input, std::string(what) + ": weights must be finite and >= 0");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    fail(ErrorCode::invalid_input, std::string(what) + ": weights must sum to 1");
  }
}

void check_dt(double dt, const char* what) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    fail(ErrorCode::invalid_input, std::string(what) + ": step size must be finite and >= 0");
  }
}

Vector statistic(const Model& model, const Samples& samples, Eigen::Index i) {
  return sufficient_statistics(model, samples.row(i).transpose());
}

// sum_i w_i x_i
Vector weighted_mean(const Samples& samples, std::span<const double> weights) {
  return pairwise(0, samples.rows(), [&](Eigen::Index i) -> Vector {
    return weights[static_cast<std::size_t>(i)] * samples.row(i).transpose();
  });
}

// sum_i w_i (x_i - c)(x_i - c)^T
Matrix weighted_scatter(const Samples& samples, std::span<const double> weights,
                        const Vector& center) {
  return pairwise(0, samples.rows(), [&](Eigen::Index i) -> Matrix {
    const Vector z = samples.row(i).transpose() - center;
    return weights[static_cast<std::size_t>(i)] * (z * z.transpose());
  });
}

bool positive_definite(const Matrix& c) {
  return c.allFinite() && Eigen::LLT<Matrix>(c).info() == Eigen::Success;
}

}  // namespace

bool StepConfig::certified() const {
  auto ok = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!dt_per_block.empty()) return std::all_of(dt_per_block.begin(), dt_per_block.end(), ok);
  return ok(dt);
}

void StepConfig::validate() const {
  auto check = [&](double v, const std::string& name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::config, name + " must be a finite value >= 0");
    }
    if (v > 1.0 && !uncertified) {
      fail(ErrorCode::config,
           name + " = " + std::to_string(v) +
               " exceeds 1: monotone q-quantile improvement is only guaranteed for "
               "0 < dt <= 1 (pass --uncertified to run anyway)");
    }
  };
  check(dt, "dt");
  for (std::size_t j = 0; j < dt_per_block.size(); ++j) {
    check(dt_per_block[j], "dt for block " + std::to_string(j));
  }
}

BlockDecomposition BlockDecomposition::gaussian_cov_then_mean(int dim) {
  BlockDecomposition b = gaussian_mean_then_cov(dim);
  std::swap(b.blocks_[0], b.blocks_[1]);
  return b;
}

BlockDecomposition BlockDecomposition::gaussian_mean_then_cov(int dim) {
  if (dim < 1) fail(ErrorCode::invalid_input, "block decomposition needs dimension >= 1");
  BlockDecomposition b;
  Block mean{"m", {}};
  Block cov{"C", {}};
  for (int i = 0; i < dim; ++i) mean.coords.push_back(i);
  for (int i = dim; i < dim + dim * (dim + 1) / 2; ++i) cov.coords.push_back(i);
  b.blocks_ = {mean, cov};
  return b;
}

BlockDecomposition BlockDecomposition::bernoulli_coordinates(int dim) {
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < dim; ++i) groups.push_back({i});
  return bernoulli_groups(dim, std::move(groups));
}

BlockDecomposition BlockDecomposition::bernoulli_groups(int dim,
                                                        std::vector<std::vector<int>> groups) {
  if (dim < 1) fail(ErrorCode::invalid_input, "block decomposition needs dimension >= 1");
  std::vector<int> seen(static_cast<std::size_t>(dim), 0);
  BlockDecomposition b;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) fail(ErrorCode::invalid_input, "empty block");
    for (int c : groups[g]) {
      if (c < 0 || c >= dim || seen[static_cast<std::size_t>(c)]++) {
        fail(ErrorCode::invalid_input, "blocks must partition the coordinates");
      }
    }
    b.blocks_.push_back(Block{"b" + std::to_string(g), std::move(groups[g])});
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    fail(ErrorCode::invalid_input, "blocks must cover every coordinate");
  }
  return b;
}

Vector weighted_statistic(const Model& model, const Samples& samples,
                          std::span<const double> weights) {
  return pairwise(0, samples.rows(), [&](Eigen::Index i) -> Vector {
    return weights[static_cast<std::size_t>(i)] * statistic(model, samples, i);
  });
}

Vector igo_step(const Model& model, const Vector& eta, const Samples& samples,
                std::span<const double> weights, double dt) {
  check_inputs(model, eta, samples, weights, "igo_step");
  check_dt(dt, "igo_step");
  const Vector grad = pairwise(0, samples.rows(), [&](Eigen::Index i) -> Vector {
    return weights[static_cast<std::size_t>(i)] * (statistic(model, samples, i) - eta);
  });
  Vector next = eta + dt * grad;
  require_domain(model, next, "igo_step");
  return next;
}

Vector igo_ml_step(const Model& model, const Vector& eta, const Samples& samples,
                   std::span<const double> weights, double dt) {
  check_inputs(model, eta, samples, weights, "igo_ml_step");
  check_dt(dt, "igo_ml_step");
  const Vector target = weighted_statistic(model, samples, weights);
  Vector next = (1.0 - dt) * eta + dt * target;
  require_domain(model, next, "igo_ml_step");
  return next;
}

Vector smoothed_ce_step(const Model& model, const Vector& eta, const Samples& samples,
                        std::span<const double> weights, double dt) {
  check_inputs(model, eta, samples, weights, "smoothed_ce_step");
  check_dt(dt, "smoothed_ce_step");
  if (dt == 0.0) return eta;
  // Weighted ML estimate in the model's usual parameters, then mapped back.
  // The estimate may sit on the closure of the domain (a Bernoulli coordinate
  // at 0 or 1, a singular covariance); only the blended result must be
  // interior.
  Vector ml_eta;
  if (model.family() == Family::bernoulli) {
    ml_eta = weighted_mean(samples, weights);
  } else {
    const Vector mean = weighted_mean(samples, weights);
    Matrix cov = weighted_scatter(samples, weights, mean);
    cov = 0.5 * (cov + cov.transpose()).eval();
    ml_eta.resize(model.param_size());
    ml_eta.head(model.dim()) = mean;
    ml_eta.tail(ml_eta.size() - model.dim()) = pack_symmetric(cov + mean * mean.transpose());
  }
  Vector next = (1.0 - dt) * eta + dt * ml_eta;
  require_domain(model, next, "smoothed_ce_step");
  return next;
}

Vector blockwise_igo_ml_step(const Model& model, const Vector& eta, const Samples& samples,
                             std::span<const double> weights,
                             const BlockDecomposition& blocks,
                             std::span<const double> dt_per_block) {
  check_inputs(model, eta, samples, weights, "blockwise_igo_ml_step");
  if (dt_per_block.size() != blocks.size()) {
    fail(ErrorCode::invalid_input, "blockwise_igo_ml_step: one step size per block required");
  }
  for (double dt : dt_per_block) check_dt(dt, "blockwise_igo_ml_step");

  if (model.family() == Family::bernoulli) {
    const Vector target = weighted_mean(samples, weights);
    Vector cur = eta;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      const double dt = dt_per_block[j];
      for (int c : blocks.blocks()[j].coords) {
        if (c < 0 || c >= model.dim()) {
          fail(ErrorCode::invalid_input, "block coordinate outside the model");
        }
        cur[c] = (1.0 - dt) * cur[c] + dt * target[c];
      }
      require_domain(model, cur, ("blockwise_igo_ml_step block " + blocks.blocks()[j].name).c_str());
    }
    return cur;
  }

  GaussianParams g = gaussian_params(model, eta);
  bool saw_mean = false;
  bool saw_cov = false;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const double dt = dt_per_block[j];
    const std::string& name = blocks.blocks()[j].name;
    if (name == "C" && !saw_cov) {
      // Restricted family with the mean frozen: its expectation parameter is
      // E[(x - m)(x - m)^T] = C.
      Matrix target = weighted_scatter(samples, weights, g.mean);
      Matrix next = (1.0 - dt) * g.cov + dt * target;
      next = 0.5 * (next + next.transpose()).eval();
      if (!positive_definite(next)) {
        fail(ErrorCode::domain_exit, "blockwise_igo_ml_step block C: covariance not positive definite");
      }
      g.cov = next;
      saw_cov = true;
    } else if (name == "m" && !saw_mean) {
      // Stationarity of the restricted objective: (1-dt)(m - m*) + dt sum w (x - m*) = 0.
      g.mean = (1.0 - dt) * g.mean + dt * weighted_mean(samples, weights);
      saw_mean = true;
    } else {
      fail(ErrorCode::invalid_input, "Gaussian blocks must be \"C\" and \"m\", each once");
    }
  }
  if (!saw_mean || !saw_cov) {
    fail(ErrorCode::invalid_input, "Gaussian blocks must be \"C\" and \"m\", each once");
  }
  Vector out(model.param_size());
  const int d = model.dim();
  out.head(d) = g.mean;
  out.tail(out.size() - d) = pack_symmetric(g.cov + g.mean * g.mean.transpose());
  require_domain(model, out, "blockwise_igo_ml_step");
  return out;
}

Vector fitness_proportional_step(const Model& model, const Vector& eta, const Samples& points,
                                 std::span<const double> rewards, double dt,
                                 std::span<const double> prob) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (rewards.size() != n) {
    fail(ErrorCode::invalid_input, "fitness_proportional_step: one reward per point required");
  }
  if (!prob.empty() && prob.size() != n) {
    fail(ErrorCode::invalid_input, "fitness_proportional_step: one probability per point required");
  }
  check_dt(dt, "fitness_proportional_step");
  std::vector<double> mass(n);
  double expected = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rewards[i] >= 0.0) || !std::isfinite(rewards[i])) {
      fail(ErrorCode::invalid_input, "fitness_proportional_step: rewards must be finite and >= 0");
    }
    const double p = prob.empty() ? 1.0 / static_cast<double>(n) : prob[i];
    mass[i] = p * rewards[i];
    expected += mass[i];
  }
  if (!(expected > 0.0)) {
    fail(ErrorCode::invalid_input, "fitness_proportional_step: reward is zero everywhere");
  }
  for (double& m : mass) m /= expected;
  return igo_step(model, eta, points, mass, dt);
}

Vector malago_step(const Model& model, const Vector& eta, const Samples& samples,
                   std::span<const double> fitness, double dt, MalagoScaling scaling) {
  if (static_cast<Eigen::Index>(fitness.size()) != samples.rows() || samples.rows() < 1) {
    fail(ErrorCode::invalid_input, "malago_step: one fitness value per sample required");
  }
  if (samples.cols() != model.dim() || eta.size() != model.param_size()) {
    fail(ErrorCode::invalid_input, "malago_step: dimension mismatch");
  }
  check_dt(dt, "malago_step");
  const double scale =
      scaling == MalagoScaling::per_sample ? 1.0 / static_cast<double>(samples.rows()) : 1.0;
  const Vector grad = pairwise(0, samples.rows(), [&](Eigen::Index i) -> Vector {
    return fitness[static_cast<std::size_t>(i)] * (statistic(model, samples, i) - eta);
  });
  Vector next = eta - dt * scale * grad;
  require_domain(model, next, "malago_step");
  return next;
}

SafeguardedResult safeguarded(const std::function<Vector(double)>& step, double dt,
                              int max_halvings) {
  double current = dt;
  for (int k = 0;; ++k) {
    try {
      return SafeguardedResult{step(current), current, k};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::domain_exit || k >= max_halvings) throw;
    }
    current *= 0.5;
  }
}

}  // namespace igo
