// SPDX-License-Identifier: Apache-2.0
#include "igo/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "igo/error.hpp"
#include "igo/oracle_exact.hpp"
#include "igo/rng.hpp"

namespace igo {

namespace {

std::size_t binary_index(const PointRef& x) {
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) k = (k << 1) | (x[i] != 0.0 ? 1u : 0u);
  return k;
}

Objective table_objective(const std::string& id, int dim, std::uint64_t seed, Direction dir) {
  if (dim > kMaxEnumerationDim) {
    fail(ErrorCode::capacity, id + " is limited to d <= " + std::to_string(kMaxEnumerationDim));
  }
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(dim)));
  auto table = std::make_shared<std::vector<double>>(std::size_t{1} << dim);
  for (double& v : *table) v = uniform01(rng);
  const auto best = dir == Direction::minimize
                        ? std::min_element(table->begin(), table->end())
                        : std::max_element(table->begin(), table->end());
  const auto k = static_cast<Eigen::Index>(best - table->begin());
  Vector opt = binary_support(dim).row(k).transpose();
  return Objective(
      id, dim, SearchSpace::binary, dir,
      [table](const PointRef& x) { return (*table)[binary_index(x)]; }, *best, opt);
}

}  // namespace

Objective::Objective(std::string id, int dim, SearchSpace space, Direction direction, Fn fn,
                     std::optional<double> optimum, std::optional<Vector> optimizer)
    : id_(std::move(id)),
      dim_(dim),
      space_(space),
      direction_(direction),
      fn_(std::move(fn)),
      optimum_(optimum),
      optimizer_(std::move(optimizer)) {}

double Objective::evaluate(const PointRef& x) const {
  if (x.size() != dim_) {
    fail(ErrorCode::invalid_input, id_ + ": point has dimension " + std::to_string(x.size()) +
                                       ", expected " + std::to_string(dim_));
  }
  if (space_ == SearchSpace::binary) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] != 0.0 && x[i] != 1.0) fail(ErrorCode::invalid_input, id_ + ": point is not binary");
    }
  }
  return fn_(x);
}

double Objective::cost(const PointRef& x) const {
  const double v = evaluate(x);
  return direction_ == Direction::minimize ? v : -v;
}

const std::vector<std::string>& objective_ids() {
  static const std::vector<std::string> ids = {"onemax",        "binval",       "leadingones",
                                               "random-table",  "onemax-reward", "reward-table",
                                               "sphere",        "ellipsoid"};
  return ids;
}

Objective make_objective(const std::string& id, int dim, std::uint64_t table_seed) {
  if (dim < 1) fail(ErrorCode::invalid_input, "objective dimension must be >= 1");
  const Vector ones = Vector::Ones(dim);
  const Vector zeros = Vector::Zero(dim);

  if (id == "onemax") {
    return Objective(
        id, dim, SearchSpace::binary, Direction::minimize,
        [dim](const PointRef& x) { return static_cast<double>(dim) - x.sum(); }, 0.0, ones);
  }
  if (id == "binval") {
    if (dim > 52) fail(ErrorCode::invalid_input, "binval is exact only for d <= 52");
    return Objective(
        id, dim, SearchSpace::binary, Direction::minimize,
        [](const PointRef& x) {
          double f = 0.0;
          for (Eigen::Index i = 0; i < x.size(); ++i) f += std::ldexp(1.0 - x[i], static_cast<int>(i));
          return f;
        },
        0.0, ones);
  }
  if (id == "leadingones") {
    return Objective(
        id, dim, SearchSpace::binary, Direction::minimize,
        [dim](const PointRef& x) {
          int lead = 0;
          while (lead < dim && x[lead] != 0.0) ++lead;
          return static_cast<double>(dim - lead);
        },
        0.0, ones);
  }
  if (id == "random-table") return table_objective(id, dim, table_seed, Direction::minimize);
  if (id == "reward-table") return table_objective(id, dim, table_seed, Direction::maximize);
  if (id == "onemax-reward") {
    return Objective(
        id, dim, SearchSpace::binary, Direction::maximize,
        [](const PointRef& x) { return x.sum(); }, static_cast<double>(dim), ones);
  }
  if (id == "sphere") {
    return Objective(
        id, dim, SearchSpace::continuous, Direction::minimize,
        [](const PointRef& x) { return x.squaredNorm(); }, 0.0, zeros);
  }
  if (id == "ellipsoid") {
    Vector coef(dim);
    for (int i = 0; i < dim; ++i) {
      coef[i] = dim == 1 ? 1.0 : std::pow(10.0, 6.0 * i / (dim - 1));
    }
    return Objective(
        id, dim, SearchSpace::continuous, Direction::minimize,
        [coef](const PointRef& x) { return coef.dot(x.cwiseAbs2()); }, 0.0, zeros);
  }
  fail(ErrorCode::invalid_input, "unknown objective '" + id + "'");
}

std::vector<double> tabulate(const Objective& objective) {
  if (objective.space() != SearchSpace::binary) {
    fail(ErrorCode::invalid_input, "only binary objectives can be tabulated");
  }
  const Samples support = binary_support(objective.dim());
  std::vector<double> out(static_cast<std::size_t>(support.rows()));
  for (Eigen::Index k = 0; k < support.rows(); ++k) {
    out[static_cast<std::size_t>(k)] = objective.evaluate(support.row(k).transpose());
  }
  return out;
}

}  // namespace igo
