// SPDX-License-Identifier: Apache-2.0
#pragma once

// Benchmark objectives. Minimization is the convention everywhere; reward
// objectives carry Direction::maximize and are consumed as such only by the
// fitness-proportional path. Rank-based algorithms minimize the negated
// reward instead.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "igo/exp_family.hpp"

namespace igo {

enum class SearchSpace { binary, continuous };
enum class Direction { minimize, maximize };

class Objective {
 public:
  using Fn = std::function<double(const PointRef&)>;

  Objective(std::string id, int dim, SearchSpace space, Direction direction, Fn fn,
            std::optional<double> optimum = std::nullopt,
            std::optional<Vector> optimizer = std::nullopt);

  const std::string& id() const noexcept { return id_; }
  int dim() const noexcept { return dim_; }
  SearchSpace space() const noexcept { return space_; }
  Direction direction() const noexcept { return direction_; }
  const std::optional<double>& optimum() const noexcept { return optimum_; }
  const std::optional<Vector>& optimizer() const noexcept { return optimizer_; }

  /// Value in the objective's own direction.
  double evaluate(const PointRef& x) const;
  /// Value to minimize: evaluate(x), negated for maximization objectives.
  double cost(const PointRef& x) const;

 private:
  std::string id_;
  int dim_;
  SearchSpace space_;
  Direction direction_;
  Fn fn_;
  std::optional<double> optimum_;
  std::optional<Vector> optimizer_;
};

/// Registry lookup. Ids: onemax, binval, leadingones, random-table (binary,
/// minimize); onemax-reward, reward-table (binary, maximize, non-negative);
/// sphere, ellipsoid (continuous, minimize). Table objectives draw one value
/// per point of {0,1}^d (d <= 16) from `table_seed`.
Objective make_objective(const std::string& id, int dim, std::uint64_t table_seed = 0);

const std::vector<std::string>& objective_ids();

/// evaluate() over the lexicographic support of {0,1}^dim.
std::vector<double> tabulate(const Objective& objective);

}  // namespace igo
