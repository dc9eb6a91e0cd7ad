// SPDX-License-Identifier: Apache-2.0
#pragma once

// Named verification suites over the exact oracle and the diagnostics.
// Every suite is deterministic given (grid, seed) and reports JSON.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "igo/exp_family.hpp"

namespace igo {

struct VerifyOptions {
  std::string grid = "small";  // "small" (full size) or "smoke" (reduced)
  std::uint64_t seed = 1;
  unsigned threads = 0;        // 0: IGO_KIT_THREADS, else hardware concurrency
};

struct SuiteReport {
  std::string suite;
  bool passed = false;
  nlohmann::ordered_json detail;
};

/// Suite names accepted by run_suite, "all" last.
const std::vector<std::string>& suite_names();

/// Throws ErrorCode::unknown_suite for unknown names and ErrorCode::config
/// for unknown grids.
SuiteReport run_suite(const std::string& name, const VerifyOptions& options = {});

/// Worker count: `requested` if nonzero, else IGO_KIT_THREADS, else the
/// hardware concurrency. Always >= 1.
unsigned verify_threads(unsigned requested = 0);

/// One exact Bernoulli configuration of the quantile-improvement grid.
struct QuantileCase {
  int index = 0;
  int dim = 0;
  std::string objective;  // onemax, binval, random-table
  double q = 0.0;
  double dt = 0.0;
  std::uint64_t table_seed = 0;
  Vector theta0;
  int steps = 0;
};

/// 200 configurations x 100 steps on "small", 24 x 20 on "smoke":
/// d in 2..10, objective cycling over {onemax, binval, random-table},
/// q over {0.1, 0.25, 0.5}, dt over {0.1, 0.5, 1.0}, theta0 in [0.05, 0.95]^d.
std::vector<QuantileCase> quantile_grid(const std::string& grid, std::uint64_t seed);

/// Coordinate-blocked variant: dt_j per block drawn from
/// {0.1, 0.25, 0.5, 0.75, 1.0}; odd cases group coordinates in pairs.
struct BlockwiseCase {
  QuantileCase base;
  std::vector<std::vector<int>> groups;
  std::vector<double> dt_per_block;
};
std::vector<BlockwiseCase> blockwise_grid(const std::string& grid, std::uint64_t seed);

/// Random non-negative reward tables (about a fifth of the entries zero),
/// d in 2..10, dt over {0.25, 0.5, 1.0}.
struct RewardCase {
  int index = 0;
  int dim = 0;
  std::vector<double> rewards;
  double dt = 0.0;
  Vector theta0;
  int steps = 0;
};
std::vector<RewardCase> reward_grid(const std::string& grid, std::uint64_t seed);

}  // namespace igo
