// SPDX-License-Identifier: Apache-2.0
#include "igo/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <thread>

#include "igo/algorithms.hpp"
#include "igo/diagnostics.hpp"
#include "igo/error.hpp"
#include "igo/objectives.hpp"
#include "igo/oracle_exact.hpp"
#include "igo/rng.hpp"
#include "igo/selection.hpp"
#include "igo/updates.hpp"

namespace igo {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kFitnessTol = 1e-12;
constexpr double kFixedPointTol = 1e-12;

struct GridSize {
  int configs;
  int steps;
};

GridSize grid_size(const std::string& grid, int small_configs, int small_steps) {
  if (grid == "small") return {small_configs, small_steps};
  if (grid == "smoke") return {std::max(6, small_configs / 8), std::min(small_steps, 20)};
  fail(ErrorCode::config, "grid: unknown grid '" + grid + "' (expected small or smoke)");
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double max_abs_diff(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

Vector random_theta(Rng& rng, int d, double lo = 0.05, double hi = 0.95) {
  Vector t(d);
  for (int i = 0; i < d; ++i) t[i] = lo + (hi - lo) * uniform01(rng);
  return t;
}

double normal(Rng& rng) {
  std::normal_distribution<double> n;
  return n(rng);
}

int pick(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); }

// ---------------------------------------------------------------- quantile

struct QuantileOutcome {
  int steps = 0;
  int increases = 0;
  double max_increase = 0.0;
  int improved = 0;
  int equal = 0;
  int unexplained_stalls = 0;
  int fixed_points = 0;
  bool domain_exit = false;
  int exit_step = -1;
  double q_initial = 0.0;
  double q_final = 0.0;
  // Progress bound, dt < 1 only.
  int bound_checked = 0;
  int bound_violations = 0;
  double min_log_margin = std::numeric_limits<double>::infinity();
};

template <class StepFn>
QuantileOutcome run_quantile_dynamics(const ExactProblem& problem, const Vector& theta0, double q,
                                      int steps, const StepFn& step, double bound_dt,
                                      const SelectionScheme& scheme) {
  QuantileOutcome out;
  Vector eta = theta0;
  double before = exact_quantile(problem, eta, q).value;
  out.q_initial = before;
  for (int t = 0; t < steps; ++t) {
    Vector next;
    try {
      next = step(eta);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::domain_exit) throw;
      out.domain_exit = true;
      out.exit_step = t;
      break;
    }
    const double after = exact_quantile(problem, next, q).value;
    ++out.steps;
    const bool fixed = max_abs_diff(next, eta) <= kFixedPointTol;
    if (fixed) ++out.fixed_points;
    if (after > before + kFitnessTol) {
      ++out.increases;
      out.max_increase = std::max(out.max_increase, after - before);
    } else if (after < before - kFitnessTol) {
      ++out.improved;
    } else {
      ++out.equal;
      if (!fixed && !(exact_level_mass(problem, next, after) > 0.0)) ++out.unexplained_stalls;
    }
    if (bound_dt > 0.0 && bound_dt < 1.0 && !fixed) {
      const BoundReport br = progress_bound(problem, eta, next, scheme, bound_dt);
      ++out.bound_checked;
      if (!br.satisfied) ++out.bound_violations;
      const double margin = std::log(br.j_value) - std::log(br.bound);
      out.min_log_margin = std::min(out.min_log_margin, margin);
    }
    eta = std::move(next);
    before = after;
  }
  out.q_final = before;
  return out;
}

std::vector<double> cost_table(const std::string& id, int dim, std::uint64_t table_seed) {
  return tabulate(make_objective(id, dim, table_seed));
}

Json quantile_case_json(const QuantileCase& c, const QuantileOutcome& o, bool with_bound) {
  Json j;
  j["case"] = c.index;
  j["dim"] = c.dim;
  j["objective"] = c.objective;
  j["q"] = c.q;
  j["dt"] = c.dt;
  j["steps"] = o.steps;
  j["q_initial"] = o.q_initial;
  j["q_final"] = o.q_final;
  j["increases"] = o.increases;
  j["improved"] = o.improved;
  j["equal"] = o.equal;
  j["unexplained_stalls"] = o.unexplained_stalls;
  j["domain_exit_step"] = o.domain_exit ? Json(o.exit_step) : Json();
  if (with_bound) {
    j["bound_checked"] = o.bound_checked;
    j["bound_violations"] = o.bound_violations;
  }
  return j;
}

std::vector<QuantileOutcome> run_quantile_grid(const std::vector<QuantileCase>& cases,
                                               unsigned threads, bool with_bound) {
  std::vector<QuantileOutcome> out(cases.size());
  parallel_for(cases.size(), threads, [&](std::size_t i) {
    const QuantileCase& c = cases[i];
    const ExactProblem problem(c.dim, cost_table(c.objective, c.dim, c.table_seed));
    const SelectionScheme scheme = SelectionScheme::truncation(c.q);
    out[i] = run_quantile_dynamics(
        problem, c.theta0, c.q, c.steps,
        [&](const Vector& eta) {
          return exact_infinite_population_step(problem, eta, scheme, c.dt);
        },
        with_bound ? c.dt : 0.0, scheme);
  });
  return out;
}

SuiteReport quantile_improvement(const VerifyOptions& opt) {
  const auto cases = quantile_grid(opt.grid, opt.seed);
  const auto outcomes = run_quantile_grid(cases, verify_threads(opt.threads), false);
  long steps = 0, increases = 0, stalls = 0, unexplained = 0, exits = 0, improved = 0;
  double worst = 0.0;
  Json list = Json::array();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& o = outcomes[i];
    steps += o.steps;
    increases += o.increases;
    stalls += o.equal;
    unexplained += o.unexplained_stalls;
    improved += o.improved;
    exits += o.domain_exit;
    worst = std::max(worst, o.max_increase);
    list.push_back(quantile_case_json(cases[i], o, false));
  }
  SuiteReport r{"quantile-improvement", increases == 0 && unexplained == 0, Json::object()};
  r.detail["grid"] = opt.grid;
  r.detail["seed"] = opt.seed;
  r.detail["configs"] = cases.size();
  r.detail["steps_per_config"] = cases.empty() ? 0 : cases.front().steps;
  r.detail["steps_executed"] = steps;
  r.detail["violations"] = increases;
  r.detail["max_increase"] = worst;
  r.detail["tolerance"] = kFitnessTol;
  r.detail["steps_improved"] = improved;
  r.detail["stalls"] = stalls;
  r.detail["unexplained_stalls"] = unexplained;
  r.detail["domain_exits"] = exits;
  r.detail["cases"] = std::move(list);
  return r;
}

SuiteReport progress_bound_suite(const VerifyOptions& opt) {
  // Worked instance: d = 2, f = x_0 + x_1, q = 0.5, dt = 0.5 from (0.5, 0.5).
  const ExactProblem worked(2, {0.0, 1.0, 1.0, 2.0});
  const SelectionScheme half = SelectionScheme::truncation(0.5);
  const Vector t0 = Vector::Constant(2, 0.5);
  const Vector t1 = exact_infinite_population_step(worked, t0, half, 0.5);
  const BoundReport wb = progress_bound(worked, t0, t1, half, 0.5);
  const bool worked_ok = std::abs(wb.j_value - 1.25) <= 1e-6 &&
                         std::abs(wb.bound - 16.0 / 15.0) <= 1e-6 && wb.satisfied &&
                         max_abs_diff(t1, Vector::Constant(2, 0.375)) <= 1e-12;

  const auto cases = quantile_grid(opt.grid, opt.seed);
  const auto outcomes = run_quantile_grid(cases, verify_threads(opt.threads), true);
  long checked = 0, violations = 0;
  double margin = std::numeric_limits<double>::infinity();
  Json list = Json::array();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& o = outcomes[i];
    checked += o.bound_checked;
    violations += o.bound_violations;
    margin = std::min(margin, o.min_log_margin);
    if (o.bound_violations > 0) list.push_back(quantile_case_json(cases[i], o, true));
  }
  SuiteReport r{"progress-bound", worked_ok && violations == 0, Json::object()};
  r.detail["worked_instance"] = {{"theta_next", {t1[0], t1[1]}},
                                 {"j_value", wb.j_value},
                                 {"kl_value", wb.kl_value},
                                 {"bound", wb.bound},
                                 {"satisfied", wb.satisfied},
                                 {"passed", worked_ok}};
  r.detail["grid"] = opt.grid;
  r.detail["seed"] = opt.seed;
  r.detail["configs"] = cases.size();
  r.detail["steps_checked"] = checked;
  r.detail["violations"] = violations;
  r.detail["min_log_margin"] = std::isfinite(margin) ? Json(margin) : Json();
  r.detail["violating_cases"] = std::move(list);
  return r;
}

// --------------------------------------------------------------- blockwise

SuiteReport blockwise_improvement(const VerifyOptions& opt) {
  const auto cases = blockwise_grid(opt.grid, opt.seed);
  std::vector<QuantileOutcome> outcomes(cases.size());
  parallel_for(cases.size(), verify_threads(opt.threads), [&](std::size_t i) {
    const BlockwiseCase& c = cases[i];
    const QuantileCase& b = c.base;
    const ExactProblem problem(b.dim, cost_table(b.objective, b.dim, b.table_seed));
    const SelectionScheme scheme = SelectionScheme::truncation(b.q);
    const BlockDecomposition blocks = BlockDecomposition::bernoulli_groups(b.dim, c.groups);
    outcomes[i] = run_quantile_dynamics(
        problem, b.theta0, b.q, b.steps,
        [&](const Vector& eta) {
          return exact_blockwise_step(problem, eta, scheme, blocks, c.dt_per_block);
        },
        0.0, scheme);
  });
  long steps = 0, increases = 0, exits = 0, unexplained = 0;
  double worst = 0.0;
  Json list = Json::array();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& o = outcomes[i];
    steps += o.steps;
    increases += o.increases;
    unexplained += o.unexplained_stalls;
    exits += o.domain_exit;
    worst = std::max(worst, o.max_increase);
    Json j = quantile_case_json(cases[i].base, o, false);
    j.erase("dt");
    j["dt_per_block"] = cases[i].dt_per_block;
    j["blocks"] = cases[i].groups.size();
    list.push_back(std::move(j));
  }
  SuiteReport r{"blockwise-improvement", increases == 0 && unexplained == 0, Json::object()};
  r.detail["grid"] = opt.grid;
  r.detail["seed"] = opt.seed;
  r.detail["configs"] = cases.size();
  r.detail["steps_executed"] = steps;
  r.detail["violations"] = increases;
  r.detail["max_increase"] = worst;
  r.detail["unexplained_stalls"] = unexplained;
  r.detail["domain_exits"] = exits;
  r.detail["cases"] = std::move(list);
  return r;
}

// ---------------------------------------------------- fitness-proportional

struct RewardOutcome {
  int steps = 0;
  int decreases = 0;
  double max_decrease = 0.0;
  double max_rpp_error = 0.0;
  bool domain_exit = false;
  double reward_initial = 0.0;
  double reward_final = 0.0;
};

// E[x r] / E[r] by direct enumeration.
Vector rpp_target(const ExactProblem& problem, const Vector& eta) {
  const std::vector<double> p = problem.probabilities(eta);
  const Samples& x = problem.support();
  Vector num = Vector::Zero(problem.dim());
  double den = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pr = p[i] * problem.table()[i];
    num += pr * x.row(static_cast<Eigen::Index>(i)).transpose();
    den += pr;
  }
  return num / den;
}

SuiteReport fitness_proportional(const VerifyOptions& opt) {
  const auto cases = reward_grid(opt.grid, opt.seed);
  std::vector<RewardOutcome> outcomes(cases.size());
  parallel_for(cases.size(), verify_threads(opt.threads), [&](std::size_t i) {
    const RewardCase& c = cases[i];
    const ExactProblem problem(c.dim, c.rewards);
    RewardOutcome o;
    Vector eta = c.theta0;
    double before = exact_expected_fitness(problem, eta);
    o.reward_initial = before;
    for (int t = 0; t < c.steps; ++t) {
      Vector next;
      try {
        next = exact_fitness_proportional_step(problem, eta, c.dt);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::domain_exit) throw;
        o.domain_exit = true;
        break;
      }
      if (c.dt == 1.0) {
        o.max_rpp_error = std::max(o.max_rpp_error, max_abs_diff(next, rpp_target(problem, eta)));
      }
      const double after = exact_expected_fitness(problem, next);
      ++o.steps;
      if (after < before - kFitnessTol) {
        ++o.decreases;
        o.max_decrease = std::max(o.max_decrease, before - after);
      }
      eta = std::move(next);
      before = after;
    }
    o.reward_final = before;
    outcomes[i] = o;
  });
  long steps = 0, decreases = 0, exits = 0;
  double worst = 0.0, rpp_err = 0.0;
  Json list = Json::array();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& o = outcomes[i];
    steps += o.steps;
    decreases += o.decreases;
    exits += o.domain_exit;
    worst = std::max(worst, o.max_decrease);
    rpp_err = std::max(rpp_err, o.max_rpp_error);
    list.push_back({{"case", cases[i].index},
                    {"dim", cases[i].dim},
                    {"dt", cases[i].dt},
                    {"steps", o.steps},
                    {"reward_initial", o.reward_initial},
                    {"reward_final", o.reward_final},
                    {"decreases", o.decreases},
                    {"domain_exit", o.domain_exit}});
  }
  SuiteReport r{"fitness-proportional", decreases == 0 && rpp_err <= 1e-12, Json::object()};
  r.detail["grid"] = opt.grid;
  r.detail["seed"] = opt.seed;
  r.detail["configs"] = cases.size();
  r.detail["steps_executed"] = steps;
  r.detail["violations"] = decreases;
  r.detail["max_decrease"] = worst;
  r.detail["max_rpp_target_error"] = rpp_err;
  r.detail["domain_exits"] = exits;
  r.detail["cases"] = std::move(list);
  return r;
}

// ------------------------------------------------------------- equivalence

struct Instance {
  Model model;
  Vector eta;
  Samples x;
  std::vector<double> w;
  double dt = 1.0;
};

std::vector<double> random_weights(Rng& rng, int n, double zero_fraction) {
  std::vector<double> w(static_cast<std::size_t>(n));
  double total = 0.0;
  while (total == 0.0) {
    total = 0.0;
    for (double& v : w) {
      v = uniform01(rng) < zero_fraction ? 0.0 : uniform01(rng);
      total += v;
    }
  }
  for (double& v : w) v /= total;
  return w;
}

Matrix random_spd(Rng& rng, int d) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
  }
  Matrix c = a * a.transpose() / d + 0.5 * Matrix::Identity(d, d);
  return 0.5 * (c + c.transpose());
}

Instance bernoulli_instance(Rng& rng) {
  const int d = pick(rng, 1, 8);
  const Model model = Model::bernoulli(d);
  while (true) {
    Instance in{model, random_theta(rng, d), {}, {}, 1.0 - uniform01(rng)};
    const int lambda = pick(rng, 2, 40);
    in.x = sample(model, in.eta, rng, lambda);
    in.w = random_weights(rng, lambda, 0.3);
    const Vector ml = weighted_statistic(model, in.x, in.w);
    if ((ml.array() > 0.0).all() && (ml.array() < 1.0).all()) return in;
  }
}

Instance gaussian_instance(Rng& rng) {
  static constexpr int dims[] = {1, 2, 3, 5};
  const int d = dims[rng() % 4];
  const Model model = Model::gaussian(d);
  while (true) {
    Vector m(d);
    for (int i = 0; i < d; ++i) m[i] = normal(rng);
    Instance in{model, to_expectation(GaussianParams{m, random_spd(rng, d)}), {}, {},
                1.0 - uniform01(rng)};
    const int lambda = d + 2 + pick(rng, 0, 20);
    in.x = sample(model, in.eta, rng, lambda);
    in.w = random_weights(rng, lambda, 0.0);
    try {
      (void)smoothed_ce_step(model, in.eta, in.x, in.w, 1.0);
      return in;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::domain_exit) throw;
    }
  }
}

SuiteReport equivalence(const VerifyOptions& opt) {
  const int n = opt.grid == "smoke" ? 100 : 1000;
  (void)grid_size(opt.grid, 1, 1);
  Json families = Json::object();
  bool ok = true;
  for (int fam = 0; fam < 2; ++fam) {
    Rng rng(derive_seed(opt.seed, 0xE0 + static_cast<std::uint64_t>(fam)));
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      const Instance in = fam == 0 ? bernoulli_instance(rng) : gaussian_instance(rng);
      const Vector a = igo_step(in.model, in.eta, in.x, in.w, in.dt);
      const Vector b = igo_ml_step(in.model, in.eta, in.x, in.w, in.dt);
      const Vector c = smoothed_ce_step(in.model, in.eta, in.x, in.w, in.dt);
      worst = std::max({worst, max_abs_diff(a, b), max_abs_diff(a, c), max_abs_diff(b, c)});
    }
    const bool pass = worst <= 1e-10;
    ok = ok && pass;
    families[fam == 0 ? "bernoulli" : "gaussian"] = {
        {"instances", n}, {"max_discrepancy", worst}, {"passed", pass}};
  }
  SuiteReport r{"equivalence", ok, Json::object()};
  r.detail["seed"] = opt.seed;
  r.detail["tolerance"] = 1e-10;
  r.detail["families"] = std::move(families);
  return r;
}

// ------------------------------------------------------------ cma-recovery

SuiteReport cma_recovery(const VerifyOptions& opt) {
  const int n = opt.grid == "smoke" ? 60 : 500;
  (void)grid_size(opt.grid, 1, 1);
  static constexpr int dims[] = {1, 2, 5};
  Rng rng(derive_seed(opt.seed, 0xC3A));
  double worst = 0.0;
  double worst_scaled = 0.0;
  for (int k = 0; k < n; ++k) {
    const int d = dims[k % 3];
    const Model model = Model::gaussian(d);
    Vector m(d);
    for (int i = 0; i < d; ++i) m[i] = normal(rng);
    const Matrix c = random_spd(rng, d);
    const Vector eta = to_expectation(GaussianParams{m, c});
    const int lambda = d + 1 + pick(rng, 0, 15);
    const Samples x = sample(model, eta, rng, lambda);
    const std::vector<double> w = random_weights(rng, lambda, 0.0);
    const double eta_m = 1.0 - uniform01(rng);
    const double eta_c = 1.0 - uniform01(rng);

    Vector dm = Vector::Zero(d);
    Matrix dc = Matrix::Zero(d, d);
    for (int i = 0; i < lambda; ++i) {
      const Vector y = x.row(i).transpose() - m;
      dm += w[static_cast<std::size_t>(i)] * y;
      dc += w[static_cast<std::size_t>(i)] * (y * y.transpose() - c);
    }
    const Vector m_ref = m + eta_m * dm;
    const Matrix c_ref = c + eta_c * dc;

    const double rates[2] = {eta_c, eta_m};
    const Vector out = blockwise_igo_ml_step(
        model, eta, x, w, BlockDecomposition::gaussian_cov_then_mean(d), rates);
    const GaussianParams got = gaussian_params(model, out);
    const double err = std::max((got.mean - m_ref).cwiseAbs().maxCoeff(),
                                (got.cov - c_ref).cwiseAbs().maxCoeff());
    const double scale = std::max({1.0, m_ref.cwiseAbs().maxCoeff(), c_ref.cwiseAbs().maxCoeff()});
    worst = std::max(worst, err);
    worst_scaled = std::max(worst_scaled, err / scale);
  }
  SuiteReport r{"cma-recovery", worst_scaled <= 1e-12, Json::object()};
  r.detail["seed"] = opt.seed;
  r.detail["instances"] = n;
  r.detail["dims"] = {1, 2, 5};
  r.detail["max_abs_error"] = worst;
  r.detail["max_scaled_error"] = worst_scaled;
  r.detail["tolerance"] = 1e-12;
  return r;
}

// ------------------------------------------------------------ kl-expansion

struct KlCase {
  Model model;
  Vector eta;
  Vector delta;
  int halvings;
};

std::vector<KlCase> kl_cases(std::uint64_t seed) {
  std::vector<KlCase> cases;
  const Model b1 = Model::bernoulli(1);
  cases.push_back({b1, Vector::Constant(1, 0.5), Vector::Constant(1, 0.1), 6});
  cases.push_back({b1, Vector::Constant(1, 0.5), Vector::Constant(1, 0.05), 6});
  Rng rng(derive_seed(seed, 0x6B1));
  auto direction = [&](int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    return Vector(v / v.norm());
  };
  for (int k = 0; k < 24; ++k) {
    const int d = pick(rng, 1, 6);
    const double len = 0.01 + 0.04 * uniform01(rng);
    cases.push_back({Model::bernoulli(d), random_theta(rng, d, 0.1, 0.9), len * direction(d), 6});
  }
  for (int k = 0; k < 12; ++k) {
    const int d = pick(rng, 1, 3);
    const Model g = Model::gaussian(d);
    Vector m(d);
    for (int i = 0; i < d; ++i) m[i] = 0.5 * normal(rng);
    const Vector eta = to_expectation(GaussianParams{m, random_spd(rng, d)});
    const double len = 0.01 + 0.04 * uniform01(rng);
    cases.push_back({g, eta, len * direction(g.param_size()), 5});
  }
  return cases;
}

SuiteReport kl_expansion(const VerifyOptions& opt) {
  (void)grid_size(opt.grid, 1, 1);
  const auto cases = kl_cases(opt.seed);
  int violations = 0;
  double max_ratio = 0.0;
  Json list = Json::array();
  for (const KlCase& c : cases) {
    const std::vector<double> err = check_kl_expansion(c.model, c.eta, c.delta, c.halvings);
    double case_ratio = 0.0;
    for (std::size_t k = 0; k + 1 < err.size(); ++k) {
      if (err[k + 1] > err[k] / 4.0 + 1e-12) ++violations;
      if (err[k] > 1e-10) case_ratio = std::max(case_ratio, err[k + 1] / err[k]);
    }
    max_ratio = std::max(max_ratio, case_ratio);
    list.push_back({{"family", c.model.family() == Family::bernoulli ? "bernoulli" : "gaussian"},
                    {"dim", c.model.dim()},
                    {"delta_norm", c.delta.norm()},
                    {"errors", err},
                    {"max_ratio", case_ratio}});
  }
  SuiteReport r{"kl-expansion", violations == 0, Json::object()};
  r.detail["seed"] = opt.seed;
  r.detail["cases_checked"] = cases.size();
  r.detail["violations"] = violations;
  r.detail["max_ratio"] = max_ratio;
  r.detail["cases"] = std::move(list);
  return r;
}

// -------------------------------------------------------- natural-gradient

SuiteReport natural_gradient(const VerifyOptions& opt) {
  (void)grid_size(opt.grid, 1, 1);
  Rng rng(derive_seed(opt.seed, 0x4E47));
  const int n_identity = opt.grid == "smoke" ? 50 : 400;
  double worst_rel = 0.0;
  for (int k = 0; k < n_identity; ++k) {
    const int d = pick(rng, 1, 4);
    const Model model = Model::bernoulli(d);
    const Vector eta = random_theta(rng, d);
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = static_cast<double>(rng() & 1u);
    const Vector fd = fisher_information(model, eta).ldlt().solve(fd_grad_log_density(model, eta, x));
    const Vector expected = x - eta;
    worst_rel = std::max(worst_rel, (fd - expected).norm() / expected.norm());
  }
  const int n_direction = opt.grid == "smoke" ? 8 : 40;
  static constexpr double qs[] = {0.1, 0.25, 0.5};
  double worst_angle = 0.0;
  int skipped = 0;
  for (int k = 0; k < n_direction; ++k) {
    const int d = pick(rng, 2, 6);
    std::vector<double> table(std::size_t{1} << d);
    for (double& v : table) v = uniform01(rng);
    const ExactProblem problem(d, std::move(table));
    const double angle = natural_gradient_angle(problem, random_theta(rng, d),
                                                SelectionScheme::truncation(qs[k % 3]), 1e-4);
    if (std::isnan(angle)) {
      ++skipped;
      continue;
    }
    worst_angle = std::max(worst_angle, angle);
  }
  const bool ok = worst_rel <= 1e-5 && worst_angle <= 1e-3;
  SuiteReport r{"natural-gradient", ok, Json::object()};
  r.detail["seed"] = opt.seed;
  r.detail["identity_cases"] = n_identity;
  r.detail["max_relative_error"] = worst_rel;
  r.detail["identity_tolerance"] = 1e-5;
  r.detail["direction_cases"] = n_direction;
  r.detail["direction_skipped"] = skipped;
  r.detail["max_angle_rad"] = worst_angle;
  r.detail["angle_tolerance"] = 1e-3;
  return r;
}

// ------------------------------------------------------- finite-population

SuiteReport finite_population(const VerifyOptions& opt) {
  const bool smoke = opt.grid == "smoke";
  (void)grid_size(opt.grid, 1, 1);
  AlgorithmConfig cfg;
  cfg.algorithm = AlgorithmId::pbil;
  cfg.objective = "onemax";
  cfg.dim = 8;
  cfg.lambda = smoke ? 1000 : 10000;
  cfg.q = 0.25;
  cfg.dt = 0.5;
  cfg.seed = opt.seed;
  cfg.domain_exit = DomainExitPolicy::safeguard;
  const int steps = smoke ? 20 : 50;
  const int seeds = smoke ? 3 : 10;
  const ImprovementStats s = finite_population_improvement(cfg, steps, seeds);
  SuiteReport r{"finite-population", s.improvement_rate >= 0.9, Json::object()};
  r.detail["seed"] = opt.seed;
  r.detail["dim"] = cfg.dim;
  r.detail["lambda"] = cfg.lambda;
  r.detail["q"] = cfg.q;
  r.detail["dt"] = cfg.dt;
  r.detail["steps"] = steps;
  r.detail["seeds"] = seeds;
  r.detail["steps_total"] = s.steps_total;
  r.detail["steps_improved"] = s.steps_improved;
  r.detail["steps_equal"] = s.steps_equal;
  r.detail["steps_worsened"] = s.steps_worsened;
  r.detail["improvement_rate"] = s.improvement_rate;
  r.detail["threshold"] = 0.9;
  return r;
}

using SuiteFn = SuiteReport (*)(const VerifyOptions&);

const std::vector<std::pair<std::string, SuiteFn>>& suites() {
  static const std::vector<std::pair<std::string, SuiteFn>> s = {
      {"quantile-improvement", quantile_improvement},
      {"blockwise-improvement", blockwise_improvement},
      {"fitness-proportional", fitness_proportional},
      {"progress-bound", progress_bound_suite},
      {"equivalence", equivalence},
      {"cma-recovery", cma_recovery},
      {"kl-expansion", kl_expansion},
      {"natural-gradient", natural_gradient},
      {"finite-population", finite_population},
  };
  return s;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : suites()) n.push_back(name);
    n.push_back("all");
    return n;
  }();
  return names;
}

unsigned verify_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("IGO_KIT_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min(v, 1024ul));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SuiteReport run_suite(const std::string& name, const VerifyOptions& options) {
  (void)grid_size(options.grid, 1, 1);
  if (name == "all") {
    SuiteReport all{"all", true, Json::object()};
    for (const auto& [n, fn] : suites()) {
      SuiteReport r = fn(options);
      all.passed = all.passed && r.passed;
      all.detail[n] = {{"passed", r.passed}, {"detail", std::move(r.detail)}};
    }
    return all;
  }
  for (const auto& [n, fn] : suites()) {
    if (n == name) return fn(options);
  }
  fail(ErrorCode::unknown_suite, "unknown suite '" + name + "'");
}

std::vector<QuantileCase> quantile_grid(const std::string& grid, std::uint64_t seed) {
  const GridSize size = grid_size(grid, 200, 100);
  static const char* objectives[] = {"onemax", "binval", "random-table"};
  static constexpr double qs[] = {0.1, 0.25, 0.5};
  static constexpr double dts[] = {0.1, 0.5, 1.0};
  std::vector<QuantileCase> cases;
  for (int k = 0; k < size.configs; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    QuantileCase c;
    c.index = k;
    c.dim = pick(rng, 2, 10);
    c.objective = objectives[k % 3];
    c.q = qs[(k / 3) % 3];
    c.dt = dts[(k / 9) % 3];
    c.table_seed = rng();
    c.theta0 = random_theta(rng, c.dim);
    c.steps = size.steps;
    cases.push_back(std::move(c));
  }
  return cases;
}

std::vector<BlockwiseCase> blockwise_grid(const std::string& grid, std::uint64_t seed) {
  static constexpr double rates[] = {0.1, 0.25, 0.5, 0.75, 1.0};
  std::vector<BlockwiseCase> out;
  for (QuantileCase& base : quantile_grid(grid, derive_seed(seed, 0xB10C))) {
    BlockwiseCase c;
    Rng rng(derive_seed(base.table_seed, 0xB10C));
    const int d = base.dim;
    if (base.index % 2 == 0) {
      for (int i = 0; i < d; ++i) c.groups.push_back({i});
    } else {
      for (int i = 0; i < d; i += 2) {
        c.groups.push_back(i + 1 < d ? std::vector<int>{i, i + 1} : std::vector<int>{i});
      }
    }
    for (std::size_t b = 0; b < c.groups.size(); ++b) c.dt_per_block.push_back(rates[rng() % 5]);
    c.base = std::move(base);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<RewardCase> reward_grid(const std::string& grid, std::uint64_t seed) {
  const GridSize size = grid_size(grid, 150, 100);
  static constexpr double dts[] = {0.25, 0.5, 1.0};
  std::vector<RewardCase> cases;
  for (int k = 0; k < size.configs; ++k) {
    Rng rng(derive_seed(derive_seed(seed, 0xF17), static_cast<std::uint64_t>(k)));
    RewardCase c;
    c.index = k;
    c.dim = pick(rng, 2, 10);
    c.dt = dts[k % 3];
    c.rewards.resize(std::size_t{1} << c.dim);
    bool positive = false;
    while (!positive) {
      for (double& r : c.rewards) {
        r = uniform01(rng) < 0.2 ? 0.0 : uniform01(rng);
        positive = positive || r > 0.0;
      }
    }
    c.theta0 = random_theta(rng, c.dim);
    c.steps = size.steps;
    cases.push_back(std::move(c));
  }
  return cases;
}

}  // namespace igo
