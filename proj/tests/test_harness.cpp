// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "igo/config.hpp"
#include "igo/error.hpp"
#include "igo/trace_io.hpp"
#include "igo/verify.hpp"

namespace {

std::optional<igo::ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const igo::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const igo::Error& e) {
    return e.what();
  }
  return {};
}

TEST(Config, Defaults) {
  igo::RunConfig cfg;
  EXPECT_EQ(cfg.algo.domain_exit, igo::DomainExitPolicy::safeguard);
  EXPECT_EQ(cfg.format, igo::TraceFormat::csv);
  EXPECT_TRUE(cfg.summary_path().empty());
  cfg.out = "t.csv";
  EXPECT_EQ(cfg.summary_path(), "t.csv.summary.json");
  cfg.summary = "s.json";
  EXPECT_EQ(cfg.summary_path(), "s.json");
}

TEST(Config, TextWithCommentsAndBlankLines) {
  igo::RunConfig cfg;
  igo::apply_config_text(cfg,
                         "# a run\n"
                         "algo = cma_rank_mu\n"
                         "\n"
                         "objective=sphere   # inline comment\n"
                         "dim=3\n"
                         "dt-m=0.75\n"
                         "dt-c = 0.25\n"
                         "seed=12345678901234\n"
                         "target=1e-8\n"
                         "format=jsonl\n");
  EXPECT_EQ(cfg.algo.algorithm, igo::AlgorithmId::cma_rank_mu);
  EXPECT_EQ(cfg.algo.objective, "sphere");
  EXPECT_EQ(cfg.algo.dim, 3);
  EXPECT_EQ(cfg.algo.dt_m, 0.75);
  EXPECT_EQ(cfg.algo.dt_c, 0.25);
  EXPECT_EQ(cfg.algo.seed, 12345678901234u);
  ASSERT_TRUE(cfg.algo.target.has_value());
  EXPECT_EQ(*cfg.algo.target, 1e-8);
  EXPECT_EQ(cfg.format, igo::TraceFormat::jsonl);
}

TEST(Config, UnknownKeyRejectedWithLineNumber) {
  igo::RunConfig cfg;
  const std::string msg = error_text([&] { igo::apply_config_text(cfg, "dim=4\nlamda=10\n", "run.cfg"); });
  EXPECT_NE(msg.find("lamda"), std::string::npos) << msg;
  EXPECT_NE(msg.find("run.cfg:2"), std::string::npos) << msg;
  EXPECT_EQ(code_of([&] { igo::apply_setting(cfg, "nope", "1"); }), igo::ErrorCode::config);
}

TEST(Config, MalformedValuesRejected) {
  igo::RunConfig cfg;
  for (auto [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"dim", "four"}, {"dim", "4.5"}, {"q", "abc"}, {"algo", "cma"}, {"format", "xml"},
           {"domain-exit", "clamp"}, {"uncertified", "maybe"}, {"seed", "-1"}, {"weights", "0.5,x"}}) {
    EXPECT_EQ(code_of([&] { igo::apply_setting(cfg, k, v); }), igo::ErrorCode::config) << k << "=" << v;
  }
  EXPECT_EQ(code_of([&] { igo::apply_config_text(cfg, "dim 4\n"); }), igo::ErrorCode::config);
}

TEST(Config, MissingFileIsIoError) {
  igo::RunConfig cfg;
  EXPECT_EQ(code_of([&] { igo::apply_config_file(cfg, "/nonexistent/run.cfg"); }), igo::ErrorCode::io);
}

TEST(Config, LaterSettingsOverrideFile) {
  const auto path = std::filesystem::temp_directory_path() / "igo_kit_precedence.cfg";
  {
    std::ofstream(path) << "dim=7\nlambda=30\nq=0.1\n";
  }
  igo::RunConfig cfg;
  igo::apply_config_file(cfg, path.string());
  igo::apply_setting(cfg, "lambda", "55");
  EXPECT_EQ(cfg.algo.dim, 7);
  EXPECT_EQ(cfg.algo.lambda, 55);
  EXPECT_EQ(cfg.algo.q, 0.1);
  std::filesystem::remove(path);
}

TEST(Config, EffectiveConfigEchoesBack) {
  igo::RunConfig cfg;
  igo::apply_config_text(cfg,
                         "algo=rpp\nobjective=reward-table\ndim=6\nlambda=17\nq=0.3\ndt=0.1\n"
                         "steps=9\nseed=4\ntable-seed=99\ntarget=0.75\ndomain-exit=halt\nuncertified=true\n"
                         "init-prob=0.3\ninit-mean=-2.5\ninit-var=0.1\nrpp-mode=exact\ntiming=true\n"
                         "out=a.jsonl\nsummary=b.json\nformat=jsonl\nverbosity=2\nweights=0.5,0.3,0.2\n");
  cfg.algo.dt_c = 0.1 + 0.2;  // not exactly representable as a short decimal
  const std::string text = igo::effective_config(cfg);
  igo::RunConfig back;
  igo::apply_config_text(back, text, "echo");
  EXPECT_EQ(igo::effective_config(back), text);
  EXPECT_EQ(back.algo.dt_c, cfg.algo.dt_c);
  EXPECT_EQ(back.algo.weights, cfg.algo.weights);
  EXPECT_EQ(back.algo.target, cfg.algo.target);
  EXPECT_EQ(back.algo.rpp_mode, igo::RppMode::exact);
  EXPECT_EQ(back.out, "a.jsonl");
  EXPECT_EQ(back.verbosity, 2);
  for (const auto& key : igo::config_keys()) {
    EXPECT_NE(text.find(key + "="), std::string::npos) << key;
  }
}

TEST(Config, ValidateRejectsBadRun) {
  igo::RunConfig cfg;
  cfg.algo.dt = 1.5;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), igo::ErrorCode::config);
  cfg.algo.uncertified = true;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(FormatReal, RoundTripsExactly) {
  igo::Rng rng(1);
  for (int k = 0; k < 10000; ++k) {
    const std::uint64_t bits = rng();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    double back = 0;
    ASSERT_TRUE(igo::parse_real(igo::format_real(v), back));
    EXPECT_EQ(std::memcmp(&v, &back, sizeof v), 0);
  }
  EXPECT_EQ(igo::format_real(0.5), "0.5");
  EXPECT_EQ(igo::format_real(1.5), "1.5");
  double x;
  EXPECT_FALSE(igo::parse_real("1.5x", x));
  EXPECT_FALSE(igo::parse_real("", x));
}

igo::Trace sample_trace() {
  igo::AlgorithmConfig cfg;
  cfg.dim = 5;
  cfg.lambda = 20;
  cfg.max_steps = 15;
  cfg.exact_j = true;
  cfg.record_timing = true;
  cfg.domain_exit = igo::DomainExitPolicy::safeguard;
  return igo::run(cfg);
}

TEST(TraceIo, CsvRoundTrip) {
  const auto trace = sample_trace();
  auto records = igo::to_records(trace);
  records[0].emp_quantile = std::numeric_limits<double>::quiet_NaN();
  records[1].j_estimate.reset();
  records[2].best_f = -std::numeric_limits<double>::infinity();
  std::stringstream ss;
  igo::write_trace_csv(ss, records, 5);
  const std::string text = ss.str();
  EXPECT_EQ(text.rfind(std::string(igo::kTraceVersionLine) + "\n", 0), 0u);
  EXPECT_NE(text.find("step,eta_0,eta_1,eta_2,eta_3,eta_4,best_f,emp_quantile_q,w_entropy,kl_prev,"
                      "j_estimate,dt_used,elapsed_ns\n"),
            std::string::npos);
  std::istringstream in(text);
  EXPECT_EQ(igo::read_trace_csv(in), records);
}

TEST(TraceIo, JsonlRoundTrip) {
  auto records = igo::to_records(sample_trace());
  records[0].kl_prev = std::numeric_limits<double>::infinity();
  records[3].emp_quantile = std::numeric_limits<double>::quiet_NaN();
  std::stringstream ss;
  igo::write_trace_jsonl(ss, records);
  std::istringstream in(ss.str());
  EXPECT_EQ(igo::read_trace_jsonl(in), records);
  std::string first;
  std::istringstream lines(ss.str());
  std::getline(lines, first);
  const auto obj = nlohmann::json::parse(first);
  EXPECT_EQ(obj.at("step"), 1);
  EXPECT_EQ(obj.at("kl_prev"), "inf");
}

TEST(TraceIo, RejectsMalformedCsv) {
  std::istringstream no_version("step,best_f\n1,2\n");
  EXPECT_EQ(code_of([&] { igo::read_trace_csv(no_version); }), igo::ErrorCode::io);
  std::ostringstream ss;
  igo::write_trace_csv(ss, igo::to_records(sample_trace()), 5);
  std::string text = ss.str();
  text += "16,1,2\n";
  std::istringstream short_row(text);
  EXPECT_EQ(code_of([&] { igo::read_trace_csv(short_row); }), igo::ErrorCode::io);
}

TEST(TraceIo, SummaryHasStableKeys) {
  igo::RunConfig cfg;
  cfg.algo.dim = 5;
  const auto trace = sample_trace();
  const auto summary = nlohmann::ordered_json::parse(igo::summary_json(cfg, trace));
  std::vector<std::string> keys;
  for (const auto& item : summary.items()) keys.push_back(item.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"format", "algorithm", "objective", "seed", "steps",
                                            "final_params", "best_fitness", "halted", "stop_reason",
                                            "halt_message", "halvings", "config"}));
  EXPECT_EQ(summary.at("steps"), trace.rows.size());
  EXPECT_EQ(summary.at("final_params").size(), 5u);
  std::string echoed;
  for (const auto& item : summary.at("config").items()) {
    echoed += item.key() + "=" + item.value().get<std::string>() + "\n";
  }
  igo::RunConfig back;
  igo::apply_config_text(back, echoed);
  EXPECT_EQ(igo::effective_config(back), igo::effective_config(cfg));
}

TEST(Verify, SuiteRegistry) {
  const auto& names = igo::suite_names();
  ASSERT_FALSE(names.empty());
  EXPECT_EQ(names.back(), "all");
  EXPECT_EQ(code_of([] { igo::run_suite("no-such-suite"); }), igo::ErrorCode::unknown_suite);
  igo::VerifyOptions opt;
  opt.grid = "huge";
  EXPECT_EQ(code_of([&] { igo::run_suite("equivalence", opt); }), igo::ErrorCode::config);
}

TEST(Verify, SmokeGridsPass) {
  igo::VerifyOptions opt;
  opt.grid = "smoke";
  for (const auto& name : igo::suite_names()) {
    if (name == "all") continue;
    const auto report = igo::run_suite(name, opt);
    EXPECT_TRUE(report.passed) << name << ": " << report.detail.dump();
  }
}

TEST(Verify, ThreadCountDoesNotChangeReports) {
  igo::VerifyOptions one, four;
  one.grid = four.grid = "smoke";
  one.threads = 1;
  four.threads = 4;
  for (const char* name : {"quantile-improvement", "fitness-proportional"}) {
    EXPECT_EQ(igo::run_suite(name, one).detail.dump(), igo::run_suite(name, four).detail.dump()) << name;
  }
}

TEST(Verify, GridGenerationIsSeeded) {
  const auto a = igo::quantile_grid("small", 1);
  const auto b = igo::quantile_grid("small", 1);
  ASSERT_EQ(a.size(), 200u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].theta0, b[i].theta0);
    EXPECT_GE(a[i].dim, 2);
    EXPECT_LE(a[i].dim, 10);
    EXPECT_EQ(a[i].steps, 100);
  }
  EXPECT_NE(igo::quantile_grid("small", 2)[0].theta0, a[0].theta0);
}

}  // namespace
