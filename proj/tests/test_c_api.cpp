// SPDX-License-Identifier: Apache-2.0
// Exercises the shared library through its C header only.
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "igo_kit.h"

namespace {

struct ConfigDeleter {
  void operator()(igo_config* c) const { igo_config_destroy(c); }
};
struct TraceDeleter {
  void operator()(igo_trace* t) const { igo_trace_destroy(t); }
};
using ConfigPtr = std::unique_ptr<igo_config, ConfigDeleter>;
using TracePtr = std::unique_ptr<igo_trace, TraceDeleter>;

ConfigPtr make_config() {
  igo_config* c = nullptr;
  EXPECT_EQ(igo_config_create(&c), IGO_OK);
  return ConfigPtr(c);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  igo_string_free(s);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(CApi, Version) { EXPECT_STREQ(igo_version(), "1.0.0"); }

TEST(CApi, ConfigSetGetAndErrors) {
  auto cfg = make_config();
  EXPECT_EQ(igo_config_set(cfg.get(), "dim", "12"), IGO_OK);
  char* value = nullptr;
  ASSERT_EQ(igo_config_get(cfg.get(), "dim", &value), IGO_OK);
  EXPECT_EQ(take(value), "12");
  EXPECT_EQ(igo_config_set(cfg.get(), "bogus", "1"), IGO_ERR_CONFIG);
  EXPECT_NE(std::string(igo_last_error()).find("bogus"), std::string::npos);
  EXPECT_EQ(igo_config_get(cfg.get(), "bogus", &value), IGO_ERR_CONFIG);
  EXPECT_EQ(igo_config_set(nullptr, "dim", "3"), IGO_ERR_INVALID_INPUT);
  EXPECT_EQ(igo_config_set(cfg.get(), "dt", "1.5"), IGO_OK);
  EXPECT_EQ(igo_config_validate(cfg.get()), IGO_ERR_CONFIG);
  EXPECT_NE(std::string(igo_last_error()).find("dt <= 1"), std::string::npos);
  EXPECT_EQ(igo_config_load_file(cfg.get(), "/nonexistent/x.cfg"), IGO_ERR_IO);
}

TEST(CApi, EffectiveConfigRoundTrip) {
  auto cfg = make_config();
  ASSERT_EQ(igo_config_load_text(cfg.get(), "algo=ce_ml\ndim=9\nq=0.2\nseed=31\n"), IGO_OK);
  char* text = nullptr;
  ASSERT_EQ(igo_config_effective(cfg.get(), &text), IGO_OK);
  const std::string first = take(text);
  auto back = make_config();
  ASSERT_EQ(igo_config_load_text(back.get(), first.c_str()), IGO_OK);
  ASSERT_EQ(igo_config_effective(back.get(), &text), IGO_OK);
  EXPECT_EQ(take(text), first);
}

TEST(CApi, RunAndInspectTrace) {
  auto cfg = make_config();
  ASSERT_EQ(igo_config_load_text(cfg.get(), "dim=6\nlambda=40\nsteps=20\nseed=5\n"), IGO_OK);
  igo_trace* raw = nullptr;
  ASSERT_EQ(igo_run(cfg.get(), &raw), IGO_OK);
  TracePtr trace(raw);
  EXPECT_EQ(igo_trace_length(trace.get()), 20u);
  EXPECT_EQ(igo_trace_param_size(trace.get()), 6u);
  EXPECT_EQ(igo_trace_halted(trace.get()), 0);
  std::vector<double> fin(6), last(6);
  ASSERT_EQ(igo_trace_final_params(trace.get(), fin.data(), fin.size()), IGO_OK);
  ASSERT_EQ(igo_trace_row_params(trace.get(), 19, last.data(), last.size()), IGO_OK);
  EXPECT_EQ(fin, last);
  for (double v : fin) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(igo_trace_final_params(trace.get(), fin.data(), 3), IGO_ERR_INVALID_INPUT);
  EXPECT_EQ(igo_trace_row_params(trace.get(), 20, last.data(), last.size()), IGO_ERR_INVALID_INPUT);
  char* summary = nullptr;
  ASSERT_EQ(igo_trace_summary_json(trace.get(), &summary), IGO_OK);
  const std::string s = take(summary);
  EXPECT_NE(s.find("\"final_params\""), std::string::npos);
  EXPECT_NE(s.find("\"stop_reason\": \"max_steps\""), std::string::npos);
}

TEST(CApi, HaltIsReportedNotFailed) {
  auto cfg = make_config();
  ASSERT_EQ(igo_config_load_text(cfg.get(), "dim=2\nlambda=4\ndt=1\nsteps=50\ndomain-exit=halt\n"), IGO_OK);
  igo_trace* raw = nullptr;
  ASSERT_EQ(igo_run(cfg.get(), &raw), IGO_OK);
  TracePtr trace(raw);
  EXPECT_EQ(igo_trace_halted(trace.get()), 1);
  EXPECT_LT(igo_trace_length(trace.get()), 50u);
}

TEST(CApi, RunRejectsInvalidConfig) {
  auto cfg = make_config();
  ASSERT_EQ(igo_config_set(cfg.get(), "objective", "sphere"), IGO_OK);
  igo_trace* raw = nullptr;
  EXPECT_EQ(igo_run(cfg.get(), &raw), IGO_ERR_CONFIG);
  EXPECT_EQ(raw, nullptr);
}

TEST(CApi, WriteIsDeterministic) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = dir / "igo_kit_capi_a.csv";
  const auto b = dir / "igo_kit_capi_b.csv";
  const auto j = dir / "igo_kit_capi.jsonl";
  auto cfg = make_config();
  ASSERT_EQ(igo_config_load_text(cfg.get(), "dim=8\nlambda=30\nsteps=15\nseed=11\n"), IGO_OK);
  for (const auto& path : {a, b}) {
    igo_trace* raw = nullptr;
    ASSERT_EQ(igo_run(cfg.get(), &raw), IGO_OK);
    TracePtr trace(raw);
    ASSERT_EQ(igo_trace_write(trace.get(), path.c_str(), nullptr), IGO_OK);
    if (path == a) ASSERT_EQ(igo_trace_write(trace.get(), j.c_str(), "jsonl"), IGO_OK);
  }
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a).rfind("# igo-kit trace v1\n", 0), 0u);
  EXPECT_EQ(slurp(j).front(), '{');
  igo_trace* raw = nullptr;
  ASSERT_EQ(igo_run(cfg.get(), &raw), IGO_OK);
  TracePtr trace(raw);
  EXPECT_EQ(igo_trace_write(trace.get(), a.c_str(), "xml"), IGO_ERR_CONFIG);
  EXPECT_EQ(igo_trace_write(trace.get(), "/nonexistent/dir/t.csv", nullptr), IGO_ERR_IO);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
  std::filesystem::remove(j);
}

TEST(CApi, Verify) {
  int passed = 0;
  char* report = nullptr;
  ASSERT_EQ(igo_verify("equivalence", "smoke", 1, 1, &passed, &report), IGO_OK);
  EXPECT_EQ(passed, 1);
  EXPECT_NE(take(report).find("\"suite\""), std::string::npos);
  EXPECT_EQ(igo_verify("nope", nullptr, 1, 0, &passed, &report), IGO_ERR_UNKNOWN_SUITE);
}

TEST(CApi, Weights) {
  const double f[4] = {1, 2, 2, 3};
  double w[4];
  ASSERT_EQ(igo_sample_weights(f, 4, 0.5, w), IGO_OK);
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_DOUBLE_EQ(w[1], 0.25);
  EXPECT_DOUBLE_EQ(w[2], 0.25);
  EXPECT_DOUBLE_EQ(w[3], 0.0);
  double bar[3];
  ASSERT_EQ(igo_bar_weights(3, 0.5, bar), IGO_OK);
  EXPECT_NEAR(bar[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(bar[1], 1.0 / 3, 1e-15);
  EXPECT_EQ(bar[2], 0.0);
  EXPECT_EQ(igo_bar_weights(3, 1.0, bar), IGO_ERR_INVALID_INPUT);
  const double bad[2] = {1, NAN};
  EXPECT_EQ(igo_sample_weights(bad, 2, 0.5, w), IGO_ERR_INVALID_INPUT);
}

}  // namespace
