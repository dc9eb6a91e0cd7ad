// SPDX-License-Identifier: Apache-2.0
// igo-kit: run IGO-family optimizers and the verification suites.
//
// Exit codes: 0 success, 1 failed verification or runtime error,
// 2 configuration error or unknown suite, 3 run halted by a domain exit.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "igo_kit.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitHalted = 3;

struct ConfigDeleter {
  void operator()(igo_config* c) const { igo_config_destroy(c); }
};
struct TraceDeleter {
  void operator()(igo_trace* t) const { igo_trace_destroy(t); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  igo_string_free(s);
  return out;
}

int report(igo_status status, const std::string& context) {
  std::cerr << "igo-kit: " << context << ": " << igo_last_error() << "\n";
  return status == IGO_ERR_CONFIG || status == IGO_ERR_UNKNOWN_SUITE ? kExitConfig : kExitFailure;
}

// Flags that map one-to-one onto config keys, in application order.
const std::vector<std::pair<std::string, std::string>> kKeyFlags = {
    {"algo", "pbil | cma_rank_mu | ce_ml | rpp | igo_generic"},
    {"objective", "onemax | binval | leadingones | random-table | onemax-reward | reward-table | "
                  "sphere | ellipsoid"},
    {"dim", "search-space dimension"},
    {"lambda", "population size"},
    {"q", "truncation quantile in (0, 1)"},
    {"weights", "comma-separated tabulated rank weights (overrides --q)"},
    {"dt", "step size"},
    {"dt-m", "mean rate for cma_rank_mu"},
    {"dt-c", "covariance rate for cma_rank_mu"},
    {"steps", "maximum number of iterations"},
    {"seed", "random seed"},
    {"table-seed", "seed of random-table and reward-table objectives"},
    {"target", "stop once the best sampled value reaches this (or 'none')"},
    {"domain-exit", "halt | safeguard"},
    {"init-prob", "initial Bernoulli probability"},
    {"init-mean", "initial Gaussian mean (all coordinates)"},
    {"init-var", "initial Gaussian variance (isotropic)"},
    {"rpp-mode", "sample | exact"},
    {"out", "trace output path"},
    {"summary", "summary JSON path (default <out>.summary.json)"},
    {"format", "csv | jsonl"},
    {"verbosity", "0 quiet, 1 echo the effective config to stderr"},
};

int run_command(const std::string& config_file,
                const std::vector<std::pair<std::string, std::optional<std::string>>>& flags,
                bool uncertified, bool timing, bool j_estimate, bool print_config) {
  igo_config* raw = nullptr;
  if (igo_status s = igo_config_create(&raw); s != IGO_OK) return report(s, "config");
  std::unique_ptr<igo_config, ConfigDeleter> cfg(raw);

  if (!config_file.empty()) {
    if (igo_status s = igo_config_load_file(cfg.get(), config_file.c_str()); s != IGO_OK) {
      return report(s == IGO_ERR_IO ? IGO_ERR_CONFIG : s, "config file");
    }
  }
  for (const auto& [key, value] : flags) {
    if (!value) continue;
    if (igo_status s = igo_config_set(cfg.get(), key.c_str(), value->c_str()); s != IGO_OK) {
      return report(s, "--" + key);
    }
  }
  if (uncertified) igo_config_set(cfg.get(), "uncertified", "true");
  if (timing) igo_config_set(cfg.get(), "timing", "true");
  if (j_estimate) igo_config_set(cfg.get(), "j-estimate", "true");

  if (igo_status s = igo_config_validate(cfg.get()); s != IGO_OK) return report(s, "config");

  char* text = nullptr;
  igo_config_effective(cfg.get(), &text);
  const std::string effective = take(text);
  char* verbosity = nullptr;
  igo_config_get(cfg.get(), "verbosity", &verbosity);
  if (print_config) {
    std::cout << effective;
    igo_string_free(verbosity);
    return 0;
  }
  if (take(verbosity) != "0") std::cerr << "# effective config\n" << effective;

  igo_trace* traw = nullptr;
  if (igo_status s = igo_run(cfg.get(), &traw); s != IGO_OK) return report(s, "run");
  std::unique_ptr<igo_trace, TraceDeleter> trace(traw);

  char* out_raw = nullptr;
  char* summary_raw = nullptr;
  igo_config_get(cfg.get(), "out", &out_raw);
  igo_config_get(cfg.get(), "summary", &summary_raw);
  const std::string out = take(out_raw);
  std::string summary_path = take(summary_raw);
  if (summary_path.empty() && !out.empty()) summary_path = out + ".summary.json";

  char* summary_text = nullptr;
  if (igo_status s = igo_trace_summary_json(trace.get(), &summary_text); s != IGO_OK) {
    return report(s, "summary");
  }
  const std::string summary = take(summary_text);
  if (!out.empty()) {
    if (igo_status s = igo_trace_write(trace.get(), out.c_str(), nullptr); s != IGO_OK) {
      return report(s, "trace");
    }
  }
  if (!summary_path.empty()) {
    std::ofstream f(summary_path, std::ios::binary | std::ios::trunc);
    f << summary;
    if (!f) {
      std::cerr << "igo-kit: cannot write summary '" << summary_path << "'\n";
      return kExitFailure;
    }
  } else {
    std::cout << summary;
  }
  if (igo_trace_halted(trace.get())) {
    std::cerr << "igo-kit: run halted by a domain exit after " << igo_trace_length(trace.get())
              << " steps (use --domain-exit safeguard to retry with smaller steps)\n";
    return kExitHalted;
  }
  return 0;
}

int verify_command(const std::string& suite, const std::string& grid, std::uint64_t seed,
                   unsigned threads, const std::string& out) {
  int passed = 0;
  char* report_raw = nullptr;
  if (igo_status s = igo_verify(suite.c_str(), grid.c_str(), seed, threads, &passed, &report_raw);
      s != IGO_OK) {
    return report(s, "verify");
  }
  const std::string text = take(report_raw);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) {
      std::cerr << "igo-kit: cannot write report '" << out << "'\n";
      return kExitFailure;
    }
  }
  std::cerr << suite << ": " << (passed ? "PASS" : "FAIL") << "\n";
  return passed ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information-geometric optimization toolkit", "igo-kit"};
  app.set_version_flag("--version", std::string(igo_version()));
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run an optimizer and write its trace");
  std::string config_file;
  run->add_option("--config", config_file, "key=value config file; flags override its keys");
  std::vector<std::pair<std::string, std::optional<std::string>>> flags;
  flags.reserve(kKeyFlags.size());
  for (const auto& [key, help] : kKeyFlags) flags.emplace_back(key, std::nullopt);
  for (std::size_t i = 0; i < kKeyFlags.size(); ++i) {
    run->add_option("--" + kKeyFlags[i].first, flags[i].second, kKeyFlags[i].second);
  }
  bool uncertified = false, timing = false, j_estimate = false, print_config = false;
  run->add_flag("--uncertified", uncertified, "allow step sizes above 1");
  run->add_flag("--timing", timing, "record wall-clock time per step (breaks byte-identity)");
  run->add_flag("--j-estimate", j_estimate, "record exact J per step (binary, dim <= 16)");
  run->add_flag("--print-config", print_config, "print the effective config and exit");

  CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suite;
  std::string grid = "small";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string report_out;
  verify
      ->add_option("suite", suite,
                   "quantile-improvement | blockwise-improvement | fitness-proportional | "
                   "progress-bound | equivalence | cma-recovery | kl-expansion | "
                   "natural-gradient | finite-population | all")
      ->required();
  verify->add_option("--grid", grid, "small | smoke");
  verify->add_option("--seed", seed, "grid seed");
  verify->add_option("--threads", threads, "worker threads (default IGO_KIT_THREADS)");
  verify->add_option("--out", report_out, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    (void)app.exit(e);
    return kExitConfig;
  }

  if (run->parsed()) {
    return run_command(config_file, flags, uncertified, timing, j_estimate, print_config);
  }
  return verify_command(suite, grid, seed, threads, report_out);
}
