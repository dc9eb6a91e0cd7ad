// SPDX-License-Identifier: Apache-2.0
#pragma once

// Run configuration: flat key=value files, one pair per line, '#' comments.
// Keys match the long CLI flags without the leading dashes.

#include <string>
#include <string_view>
#include <vector>

#include "igo/algorithms.hpp"

namespace igo {

enum class TraceFormat { csv, jsonl };

struct RunConfig {
  RunConfig();

  AlgorithmConfig algo;  // harness default: safeguarded domain exits
  std::string out;       // trace path; empty writes no trace
  std::string summary;   // summary path; empty derives "<out>.summary.json"
  TraceFormat format = TraceFormat::csv;
  int verbosity = 0;

  /// Throws ErrorCode::config naming the offending key.
  void validate() const;
  /// Summary path actually used (may be empty when out is empty).
  std::string summary_path() const;
};

/// Every accepted key, in the order effective_config prints them.
const std::vector<std::string>& config_keys();

/// Sets one key. Unknown keys and malformed values throw ErrorCode::config.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Applies every pair in `text`; `source` prefixes error messages.
void apply_config_text(RunConfig& config, std::string_view text,
                       const std::string& source = "config");
/// Reads and applies a config file; missing files throw ErrorCode::io.
void apply_config_file(RunConfig& config, const std::string& path);

/// One key=value line per key, parseable by apply_config_text.
std::string effective_config(const RunConfig& config);

/// Shortest decimal form with 17 significant digits; round-trips exactly.
std::string format_real(double value);
/// Parses the output of format_real (and ordinary decimal input).
bool parse_real(std::string_view text, double& value);

}  // namespace igo
