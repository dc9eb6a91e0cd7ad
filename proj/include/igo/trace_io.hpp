// SPDX-License-Identifier: Apache-2.0
#pragma once

// Trace serialization. CSV files start with the line "# igo-kit trace v1"
// followed by the header
//   step,eta_0,...,eta_{n-1},best_f,emp_quantile_q,w_entropy,kl_prev,
//   j_estimate,dt_used,elapsed_ns
// j_estimate is empty when absent. Reals use 17 significant digits.
// JSONL carries the same fields, one object per line; non-finite reals are
// written as the strings "nan", "inf" and "-inf".

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "igo/algorithms.hpp"
#include "igo/config.hpp"

namespace igo {

inline constexpr const char* kTraceVersionLine = "# igo-kit trace v1";

struct TraceRecord {
  int step = 0;
  std::vector<double> eta;
  double best_f = 0.0;
  double emp_quantile = 0.0;
  double w_entropy = 0.0;
  double kl_prev = 0.0;
  std::optional<double> j_estimate;
  double dt_used = 0.0;
  std::int64_t elapsed_ns = 0;

  /// Bitwise comparison of every real (NaN equals NaN).
  bool operator==(const TraceRecord& other) const;
};

std::vector<TraceRecord> to_records(const Trace& trace);

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records, int param_size);
void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& records);
void write_trace(std::ostream& out, const Trace& trace, TraceFormat format);

/// Throws ErrorCode::io on malformed input.
std::vector<TraceRecord> read_trace_csv(std::istream& in);
std::vector<TraceRecord> read_trace_jsonl(std::istream& in);

/// Summary JSON with stable keys: format, algorithm, objective, seed,
/// steps, final_params, best_fitness, halted, stop_reason, halt_message,
/// halvings, config.
std::string summary_json(const RunConfig& config, const Trace& trace);

}  // namespace igo
