// SPDX-License-Identifier: Apache-2.0
#include "igo/trace_io.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "igo/error.hpp"

namespace igo {

namespace {

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b) ||
         (std::isnan(a) && std::isnan(b));
}

std::string json_real(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  return format_real(v);
}

double real_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::io, std::string("trace line lacks '") + key + "'");
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) {
    double v = 0.0;
    if (parse_real(it->get<std::string>(), v)) return v;
  }
  fail(ErrorCode::io, std::string("trace field '") + key + "' is not a number");
}

double csv_real(const std::string& cell, int line) {
  double v = 0.0;
  if (!parse_real(cell, v)) {
    fail(ErrorCode::io, "trace line " + std::to_string(line) + ": bad number '" + cell + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

constexpr int kTailColumns = 7;  // best_f .. elapsed_ns

}  // namespace

bool TraceRecord::operator==(const TraceRecord& o) const {
  if (step != o.step || eta.size() != o.eta.size() || elapsed_ns != o.elapsed_ns) return false;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!same_bits(eta[i], o.eta[i])) return false;
  }
  if (j_estimate.has_value() != o.j_estimate.has_value()) return false;
  if (j_estimate && !same_bits(*j_estimate, *o.j_estimate)) return false;
  return same_bits(best_f, o.best_f) && same_bits(emp_quantile, o.emp_quantile) &&
         same_bits(w_entropy, o.w_entropy) && same_bits(kl_prev, o.kl_prev) &&
         same_bits(dt_used, o.dt_used);
}

std::vector<TraceRecord> to_records(const Trace& trace) {
  std::vector<TraceRecord> out;
  out.reserve(trace.rows.size());
  for (const TraceRow& r : trace.rows) {
    TraceRecord rec;
    rec.step = r.step;
    rec.eta.assign(r.eta.data(), r.eta.data() + r.eta.size());
    rec.best_f = r.best;
    rec.emp_quantile = r.emp_quantile;
    rec.w_entropy = r.w_entropy;
    rec.kl_prev = r.kl_prev;
    rec.j_estimate = r.j_estimate;
    rec.dt_used = r.dt_used;
    rec.elapsed_ns = r.elapsed_ns;
    out.push_back(std::move(rec));
  }
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records, int param_size) {
  std::string text = std::string(kTraceVersionLine) + "\nstep";
  for (int i = 0; i < param_size; ++i) text += ",eta_" + std::to_string(i);
  text += ",best_f,emp_quantile_q,w_entropy,kl_prev,j_estimate,dt_used,elapsed_ns\n";
  out << text;
  for (const TraceRecord& r : records) {
    std::string line = std::to_string(r.step);
    for (double v : r.eta) line += "," + format_real(v);
    line += "," + format_real(r.best_f) + "," + format_real(r.emp_quantile) + "," +
            format_real(r.w_entropy) + "," + format_real(r.kl_prev) + "," +
            (r.j_estimate ? format_real(*r.j_estimate) : std::string()) + "," +
            format_real(r.dt_used) + "," + std::to_string(r.elapsed_ns) + "\n";
    out << line;
  }
}

void write_trace_jsonl(std::ostream& out, const std::vector<TraceRecord>& records) {
  for (const TraceRecord& r : records) {
    std::string line = "{\"step\":" + std::to_string(r.step) + ",\"eta\":[";
    for (std::size_t i = 0; i < r.eta.size(); ++i) {
      if (i) line += ',';
      line += json_real(r.eta[i]);
    }
    line += "],\"best_f\":" + json_real(r.best_f) + ",\"emp_quantile_q\":" +
            json_real(r.emp_quantile) + ",\"w_entropy\":" + json_real(r.w_entropy) +
            ",\"kl_prev\":" + json_real(r.kl_prev) + ",\"j_estimate\":" +
            (r.j_estimate ? json_real(*r.j_estimate) : std::string("null")) +
            ",\"dt_used\":" + json_real(r.dt_used) +
            ",\"elapsed_ns\":" + std::to_string(r.elapsed_ns) + "}\n";
    out << line;
  }
}

void write_trace(std::ostream& out, const Trace& trace, TraceFormat format) {
  const std::vector<TraceRecord> records = to_records(trace);
  if (format == TraceFormat::jsonl) {
    write_trace_jsonl(out, records);
  } else {
    write_trace_csv(out, records, static_cast<int>(trace.initial_eta.size()));
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceVersionLine) {
    fail(ErrorCode::io, "trace does not start with '" + std::string(kTraceVersionLine) + "'");
  }
  if (!std::getline(in, line)) fail(ErrorCode::io, "trace lacks a header line");
  const std::vector<std::string> header = split(line);
  const int columns = static_cast<int>(header.size());
  const int params = columns - 1 - kTailColumns;
  if (params < 0 || header.front() != "step" || header.back() != "elapsed_ns") {
    fail(ErrorCode::io, "unrecognized trace header");
  }
  std::vector<TraceRecord> out;
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (static_cast<int>(cells.size()) != columns) {
      fail(ErrorCode::io, "trace line " + std::to_string(line_no) + " has the wrong column count");
    }
    TraceRecord r;
    try {
      r.step = std::stoi(cells[0]);
      r.elapsed_ns = std::stoll(cells.back());
    } catch (const std::exception&) {
      fail(ErrorCode::io, "trace line " + std::to_string(line_no) + ": bad integer");
    }
    for (int i = 0; i < params; ++i) r.eta.push_back(csv_real(cells[1 + i], line_no));
    std::size_t c = 1 + static_cast<std::size_t>(params);
    r.best_f = csv_real(cells[c++], line_no);
    r.emp_quantile = csv_real(cells[c++], line_no);
    r.w_entropy = csv_real(cells[c++], line_no);
    r.kl_prev = csv_real(cells[c++], line_no);
    if (!cells[c].empty()) r.j_estimate = csv_real(cells[c], line_no);
    ++c;
    r.dt_used = csv_real(cells[c], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TraceRecord> read_trace_jsonl(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::io, std::string("bad trace line: ") + e.what());
    }
    TraceRecord r;
    try {
      r.step = j.at("step").get<int>();
      r.elapsed_ns = j.at("elapsed_ns").get<std::int64_t>();
      for (const auto& v : j.at("eta")) {
        nlohmann::json wrap = {{"v", v}};
        r.eta.push_back(real_field(wrap, "v"));
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::io, std::string("bad trace line: ") + e.what());
    }
    r.best_f = real_field(j, "best_f");
    r.emp_quantile = real_field(j, "emp_quantile_q");
    r.w_entropy = real_field(j, "w_entropy");
    r.kl_prev = real_field(j, "kl_prev");
    if (j.contains("j_estimate") && !j["j_estimate"].is_null()) {
      r.j_estimate = real_field(j, "j_estimate");
    }
    r.dt_used = real_field(j, "dt_used");
    out.push_back(std::move(r));
  }
  return out;
}

std::string summary_json(const RunConfig& config, const Trace& trace) {
  nlohmann::ordered_json s;
  s["format"] = "igo-kit summary v1";
  s["algorithm"] = to_string(config.algo.algorithm);
  s["objective"] = config.algo.objective;
  s["seed"] = config.algo.seed;
  s["steps"] = trace.rows.size();
  auto& params = s["final_params"] = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < trace.final_eta.size(); ++i) params.push_back(trace.final_eta[i]);
  s["best_fitness"] = trace.best ? nlohmann::ordered_json(*trace.best) : nlohmann::ordered_json();
  s["halted"] = trace.halted;
  s["stop_reason"] = trace.stop_reason;
  s["halt_message"] = trace.halt_message;
  s["halvings"] = trace.halvings;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  std::istringstream lines(effective_config(config));
  std::string line;
  while (std::getline(lines, line)) {
    const std::size_t eq = line.find('=');
    cfg[line.substr(0, eq)] = line.substr(eq + 1);
  }
  s["config"] = std::move(cfg);
  return s.dump(2) + "\n";
}

}  // namespace igo
