// SPDX-License-Identifier: Apache-2.0
#include "igo/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "igo/error.hpp"

namespace igo {

namespace {

std::string_view trim(std::string_view s) {
  const auto issp = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && issp(s.front())) s.remove_prefix(1);
  while (!s.empty() && issp(s.back())) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  fail(ErrorCode::config, key + ": invalid value '" + value + "' (expected " + expected + ")");
}

template <class Int>
Int to_int(const std::string& key, const std::string& value) {
  Int out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "an integer");
  return out;
}

double to_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  if (!parse_real(value, out)) bad_value(key, value, "a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false");
}

std::vector<double> to_reals(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string_view rest = trim(value);
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string item(trim(rest.substr(0, comma)));
    out.push_back(to_real(key, item));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  std::string name;
  Setter set;
  Getter get;
};

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = {
      {"algo",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const auto id = parse_algorithm(v);
         if (!id) bad_value(k, v, "pbil, cma_rank_mu, ce_ml, rpp or igo_generic");
         c.algo.algorithm = *id;
       },
       [](const RunConfig& c) { return std::string(to_string(c.algo.algorithm)); }},
      {"objective",
       [](RunConfig& c, const std::string&, const std::string& v) { c.algo.objective = v; },
       [](const RunConfig& c) { return c.algo.objective; }},
      {"dim",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.dim = to_int<int>(k, v); },
       [](const RunConfig& c) { return std::to_string(c.algo.dim); }},
      {"lambda",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.lambda = to_int<int>(k, v); },
       [](const RunConfig& c) { return std::to_string(c.algo.lambda); }},
      {"q",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.q = to_real(k, v); },
       [](const RunConfig& c) { return format_real(c.algo.q); }},
      {"weights",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.weights = to_reals(k, v); },
       [](const RunConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.algo.weights.size(); ++i) {
           if (i) s += ',';
           s += format_real(c.algo.weights[i]);
         }
         return s;
       }},
      {"dt",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.dt = to_real(k, v); },
       [](const RunConfig& c) { return format_real(c.algo.dt); }},
      {"dt-m",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.dt_m = to_real(k, v); },
       [](const RunConfig& c) { return format_real(c.algo.dt_m); }},
      {"dt-c",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.dt_c = to_real(k, v); },
       [](const RunConfig& c) { return format_real(c.algo.dt_c); }},
      {"steps",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.max_steps = to_int<int>(k, v); },
       [](const RunConfig& c) { return std::to_string(c.algo.max_steps); }},
      {"seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.algo.seed = to_int<std::uint64_t>(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.algo.seed); }},
      {"table-seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.algo.table_seed = to_int<std::uint64_t>(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.algo.table_seed); }},
      {"target",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "none" || v.empty()) {
           c.algo.target.reset();
         } else {
           c.algo.target = to_real(k, v);
         }
       },
       [](const RunConfig& c) {
         return c.algo.target ? format_real(*c.algo.target) : std::string("none");
       }},
      {"domain-exit",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "halt") {
           c.algo.domain_exit = DomainExitPolicy::halt;
         } else if (v == "safeguard") {
           c.algo.domain_exit = DomainExitPolicy::safeguard;
         } else {
           bad_value(k, v, "halt or safeguard");
         }
       },
       [](const RunConfig& c) {
         return std::string(c.algo.domain_exit == DomainExitPolicy::halt ? "halt" : "safeguard");
       }},
      {"uncertified",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.uncertified = to_bool(k, v); },
       [](const RunConfig& c) { return std::string(c.algo.uncertified ? "true" : "false"); }},
      {"init-prob",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.init_prob = to_real(k, v); },
       [](const RunConfig& c) { return format_real(c.algo.init_prob); }},
      {"init-mean",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.init_mean = to_real(k, v); },
       [](const RunConfig& c) { return format_real(c.algo.init_mean); }},
      {"init-var",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.init_var = to_real(k, v); },
       [](const RunConfig& c) { return format_real(c.algo.init_var); }},
      {"rpp-mode",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "sample") {
           c.algo.rpp_mode = RppMode::sample;
         } else if (v == "exact") {
           c.algo.rpp_mode = RppMode::exact;
         } else {
           bad_value(k, v, "sample or exact");
         }
       },
       [](const RunConfig& c) {
         return std::string(c.algo.rpp_mode == RppMode::exact ? "exact" : "sample");
       }},
      {"timing",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.record_timing = to_bool(k, v); },
       [](const RunConfig& c) { return std::string(c.algo.record_timing ? "true" : "false"); }},
      {"j-estimate",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.algo.exact_j = to_bool(k, v); },
       [](const RunConfig& c) { return std::string(c.algo.exact_j ? "true" : "false"); }},
      {"out",
       [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; },
       [](const RunConfig& c) { return c.out; }},
      {"summary",
       [](RunConfig& c, const std::string&, const std::string& v) { c.summary = v; },
       [](const RunConfig& c) { return c.summary; }},
      {"format",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "csv") {
           c.format = TraceFormat::csv;
         } else if (v == "jsonl") {
           c.format = TraceFormat::jsonl;
         } else {
           bad_value(k, v, "csv or jsonl");
         }
       },
       [](const RunConfig& c) { return std::string(c.format == TraceFormat::csv ? "csv" : "jsonl"); }},
      {"verbosity",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.verbosity = to_int<int>(k, v); },
       [](const RunConfig& c) { return std::to_string(c.verbosity); }},
  };
  return keys;
}

}  // namespace

RunConfig::RunConfig() { algo.domain_exit = DomainExitPolicy::safeguard; }

void RunConfig::validate() const {
  algo.validate();
  if (verbosity < 0) fail(ErrorCode::config, "verbosity: must be >= 0");
  if (!summary.empty() && summary == out) {
    fail(ErrorCode::config, "summary: must differ from the trace path");
  }
}

std::string RunConfig::summary_path() const {
  if (!summary.empty()) return summary;
  if (out.empty()) return {};
  return out + ".summary.json";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const Key& k : registry()) n.push_back(k.name);
    return n;
  }();
  return names;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const Key& k : registry()) {
    if (k.name == key) {
      k.set(config, key, value);
      return;
    }
  }
  fail(ErrorCode::config, "unknown key '" + key + "'");
}

void apply_config_text(RunConfig& config, std::string_view text, const std::string& source) {
  int line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) {
      fail(ErrorCode::config, where + "expected key=value, got '" + std::string(line) + "'");
    }
    try {
      apply_setting(config, std::string(trim(line.substr(0, eq))),
                    std::string(trim(line.substr(eq + 1))));
    } catch (const Error& e) {
      fail(ErrorCode::config, where + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str(), path);
}

std::string effective_config(const RunConfig& config) {
  std::string out;
  for (const Key& k : registry()) out += k.name + "=" + k.get(config) + "\n";
  return out;
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

bool parse_real(std::string_view text, double& value) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace igo
