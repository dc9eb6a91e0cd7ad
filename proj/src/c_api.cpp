// SPDX-License-Identifier: Apache-2.0
#include "igo_kit.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "igo/config.hpp"
#include "igo/error.hpp"
#include "igo/selection.hpp"
#include "igo/trace_io.hpp"
#include "igo/verify.hpp"

struct igo_config {
  igo::RunConfig cfg;
};

struct igo_trace {
  igo::RunConfig cfg;
  igo::Trace trace;
};

namespace {

thread_local std::string last_error;

igo_status status_of(igo::ErrorCode code) {
  switch (code) {
    case igo::ErrorCode::invalid_input: return IGO_ERR_INVALID_INPUT;
    case igo::ErrorCode::degenerate: return IGO_ERR_DEGENERATE;
    case igo::ErrorCode::domain_exit: return IGO_ERR_DOMAIN_EXIT;
    case igo::ErrorCode::capacity: return IGO_ERR_CAPACITY;
    case igo::ErrorCode::ill_conditioned: return IGO_ERR_ILL_CONDITIONED;
    case igo::ErrorCode::config: return IGO_ERR_CONFIG;
    case igo::ErrorCode::io: return IGO_ERR_IO;
    case igo::ErrorCode::unknown_suite: return IGO_ERR_UNKNOWN_SUITE;
  }
  return IGO_ERR_INTERNAL;
}

template <class Fn>
igo_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return IGO_OK;
  } catch (const igo::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return IGO_ERR_INTERNAL;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) igo::fail(igo::ErrorCode::invalid_input, what);
}

}  // namespace

extern "C" {

const char* igo_version(void) { return "1.0.0"; }

const char* igo_last_error(void) { return last_error.c_str(); }

void igo_string_free(char* s) { std::free(s); }

igo_status igo_config_create(igo_config** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = new igo_config();
  });
}

void igo_config_destroy(igo_config* config) { delete config; }

igo_status igo_config_set(igo_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "null argument");
    igo::apply_setting(config->cfg, key, value);
  });
}

igo_status igo_config_load_file(igo_config* config, const char* path) {
  return guarded([&] {
    require(config && path, "null argument");
    igo::apply_config_file(config->cfg, path);
  });
}

igo_status igo_config_load_text(igo_config* config, const char* text) {
  return guarded([&] {
    require(config && text, "null argument");
    igo::apply_config_text(config->cfg, text);
  });
}

igo_status igo_config_get(const igo_config* config, const char* key, char** out) {
  return guarded([&] {
    require(config && key && out, "null argument");
    const std::string prefix = std::string(key) + "=";
    const std::string text = igo::effective_config(config->cfg);
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t nl = text.find('\n', pos);
      const std::string line = text.substr(pos, nl - pos);
      if (line.compare(0, prefix.size(), prefix) == 0) {
        *out = copy_string(line.substr(prefix.size()));
        return;
      }
      pos = nl == std::string::npos ? text.size() : nl + 1;
    }
    igo::fail(igo::ErrorCode::config, "unknown key '" + std::string(key) + "'");
  });
}

igo_status igo_config_validate(const igo_config* config) {
  return guarded([&] {
    require(config != nullptr, "null config");
    config->cfg.validate();
  });
}

igo_status igo_config_effective(const igo_config* config, char** out) {
  return guarded([&] {
    require(config && out, "null argument");
    *out = copy_string(igo::effective_config(config->cfg));
  });
}

igo_status igo_run(const igo_config* config, igo_trace** out) {
  return guarded([&] {
    require(config && out, "null argument");
    config->cfg.validate();
    auto t = std::make_unique<igo_trace>();
    t->cfg = config->cfg;
    t->trace = igo::run(t->cfg.algo);
    *out = t.release();
  });
}

void igo_trace_destroy(igo_trace* trace) { delete trace; }

size_t igo_trace_length(const igo_trace* trace) { return trace ? trace->trace.rows.size() : 0; }

size_t igo_trace_param_size(const igo_trace* trace) {
  return trace ? static_cast<size_t>(trace->trace.final_eta.size()) : 0;
}

int igo_trace_halted(const igo_trace* trace) { return trace && trace->trace.halted ? 1 : 0; }

igo_status igo_trace_final_params(const igo_trace* trace, double* out, size_t capacity) {
  return guarded([&] {
    require(trace && out, "null argument");
    const igo::Vector& eta = trace->trace.final_eta;
    require(capacity >= static_cast<size_t>(eta.size()), "output buffer too small");
    std::memcpy(out, eta.data(), sizeof(double) * static_cast<size_t>(eta.size()));
  });
}

igo_status igo_trace_row_params(const igo_trace* trace, size_t row, double* out, size_t capacity) {
  return guarded([&] {
    require(trace && out, "null argument");
    require(row < trace->trace.rows.size(), "row out of range");
    const igo::Vector& eta = trace->trace.rows[row].eta;
    require(capacity >= static_cast<size_t>(eta.size()), "output buffer too small");
    std::memcpy(out, eta.data(), sizeof(double) * static_cast<size_t>(eta.size()));
  });
}

igo_status igo_trace_write(const igo_trace* trace, const char* path, const char* format) {
  return guarded([&] {
    require(trace && path, "null argument");
    igo::TraceFormat fmt = trace->cfg.format;
    if (format) {
      const std::string f = format;
      if (f == "csv") {
        fmt = igo::TraceFormat::csv;
      } else if (f == "jsonl") {
        fmt = igo::TraceFormat::jsonl;
      } else {
        igo::fail(igo::ErrorCode::config, "format: expected csv or jsonl");
      }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) igo::fail(igo::ErrorCode::io, std::string("cannot write '") + path + "'");
    igo::write_trace(out, trace->trace, fmt);
    out.flush();
    if (!out) igo::fail(igo::ErrorCode::io, std::string("write failed for '") + path + "'");
  });
}

igo_status igo_trace_summary_json(const igo_trace* trace, char** out) {
  return guarded([&] {
    require(trace && out, "null argument");
    *out = copy_string(igo::summary_json(trace->cfg, trace->trace));
  });
}

igo_status igo_verify(const char* suite, const char* grid, uint64_t seed, unsigned threads,
                      int* passed, char** report_json) {
  return guarded([&] {
    require(suite != nullptr, "null suite");
    igo::VerifyOptions opt;
    if (grid) opt.grid = grid;
    opt.seed = seed;
    opt.threads = threads;
    igo::SuiteReport r = igo::run_suite(suite, opt);
    nlohmann::ordered_json j;
    j["suite"] = r.suite;
    j["passed"] = r.passed;
    j["detail"] = std::move(r.detail);
    if (passed) *passed = r.passed ? 1 : 0;
    if (report_json) *report_json = copy_string(j.dump(2) + "\n");
  });
}

igo_status igo_sample_weights(const double* fitness, size_t n, double q, double* out) {
  return guarded([&] {
    require(fitness && out, "null argument");
    const auto w = igo::sample_weights(std::span<const double>(fitness, n),
                                       igo::SelectionScheme::truncation(q));
    std::memcpy(out, w.data(), sizeof(double) * w.size());
  });
}

igo_status igo_bar_weights(size_t lambda, double q, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require(lambda >= 1 && lambda <= 100000000, "lambda out of range");
    const auto w = igo::bar_weights(static_cast<int>(lambda), igo::SelectionScheme::truncation(q));
    std::memcpy(out, w.data(), sizeof(double) * w.size());
  });
}

}  // extern "C"
