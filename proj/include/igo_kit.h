/* SPDX-License-Identifier: Apache-2.0 */
#ifndef IGO_KIT_H
#define IGO_KIT_H

/*
 * C interface to igo-kit.
 *
 * Handles are opaque. Every function that can fail returns an igo_status;
 * the message of the most recent failure on the calling thread is available
 * from igo_last_error(). Strings returned through char** out-parameters are
 * owned by the caller and released with igo_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(IGO_KIT_BUILDING)
#    define IGO_KIT_API __declspec(dllexport)
#  else
#    define IGO_KIT_API __declspec(dllimport)
#  endif
#else
#  define IGO_KIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum igo_status {
  IGO_OK = 0,
  IGO_ERR_INVALID_INPUT = 1,
  IGO_ERR_DEGENERATE = 2,
  IGO_ERR_DOMAIN_EXIT = 3,
  IGO_ERR_CAPACITY = 4,
  IGO_ERR_ILL_CONDITIONED = 5,
  IGO_ERR_CONFIG = 6,
  IGO_ERR_IO = 7,
  IGO_ERR_UNKNOWN_SUITE = 8,
  IGO_ERR_INTERNAL = 9
} igo_status;

typedef struct igo_config igo_config;
typedef struct igo_trace igo_trace;

IGO_KIT_API const char* igo_version(void);
/* Message of the last failure on this thread; "" if none. */
IGO_KIT_API const char* igo_last_error(void);
IGO_KIT_API void igo_string_free(char* s);

/* Configuration. Keys are the long CLI flag names without dashes. */
IGO_KIT_API igo_status igo_config_create(igo_config** out);
IGO_KIT_API void igo_config_destroy(igo_config* config);
IGO_KIT_API igo_status igo_config_set(igo_config* config, const char* key, const char* value);
IGO_KIT_API igo_status igo_config_load_file(igo_config* config, const char* path);
IGO_KIT_API igo_status igo_config_load_text(igo_config* config, const char* text);
/* Current value of one key, formatted as in igo_config_effective. */
IGO_KIT_API igo_status igo_config_get(const igo_config* config, const char* key, char** out);
IGO_KIT_API igo_status igo_config_validate(const igo_config* config);
/* key=value lines describing every setting; parses back to the same config. */
IGO_KIT_API igo_status igo_config_effective(const igo_config* config, char** out);

/* Runs the configured algorithm. A domain exit under the halt policy is not
 * an error: the trace is returned with igo_trace_halted() == 1. */
IGO_KIT_API igo_status igo_run(const igo_config* config, igo_trace** out);
IGO_KIT_API void igo_trace_destroy(igo_trace* trace);
IGO_KIT_API size_t igo_trace_length(const igo_trace* trace);
IGO_KIT_API size_t igo_trace_param_size(const igo_trace* trace);
IGO_KIT_API int igo_trace_halted(const igo_trace* trace);
/* Copies param_size values; capacity must be at least that. */
IGO_KIT_API igo_status igo_trace_final_params(const igo_trace* trace, double* out,
                                              size_t capacity);
IGO_KIT_API igo_status igo_trace_row_params(const igo_trace* trace, size_t row, double* out,
                                            size_t capacity);
/* format: "csv", "jsonl", or NULL for the configured format. */
IGO_KIT_API igo_status igo_trace_write(const igo_trace* trace, const char* path,
                                       const char* format);
IGO_KIT_API igo_status igo_trace_summary_json(const igo_trace* trace, char** out);

/* Runs a verification suite. grid: "small" or "smoke" (NULL = "small").
 * threads = 0 defers to IGO_KIT_THREADS. */
IGO_KIT_API igo_status igo_verify(const char* suite, const char* grid, uint64_t seed,
                                  unsigned threads, int* passed, char** report_json);

/* Tie-averaged q-truncation weights of n fitness values (minimized). */
IGO_KIT_API igo_status igo_sample_weights(const double* fitness, size_t n, double q,
                                          double* out);
/* Integrated rank weights of q-truncation selection for lambda samples. */
IGO_KIT_API igo_status igo_bar_weights(size_t lambda, double q, double* out);

#ifdef __cplusplus
}
#endif

#endif /* IGO_KIT_H */
