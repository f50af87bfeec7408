#ifndef LOGICAL_INDUCTION_H
#define LOGICAL_INDUCTION_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum li_status {
  LI_OK = 0,
  LI_NULL_ARGUMENT = 1,
  LI_INVALID_UTF8 = 2,
  LI_PARSE_ERROR = 3,
  LI_CONFIG_ERROR = 4,
  LI_RUN_ERROR = 5,
  LI_IO_ERROR = 6,
  LI_OUT_OF_RANGE = 7,
  LI_BUFFER_TOO_SMALL = 8,
  LI_PANIC = 9,
} li_status;

typedef struct li_scenario li_scenario;

typedef struct li_sentence li_sentence;

typedef struct li_trace li_trace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread. Valid until the next
// call on the same thread.
const char *li_last_error(void);

// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum li_status li_sentence_parse(const char *text, struct li_sentence **out);

// Canonical rendering of a sentence.
//
// # Safety
// `sentence` must come from `li_sentence_parse`; `buf` must hold `len` bytes.
enum li_status li_sentence_render(const struct li_sentence *sentence,
                                  char *buf,
                                  size_t len,
                                  size_t *needed);

// # Safety
// `sentence` must come from `li_sentence_parse` or be null.
void li_sentence_free(struct li_sentence *sentence);

// Parses scenario text; relative paths resolve against the working directory.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum li_status li_scenario_parse(const char *text, struct li_scenario **out);

// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum li_status li_scenario_load(const char *path, struct li_scenario **out);

// # Safety
// `scenario` must come from `li_scenario_parse`/`li_scenario_load` or be null.
void li_scenario_free(struct li_scenario *scenario);

// Overrides the number of days to run.
//
// # Safety
// `scenario` must be a live scenario handle.
enum li_status li_scenario_set_horizon(struct li_scenario *scenario, uint64_t horizon);

// Runs the market for the scenario's horizon.
//
// # Safety
// `scenario` must be a live scenario handle and `out` a valid pointer.
enum li_status li_scenario_run(const struct li_scenario *scenario, struct li_trace **out);

// # Safety
// `trace` must come from `li_scenario_run` or be null.
void li_trace_free(struct li_trace *trace);

// # Safety
// `trace` must be a live trace handle and `out` a valid pointer.
enum li_status li_trace_horizon(const struct li_trace *trace, uint64_t *out);

// Day-`day` price of `sentence` as exact `num/den` text.
//
// # Safety
// `trace` must be a live trace handle, `sentence` a NUL-terminated string
// and `buf` must hold `len` bytes.
enum li_status li_trace_price(const struct li_trace *trace,
                              uint64_t day,
                              const char *sentence,
                              char *buf,
                              size_t len,
                              size_t *needed);

// Writes the trace CSV and, when `certificates_path` is non-null, the
// certificate file.
//
// # Safety
// `trace` must be a live trace handle; paths must be NUL-terminated strings.
enum li_status li_trace_write(const struct li_trace *trace,
                              const char *trace_path,
                              const char *certificates_path);

// Evaluates a named experiment on a trace of `scenario`. `passed` receives
// 1 or 0; the report text is copied into `buf` when it is non-null.
//
// # Safety
// Handles must be live, `name` NUL-terminated, `passed` valid, and `buf`
// null or holding `len` bytes.
enum li_status li_experiment_evaluate(const struct li_scenario *scenario,
                                      const struct li_trace *trace,
                                      const char *name,
                                      int32_t *passed,
                                      char *buf,
                                      size_t len,
                                      size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOGICAL_INDUCTION_H */
