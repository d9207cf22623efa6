#ifndef SEMIFIN_H
#define SEMIFIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdint.h>

#define SEMIFIN_OK 0

#define SEMIFIN_ERR_INPUT 1

#define SEMIFIN_WITNESS 2

#define SEMIFIN_INCONCLUSIVE 3

#define SEMIFIN_INVALID_CERTIFICATE 4

#define SEMIFIN_ERR_INTERNAL 5

#define SEMIFIN_ERR_NULL -1

#define SEMIFIN_ERR_UTF8 -2

#define SEMIFIN_ERR_COMMAND -3

#define SEMIFIN_ERR_PANIC -4

#define SEMIFIN_VERDICT_NONE -1

#define SEMIFIN_VERDICT_FINITE 0

#define SEMIFIN_VERDICT_WITNESS 1

#define SEMIFIN_VERDICT_INCONCLUSIVE 2

// A parsed job document with optional limit overrides.
typedef struct SemifinJob SemifinJob;

// The report of one command run.
typedef struct SemifinReport SemifinReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse and validate a job document. Returns null on failure.
//
// # Safety
// `json` must be null or a valid nul-terminated string.
struct SemifinJob *semifin_job_parse(const char *json);

// Override limits for later runs of `job`; zero keeps the current value.
//
// # Safety
// `job` must be null or a handle from [`semifin_job_parse`].
int32_t semifin_job_set_limits(struct SemifinJob *job,
                               uint64_t max_elements,
                               uint64_t max_steps,
                               uint64_t cap_powers);

// # Safety
// `job` must be null or a handle from [`semifin_job_parse`] not yet freed.
void semifin_job_free(struct SemifinJob *job);

// Run `command` ("check", "closure", "triangularize", "kernelcat",
// "kleene") on a job. On success `*out` receives a report handle and the
// report's exit code is returned.
//
// # Safety
// `job` must be a live job handle, `command` a nul-terminated string and
// `out` a writable pointer.
int32_t semifin_run(const struct SemifinJob *job, const char *command, struct SemifinReport **out);

// Shorthand for [`semifin_run`] with "check".
//
// # Safety
// As for [`semifin_run`].
int32_t semifin_check(const struct SemifinJob *job, struct SemifinReport **out);

// Exit code recorded in the report.
//
// # Safety
// `report` must be null or a live report handle.
int32_t semifin_report_status(const struct SemifinReport *report);

// One of the `SEMIFIN_VERDICT_*` codes.
//
// # Safety
// `report` must be null or a live report handle.
int32_t semifin_report_verdict(const struct SemifinReport *report);

// Order of the monoid for a finite verdict or a completed closure, else 0.
//
// # Safety
// `report` must be null or a live report handle.
uint64_t semifin_report_order(const struct SemifinReport *report);

// The report as JSON; free with [`semifin_string_free`].
//
// # Safety
// `report` must be null or a live report handle.
char *semifin_report_json(const struct SemifinReport *report);

// # Safety
// `report` must be null or a handle not yet freed.
void semifin_report_free(struct SemifinReport *report);

// Re-check a certificate, or a check report containing one. Returns
// `SEMIFIN_OK` when every assertion holds, `SEMIFIN_INVALID_CERTIFICATE`
// otherwise.
//
// # Safety
// `json` must be null or a valid nul-terminated string.
int32_t semifin_verify_certificate(const char *json);

// Run any command on a job document in one call. `*out` receives the report
// JSON (free with [`semifin_string_free`]) or null on error.
//
// # Safety
// `command` and `input` must be nul-terminated strings, `out` writable.
int32_t semifin_run_json(const char *command, const char *input, char **out);

// Message for the most recent failure on this thread, or null. Valid until
// the next call into this library from the same thread.
const char *semifin_last_error(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void semifin_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMIFIN_H */
