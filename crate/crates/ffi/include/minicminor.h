#ifndef MINICMINOR_H
#define MINICMINOR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Which interpreter `mcc_run_json` uses.
typedef enum MccSemantics {
  MCC_SEMANTICS_SMALL = 0,
  MCC_SEMANTICS_BIG = 1,
} MccSemantics;

// Result of every fallible call.
typedef enum MccStatus {
  MCC_STATUS_OK = 0,
  // A required pointer argument was null.
  MCC_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  MCC_STATUS_INVALID_UTF8 = 2,
  // Program text failed to parse or validate.
  MCC_STATUS_PARSE_ERROR = 3,
  // Unknown pass, bad oracle spec or other invalid argument.
  MCC_STATUS_INVALID_ARGUMENT = 4,
  // A scripted oracle ran out of answers.
  MCC_STATUS_ORACLE_EXHAUSTED = 5,
  // A preservation check ran and failed. Output is still produced.
  MCC_STATUS_VIOLATION = 6,
  // The library panicked; this is a bug.
  MCC_STATUS_INTERNAL = 7,
} MccStatus;

// Opaque program handle.
typedef struct MccProgram MccProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// Valid until the next library call on the same thread.
const char *mcc_last_error(void);

// Static description of a status code.
const char *mcc_status_str(enum MccStatus status);

// Parses and validates program text.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum MccStatus mcc_program_parse(const char *text, struct MccProgram **out);

// Releases a program. Null is ignored.
//
// # Safety
// `p` must come from this library and not be used afterwards.
void mcc_program_free(struct MccProgram *p);

// Pretty-printed program text.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum MccStatus mcc_program_to_string(const struct MccProgram *p, char **out);

// Runs a program and writes the same JSON record as `minicminor run --json`.
//
// # Safety
// `p` must be a live handle, `oracle` a NUL-terminated spec such as
// `const:0`, and `out_json` writable.
enum MccStatus mcc_run_json(const struct MccProgram *p,
                            enum MccSemantics semantics,
                            uint64_t fuel,
                            const char *oracle,
                            char **out_json);

// Applies a comma-separated pass list and returns a new program handle.
//
// # Safety
// `p` must be a live handle, `passes` NUL-terminated, `out` writable.
enum MccStatus mcc_transform(const struct MccProgram *p,
                             const char *passes,
                             uint32_t max_unroll,
                             struct MccProgram **out);

// Forward, backward and equivalence verdicts for a pass list, as JSON.
// Returns `Violation` (with the JSON still written) when forward or
// backward preservation fails.
//
// # Safety
// `p` must be a live handle, `passes` NUL-terminated, `out_json` writable.
enum MccStatus mcc_diff_json(const struct MccProgram *p,
                             const char *passes,
                             uint32_t max_unroll,
                             uint64_t fuel,
                             size_t oracles,
                             uint64_t seed,
                             char **out_json);

// Differential-tests one pass on `count` generated programs and writes the
// report as JSON. Returns `Violation` when any case failed.
//
// # Safety
// `pass` must be NUL-terminated and `out_json` writable.
enum MccStatus mcc_fuzz_json(const char *pass,
                             size_t count,
                             uint64_t seed,
                             uint64_t fuel,
                             size_t oracles,
                             uint32_t max_unroll,
                             char **out_json);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void mcc_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MINICMINOR_H */
