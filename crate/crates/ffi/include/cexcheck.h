#ifndef CEXCHECK_H
#define CEXCHECK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CexStatus {
  CEX_STATUS_OK = 0,
  CEX_STATUS_NULL_ARGUMENT = 1,
  CEX_STATUS_INVALID_UTF8 = 2,
  CEX_STATUS_PARSE_ERROR = 3,
  CEX_STATUS_UNKNOWN_SCENARIO = 4,
  CEX_STATUS_OUT_OF_RANGE = 5,
  CEX_STATUS_INTERNAL = 6,
} CexStatus;

// A parsed DSL program.
typedef struct CexProgram CexProgram;

// A finished run: a program execution or a scenario report.
typedef struct CexReport CexReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse `source` into a program handle.
//
// # Safety
// `source` must be a NUL-terminated string; `out` must be writable.
enum CexStatus cex_program_parse(const char *source, struct CexProgram **out);

// # Safety
// `program` must come from [`cex_program_parse`] and not be freed twice.
void cex_program_free(struct CexProgram *program);

// Execute a program with default options.
//
// # Safety
// `program` must be a live handle; `out` must be writable.
enum CexStatus cex_program_execute(const struct CexProgram *program, struct CexReport **out);

// Number of built-in scenarios.
size_t cex_scenario_count(void);

// Id of the built-in scenario at `index`, as a string for [`cex_string_free`].
//
// # Safety
// `out` must be writable.
enum CexStatus cex_scenario_id(size_t index, char **out);

// Run one built-in scenario by id.
//
// # Safety
// `id` must be a NUL-terminated string; `out` must be writable.
enum CexStatus cex_scenario_run(const char *id, struct CexReport **out);

// # Safety
// `report` must be a live handle; `out` must be writable.
enum CexStatus cex_report_json(const struct CexReport *report, char **out);

// # Safety
// `report` must be a live handle; `out` must be writable.
enum CexStatus cex_report_markdown(const struct CexReport *report, char **out);

// 1 if the run passed, 0 if not, -1 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
int32_t cex_report_passed(const struct CexReport *report);

// # Safety
// `report` must come from this library and not be freed twice.
void cex_report_free(struct CexReport *report);

// # Safety
// `s` must be a string returned by this library and not be freed twice.
void cex_string_free(char *s);

// Message for the last failure on this thread, or null. Valid until the
// next call into the library from the same thread; do not free.
const char *cex_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CEXCHECK_H */
