#ifndef EAGERLINE_H
#define EAGERLINE_H

/* Generated by cbindgen from eagerline-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum EagerlineStatus {
  EAGERLINE_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EAGERLINE_STATUS_ERR_NULL = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  EAGERLINE_STATUS_ERR_UTF8 = 2,
  /**
   * The problem or plan text did not parse.
   */
  EAGERLINE_STATUS_ERR_PARSE = 3,
  /**
   * The problem is malformed.
   */
  EAGERLINE_STATUS_ERR_INVALID = 4,
  /**
   * The problem is outside the eager fragment.
   */
  EAGERLINE_STATUS_ERR_NOT_EAGER = 5,
  /**
   * The problem has no solution.
   */
  EAGERLINE_STATUS_ERR_NO_SOLUTION = 6,
  /**
   * The search budget ran out before a verdict.
   */
  EAGERLINE_STATUS_ERR_BUDGET = 7,
  /**
   * The plan is not a solution.
   */
  EAGERLINE_STATUS_ERR_VERIFY = 8,
  /**
   * An internal error was caught at the boundary.
   */
  EAGERLINE_STATUS_ERR_INTERNAL = 9,
} EagerlineStatus;

/**
 * Opaque plan tied to the problem it was made from.
 */
typedef struct EagerlinePlan EagerlinePlan;

/**
 * Opaque parsed problem.
 */
typedef struct EagerlineProblem EagerlineProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *eagerline_version(void);

/**
 * Releases a string returned by this library.
 */
void eagerline_string_free(char *s);

/**
 * Parses problem text.  On failure `error_out`, when non-null, receives a
 * message describing the first problem found.
 */
enum EagerlineStatus eagerline_problem_parse(const char *text,
                                             struct EagerlineProblem **problem_out,
                                             char **error_out);

void eagerline_problem_free(struct EagerlineProblem *problem);

/**
 * Validates the problem and classifies its rules.  `report_out`, when
 * non-null, receives a JSON report with per-rule verdicts.
 */
enum EagerlineStatus eagerline_problem_check(const struct EagerlineProblem *problem,
                                             char **report_out);

/**
 * Searches for a solution.  Budgets of zero mean the defaults.  On
 * `EAGERLINE_STATUS_OK` the caller owns the plan in `plan_out`.
 */
enum EagerlineStatus eagerline_solve(const struct EagerlineProblem *problem,
                                     size_t max_states,
                                     size_t max_len,
                                     struct EagerlinePlan **plan_out);

void eagerline_plan_free(struct EagerlinePlan *plan);

/**
 * Number of time points the plan spans.
 */
uint64_t eagerline_plan_horizon(const struct EagerlinePlan *plan);

/**
 * Renders the plan as JSON against its problem's names.
 */
enum EagerlineStatus eagerline_plan_to_json(const struct EagerlineProblem *problem,
                                            const struct EagerlinePlan *plan,
                                            char **json_out);

/**
 * Parses a plan from JSON against the problem's names.
 */
enum EagerlineStatus eagerline_plan_parse_json(const struct EagerlineProblem *problem,
                                               const char *text,
                                               struct EagerlinePlan **plan_out,
                                               char **error_out);

/**
 * Checks the plan against every rule of the problem.  `report_out`, when
 * non-null, receives a JSON report listing any failures.
 */
enum EagerlineStatus eagerline_verify(const struct EagerlineProblem *problem,
                                      const struct EagerlinePlan *plan,
                                      char **report_out);

/**
 * Renders the interval-relation ambiguity table, as CSV when `csv` is
 * nonzero, with touching-interval encodings when `reflexive` is nonzero.
 */
enum EagerlineStatus eagerline_allen_table(bool csv, bool reflexive, char **table_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EAGERLINE_H */
