#ifndef LPMFORGE_H
#define LPMFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call. Values 2 to 11 mirror the engine's error codes.
 */
typedef enum LpmStatus {
  LPM_STATUS_OK = 0,
  LPM_STATUS_NULL_POINTER = 1,
  LPM_STATUS_PARSE = 2,
  LPM_STATUS_INVALID_ARGUMENT = 3,
  LPM_STATUS_UNDEFINED_DISTRIBUTION = 4,
  LPM_STATUS_BUDGET_EXCEEDED = 5,
  LPM_STATUS_NOT_ENABLED = 6,
  LPM_STATUS_UNSUPPORTED_NET = 7,
  LPM_STATUS_EMPTY_PATTERN_LIST = 8,
  LPM_STATUS_MISSING_TIMESTAMP = 9,
  LPM_STATUS_IO = 10,
  LPM_STATUS_JSON = 11,
  LPM_STATUS_UTF8 = 12,
  LPM_STATUS_OUT_OF_RANGE = 13,
  LPM_STATUS_PANIC = 99,
} LpmStatus;

/**
 * An event log.
 */
typedef struct LpmLog LpmLog;

/**
 * A ranked list of local process models.
 */
typedef struct LpmRanking LpmRanking;

/**
 * Quality measures of one ranked pattern. `language_fit` is NaN when the
 * pattern language exceeded the enumeration budget.
 */
typedef struct LpmScores {
  uintptr_t support;
  double confidence;
  double language_fit;
  double determinism;
  double coverage;
  double aggregate;
} LpmScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *lpm_last_error(void);

/**
 * Library version as a static string.
 */
const char *lpm_version(void);

/**
 * Reads a CSV log. `time_column` may be null for logs without timestamps.
 *
 * # Safety
 * String arguments must be null or valid NUL-terminated strings; `out` must be writable.
 */
enum LpmStatus lpm_log_from_csv(const char *path,
                                const char *case_column,
                                const char *activity_column,
                                const char *time_column,
                                struct LpmLog **out);

/**
 * Reads an XES log.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be writable.
 */
enum LpmStatus lpm_log_from_xes(const char *path, struct LpmLog **out);

/**
 * Builds a log from JSON of the form `{"traces":[{"id":..,"events":[{"activity":..}]}]}`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be writable.
 */
enum LpmStatus lpm_log_from_json(const char *json, struct LpmLog **out);

/**
 * # Safety
 * `log` must be null or a handle from one of the `lpm_log_from_*` functions, freed once.
 */
void lpm_log_free(struct LpmLog *log);

/**
 * Number of traces; 0 for a null handle.
 *
 * # Safety
 * `log` must be null or a live handle.
 */
uintptr_t lpm_log_trace_count(const struct LpmLog *log);

/**
 * Number of events; 0 for a null handle.
 *
 * # Safety
 * `log` must be null or a live handle.
 */
uintptr_t lpm_log_event_count(const struct LpmLog *log);

/**
 * Mines a log. `config_json` holds miner settings such as
 * `{"min_support":5,"max_iterations":2,"top_k":20}`; null uses the defaults.
 *
 * # Safety
 * `log` must be a live handle, `config_json` null or a valid string, `out` writable.
 */
enum LpmStatus lpm_mine(const struct LpmLog *log, const char *config_json, struct LpmRanking **out);

/**
 * # Safety
 * `ranking` must be null or a handle from [`lpm_mine`], freed once.
 */
void lpm_ranking_free(struct LpmRanking *ranking);

/**
 * Number of ranked patterns; 0 for a null handle.
 *
 * # Safety
 * `ranking` must be null or a live handle.
 */
uintptr_t lpm_ranking_len(const struct LpmRanking *ranking);

/**
 * Scores of pattern `index`.
 *
 * # Safety
 * `ranking` must be a live handle and `out` writable.
 */
enum LpmStatus lpm_ranking_scores(const struct LpmRanking *ranking,
                                  uintptr_t index,
                                  struct LpmScores *out);

/**
 * Text form of pattern `index`, e.g. `seq(a,xor(b,c))`. Free with [`lpm_string_free`].
 *
 * # Safety
 * `ranking` must be a live handle and `out` writable.
 */
enum LpmStatus lpm_ranking_tree(const struct LpmRanking *ranking, uintptr_t index, char **out);

/**
 * Full ranking with instances as JSON. Free with [`lpm_string_free`].
 *
 * # Safety
 * `ranking` must be a live handle and `out` writable.
 */
enum LpmStatus lpm_ranking_to_json(const struct LpmRanking *ranking, char **out);

/**
 * Number of instances of a pattern given in text form.
 *
 * # Safety
 * `log` must be a live handle, `tree` a valid string, `out` writable.
 */
enum LpmStatus lpm_pattern_support(const struct LpmLog *log, const char *tree, uintptr_t *out);

/**
 * Entropy of the successor and predecessor distributions of `activity`.
 *
 * # Safety
 * `log` must be a live handle, `activity` a valid string, `out` writable.
 */
enum LpmStatus lpm_activity_entropy(const struct LpmLog *log, const char *activity, double *out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string returned through an out-pointer of this library, freed once.
 */
void lpm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LPMFORGE_H */
