#ifndef FOURQL_H
#define FOURQL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FourqlStatus {
  FOURQL_STATUS_OK = 0,
  FOURQL_STATUS_NULL_ARGUMENT = 1,
  FOURQL_STATUS_INVALID_UTF8 = 2,
  FOURQL_STATUS_PARSE_ERROR = 3,
  FOURQL_STATUS_INVALID_PROGRAM = 4,
  FOURQL_STATUS_QUERY_ERROR = 5,
  FOURQL_STATUS_DATALOG_ERROR = 6,
  FOURQL_STATUS_PANIC = 7,
} FourqlStatus;

typedef enum FourqlTruth {
  FOURQL_TRUTH_FALSE = 0,
  FOURQL_TRUTH_UNKNOWN = 1,
  FOURQL_TRUTH_INCONSISTENT = 2,
  FOURQL_TRUTH_TRUE = 3,
} FourqlTruth;

// The model of a program.
typedef struct FourqlModel FourqlModel;

// A parsed and validated program.
typedef struct FourqlProgram FourqlProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *fourql_last_error(void);

// Parses and validates `source`.
//
// # Safety
// `source` must be a nul-terminated string and `out` a valid pointer.
enum FourqlStatus fourql_program_new(const char *source, struct FourqlProgram **out);

// # Safety
// `program` must come from [`fourql_program_new`] or be null.
void fourql_program_free(struct FourqlProgram *program);

// Grounds, layer-checks and solves `program`.
//
// # Safety
// `program` must be a live program handle and `out` a valid pointer.
enum FourqlStatus fourql_solve(const struct FourqlProgram *program, struct FourqlModel **out);

// # Safety
// `model` must come from [`fourql_solve`] or be null.
void fourql_model_free(struct FourqlModel *model);

// Evaluates a ground formula such as `main.a, -main.b` in the model.
//
// # Safety
// `model` must be a live model handle, `formula` a nul-terminated string
// and `out` a valid pointer.
enum FourqlStatus fourql_model_query(const struct FourqlModel *model,
                                     const char *formula,
                                     enum FourqlTruth *out);

// Writes the model as a JSON document. Free the result with
// [`fourql_string_free`].
//
// # Safety
// `model` must be a live model handle and `out` a valid pointer.
enum FourqlStatus fourql_model_to_json(const struct FourqlModel *model,
                                       bool show_unknown,
                                       char **out);

// Translates stratified Datalog with negation into module rules. Free the
// result with [`fourql_string_free`].
//
// # Safety
// `source` must be a nul-terminated string and `out` a valid pointer.
enum FourqlStatus fourql_translate_datalog(const char *source, char **out);

// # Safety
// `s` must come from this library or be null.
void fourql_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOURQL_H */
