#ifndef CTMCDIST_H
#define CTMCDIST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CTMCDIST_API __declspec(dllexport)
#else
#define CTMCDIST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctmcdist_status {
  CTMCDIST_OK = 0,
  CTMCDIST_E_ARGUMENT = 1,  /* bad parameter, unknown state, null pointer */
  CTMCDIST_E_PARSE = 2,     /* malformed model document */
  CTMCDIST_E_INVALID = 3,   /* model violates an invariant */
  CTMCDIST_E_IO = 4,
  CTMCDIST_E_INTERNAL = 5
} ctmcdist_status;

typedef enum ctmcdist_method {
  CTMCDIST_METHOD_OTF = 0,
  CTMCDIST_METHOD_ITER = 1,
  CTMCDIST_METHOD_LP = 2
} ctmcdist_method;

typedef struct ctmcdist_model ctmcdist_model;
typedef struct ctmcdist_result ctmcdist_result;

/* Message for the last failing call on this thread; never NULL. */
CTMCDIST_API const char* ctmcdist_last_error(void);
CTMCDIST_API const char* ctmcdist_status_name(ctmcdist_status status);
CTMCDIST_API void ctmcdist_string_free(char* s);

/* Models. parse/load validate; the _unchecked forms only check syntax. */
CTMCDIST_API ctmcdist_status ctmcdist_model_parse(const char* text, ctmcdist_model** out);
CTMCDIST_API ctmcdist_status ctmcdist_model_parse_unchecked(const char* text, ctmcdist_model** out);
CTMCDIST_API ctmcdist_status ctmcdist_model_load(const char* path, ctmcdist_model** out);
CTMCDIST_API ctmcdist_status ctmcdist_model_load_unchecked(const char* path, ctmcdist_model** out);
CTMCDIST_API void ctmcdist_model_free(ctmcdist_model* model);

CTMCDIST_API size_t ctmcdist_model_size(const ctmcdist_model* model);
/* Borrowed; valid while the model lives. NULL when out of range. */
CTMCDIST_API const char* ctmcdist_model_state_id(const ctmcdist_model* model, size_t index);
CTMCDIST_API ctmcdist_status ctmcdist_model_index(const ctmcdist_model* model, const char* id, size_t* index);

/* Runs validation and keeps the violations on the handle. */
CTMCDIST_API ctmcdist_status ctmcdist_model_validate(ctmcdist_model* model, size_t* violation_count);
CTMCDIST_API const char* ctmcdist_model_violation(const ctmcdist_model* model, size_t i);

/* JSON document; free with ctmcdist_string_free. */
CTMCDIST_API ctmcdist_status ctmcdist_model_serialize(const ctmcdist_model* model, char** out);

typedef struct ctmcdist_random_params {
  int n;
  int out_degree;
  int label_count;
  int absorbing_count;
  double rate_lo;
  double rate_hi;
  uint64_t seed;
} ctmcdist_random_params;

CTMCDIST_API void ctmcdist_random_params_init(ctmcdist_random_params* params);
CTMCDIST_API ctmcdist_status ctmcdist_model_random(const ctmcdist_random_params* params, ctmcdist_model** out);

typedef struct ctmcdist_edit {
  const char* state;
  const char* target_a; /* gains eps */
  const char* target_b; /* loses eps */
  double eps;
  int has_eps;          /* 0: eps drawn from the seed */
} ctmcdist_edit;

CTMCDIST_API ctmcdist_status ctmcdist_model_perturb(const ctmcdist_model* model, const ctmcdist_edit* edits,
                                                    size_t count, uint64_t seed, ctmcdist_model** out);

/* Distances. */
typedef struct ctmcdist_pair {
  size_t s;
  size_t t;
} ctmcdist_pair;

typedef struct ctmcdist_known {
  size_t s;
  size_t t;
  double d;
} ctmcdist_known;

typedef struct ctmcdist_options {
  double lambda;
  ctmcdist_method method;
  double eps;                  /* iterative method accuracy */
  const ctmcdist_known* known; /* over-estimates, on-the-fly only */
  size_t known_count;
} ctmcdist_options;

typedef struct ctmcdist_stats {
  size_t tp_count;
  size_t lp_count;
  size_t iterations;
  size_t improvements;
  size_t visited;
} ctmcdist_stats;

CTMCDIST_API void ctmcdist_options_init(ctmcdist_options* options);

/* pairs == NULL asks for every pair. */
CTMCDIST_API ctmcdist_status ctmcdist_distance(const ctmcdist_model* model, const ctmcdist_options* options,
                                               const ctmcdist_pair* pairs, size_t count, ctmcdist_result** out);
CTMCDIST_API void ctmcdist_result_free(ctmcdist_result* result);
/* Fails for pairs the query did not cover. */
CTMCDIST_API ctmcdist_status ctmcdist_result_value(const ctmcdist_result* result, size_t s, size_t t, double* value);
CTMCDIST_API void ctmcdist_result_stats(const ctmcdist_result* result, ctmcdist_stats* stats);

/* Bisimulation classes. block_of has room for ctmcdist_model_size entries;
   blocks are numbered by their smallest state. */
CTMCDIST_API ctmcdist_status ctmcdist_bisim(const ctmcdist_model* model, size_t* block_of, size_t* block_count);

/* Benchmark. Writes the CSV report, header included. */
typedef struct ctmcdist_bench_config {
  const int* sizes;
  size_t size_count;
  const int* out_degrees;
  size_t out_degree_count;
  uint64_t first_seed;
  uint64_t seed_count;
  int single_pair;
  double lambda;
  int label_count;
} ctmcdist_bench_config;

CTMCDIST_API void ctmcdist_bench_config_init(ctmcdist_bench_config* config);
CTMCDIST_API ctmcdist_status ctmcdist_bench(const ctmcdist_bench_config* config, char** csv);

#ifdef __cplusplus
}
#endif

#endif
