#ifndef RSOS_RSOS_H
#define RSOS_RSOS_H

#include <stddef.h>
#include <stdint.h>

#if defined(RSOS_BUILDING_LIBRARY)
#define RSOS_API __attribute__((visibility("default")))
#else
#define RSOS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsos_status {
  RSOS_OK = 0,
  RSOS_ERR_INVALID_ARGUMENT = 1,
  RSOS_ERR_OUT_OF_BOX = 2,
  RSOS_ERR_DUPLICATE_TIME = 3,
  RSOS_ERR_INADMISSIBLE = 4,
  RSOS_ERR_RESOURCE_LIMIT = 5,
  RSOS_ERR_UNSUPPORTED = 6,
  RSOS_ERR_NOT_FOUND = 7,
  RSOS_ERR_IO = 8,
  RSOS_ERR_PARSE = 9,
  RSOS_ERR_INTERNAL = 10
} rsos_status;

typedef struct rsos_config rsos_config;
typedef struct rsos_result rsos_result;
typedef struct rsos_lattice rsos_lattice;
typedef struct rsos_dual rsos_dual;

RSOS_API const char* rsos_version(void);
RSOS_API const char* rsos_status_name(rsos_status status);
/* Message of the last failed call on this thread ("" if none). */
RSOS_API const char* rsos_last_error(void);

/* Experiment configuration: flat key = value settings (see README). */
RSOS_API rsos_status rsos_config_new(const char* experiment, rsos_config** out);
RSOS_API rsos_status rsos_config_load(const char* path, rsos_config** out);
RSOS_API rsos_status rsos_config_set(rsos_config* config, const char* key, const char* value);
RSOS_API void rsos_config_free(rsos_config* config);

/* Runs the configured experiment. With write_outputs != 0 the reports and
   manifest go to the configured output_dir. */
RSOS_API rsos_status rsos_run(const rsos_config* config, int write_outputs, rsos_result** out);
RSOS_API int rsos_result_passed(const rsos_result* result);
RSOS_API size_t rsos_result_check_count(const rsos_result* result);
RSOS_API rsos_status rsos_result_check(const rsos_result* result, size_t index, const char** name, int* passed,
                                       const char** detail);
RSOS_API size_t rsos_result_table_count(const rsos_result* result);
/* Table name and its CSV rendering; valid until the result is freed. */
RSOS_API rsos_status rsos_result_table(const rsos_result* result, size_t index, const char** name,
                                       const char** csv);
RSOS_API size_t rsos_result_certified(const rsos_result* result);
RSOS_API size_t rsos_result_uncertified(const rsos_result* result);
/* "" when outputs were not written. */
RSOS_API const char* rsos_result_manifest_path(const rsos_result* result);
RSOS_API void rsos_result_free(rsos_result* result);

/* Poisson lattice on [-L, L]^d x (0, T]. boundary is "free" or "periodic". */
RSOS_API rsos_status rsos_lattice_generate(int d, int L, double T, double rate, uint64_t seed,
                                           const char* boundary, rsos_lattice** out);
RSOS_API rsos_status rsos_lattice_read(const char* path, rsos_lattice** out);
RSOS_API rsos_status rsos_lattice_write(const rsos_lattice* lattice, const char* path);
RSOS_API rsos_status rsos_lattice_reverse(const rsos_lattice* lattice, rsos_lattice** out);
RSOS_API size_t rsos_lattice_size(const rsos_lattice* lattice);
RSOS_API void rsos_lattice_free(rsos_lattice* lattice);

/* Evolves the surface to `until`. model: "rsos", "bd", "krsos:K"; init:
   "zero", "well", "explicit:x[,y..]=h;...". Optional output paths may be
   NULL: field_csv gets the final heights, log_jsonl the accepted updates.
   *origin_height receives the height at the origin. */
RSOS_API rsos_status rsos_evolve(const rsos_lattice* lattice, const char* model, const char* init, double until,
                                 const char* field_csv, const char* log_jsonl, int64_t* origin_height);
/* Optimal path value at (t, x); x has d coordinates. *exact is set to the
   finite-box certificate. */
RSOS_API rsos_status rsos_min_weight(const rsos_lattice* lattice, double t, const int* x, const char* model,
                                     const char* init, int64_t* value, int* exact);

/* Dual (well-initialized) process on a fresh lattice sized for `until`. */
RSOS_API rsos_status rsos_dual_run(int d, double until, uint64_t seed, rsos_dual** out);
RSOS_API rsos_status rsos_dual_run_on(const rsos_lattice* lattice, double until, rsos_dual** out);
RSOS_API int64_t rsos_dual_minimum(const rsos_dual* dual);
RSOS_API int rsos_dual_exact(const rsos_dual* dual);
/* RSOS_ERR_NOT_FOUND when height u is not reached. */
RSOS_API rsos_status rsos_dual_hitting_time(const rsos_dual* dual, int64_t u, double* out);
RSOS_API rsos_status rsos_dual_write_trajectory(const rsos_dual* dual, const char* path);
RSOS_API rsos_status rsos_dual_write_hitting(const rsos_dual* dual, const char* path);
RSOS_API void rsos_dual_free(rsos_dual* dual);

#ifdef __cplusplus
}
#endif

#endif
