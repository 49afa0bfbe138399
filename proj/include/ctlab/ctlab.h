#ifndef CTLAB_CTLAB_H
#define CTLAB_CTLAB_H

/* C interface to the charge-transfer dispersive-estimate library.
 *
 * Every object is an opaque handle created by a *_create / *_load / *_run
 * function and released by the matching *_destroy. Functions return a
 * ctlab_status; on failure ctlab_last_error() holds a message for the calling
 * thread until its next failing call. Strings returned through `const char**`
 * are owned by the handle they came from. */

#include <stddef.h>
#include <stdint.h>

#if defined(CTLAB_BUILDING_LIBRARY)
#define CTLAB_API __attribute__((visibility("default")))
#else
#define CTLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctlab_status {
  CTLAB_OK = 0,
  CTLAB_INVALID_PARAMETER = 1,
  CTLAB_INVALID_INPUT = 2,
  CTLAB_SOLVER_FAILURE = 3,
  CTLAB_GRID_TOO_LARGE = 4,
  CTLAB_HORIZON_TOO_SMALL = 5,
  CTLAB_DEGENERATE_RATIO = 6,
  CTLAB_VALIDATION = 7,
  CTLAB_IO = 8,
  CTLAB_INTERNAL = 99
} ctlab_status;

typedef enum ctlab_profile { CTLAB_GAUSSIAN = 0, CTLAB_SECH_SQUARED = 1 } ctlab_profile;

/* V(x - center - offset - velocity t) with V = amplitude * profile(|.| / width). */
typedef struct ctlab_potential {
  ctlab_profile family;
  double amplitude;
  double width;
  double center[3];
  double velocity[3];
  double offset[3];
} ctlab_potential;

typedef struct ctlab_grid ctlab_grid;
typedef struct ctlab_field ctlab_field;
typedef struct ctlab_bound_states ctlab_bound_states;
typedef struct ctlab_config ctlab_config;
typedef struct ctlab_report ctlab_report;

CTLAB_API const char* ctlab_version(void);
CTLAB_API const char* ctlab_status_name(ctlab_status s);
CTLAB_API const char* ctlab_last_error(void);

/* Periodic box [-half_length, half_length)^dim with points_per_axis samples per axis. */
CTLAB_API ctlab_status ctlab_grid_create(int dim, int points_per_axis, double half_length, ctlab_grid** out);
CTLAB_API void ctlab_grid_destroy(ctlab_grid* g);
CTLAB_API size_t ctlab_grid_size(const ctlab_grid* g);
CTLAB_API double ctlab_grid_spacing(const ctlab_grid* g);

/* Fields hold complex samples; `values` is interleaved (re, im), 2 * grid size doubles. */
CTLAB_API ctlab_status ctlab_field_create(const ctlab_grid* g, const double* values, size_t count, ctlab_field** out);
CTLAB_API ctlab_status ctlab_field_gaussian(const ctlab_grid* g, const double center[3], double width,
                                            const double momentum[3], ctlab_field** out);
CTLAB_API void ctlab_field_destroy(ctlab_field* f);
CTLAB_API ctlab_status ctlab_field_values(const ctlab_field* f, double* values, size_t count);
/* p = INFINITY selects the sup norm. */
CTLAB_API ctlab_status ctlab_field_lp_norm(const ctlab_field* f, double p, double* out);

/* Split-step propagation of i psi_t = (-Delta/2 + sum V_k) psi from s to t. */
CTLAB_API ctlab_status ctlab_propagate(const ctlab_potential* potentials, size_t count, const ctlab_field* initial,
                                       double s, double t, double dt, ctlab_field** out);

/* Bound states of -Delta/2 + V for one (static) potential. */
CTLAB_API ctlab_status ctlab_bound_states_compute(const ctlab_potential* potential, const ctlab_grid* g, int k_max,
                                                  double tolerance, ctlab_bound_states** out);
CTLAB_API void ctlab_bound_states_destroy(ctlab_bound_states* b);
CTLAB_API size_t ctlab_bound_states_count(const ctlab_bound_states* b);
CTLAB_API ctlab_status ctlab_bound_states_eigenvalue(const ctlab_bound_states* b, size_t index, double* out);
CTLAB_API ctlab_status ctlab_bound_states_eigenfunction(const ctlab_bound_states* b, size_t index, ctlab_field** out);

/* Scenario configurations: JSON text holding one scenario or {"scenarios": [...]}. */
CTLAB_API ctlab_status ctlab_config_parse(const char* text, ctlab_config** out);
CTLAB_API ctlab_status ctlab_config_load(const char* path, ctlab_config** out);
CTLAB_API void ctlab_config_destroy(ctlab_config* c);
CTLAB_API size_t ctlab_config_count(const ctlab_config* c);
CTLAB_API ctlab_status ctlab_config_name(const ctlab_config* c, size_t index, const char** out);
/* Fills empty estimator lists with the named preset ("bound-states", "propagate", ...). */
CTLAB_API ctlab_status ctlab_config_apply_preset(ctlab_config* c, const char* preset);
CTLAB_API ctlab_status ctlab_config_set_seed(ctlab_config* c, uint64_t seed);

/* Runs scenario `index`; independent scenarios may run on different threads. */
CTLAB_API ctlab_status ctlab_run(const ctlab_config* c, size_t index, ctlab_report** out);
CTLAB_API void ctlab_report_destroy(ctlab_report* r);
/* 1 when every numerical guard stayed green, 0 otherwise. */
CTLAB_API int ctlab_report_valid(const ctlab_report* r);
CTLAB_API size_t ctlab_report_row_count(const ctlab_report* r);
CTLAB_API ctlab_status ctlab_report_row(const ctlab_report* r, size_t index, const char** estimator, double* value);
/* First row of the named estimator. */
CTLAB_API ctlab_status ctlab_report_find(const ctlab_report* r, const char* estimator, double* value);
CTLAB_API size_t ctlab_report_error_count(const ctlab_report* r);
CTLAB_API size_t ctlab_report_failed_assertions(const ctlab_report* r);
CTLAB_API ctlab_status ctlab_report_json(const ctlab_report* r, const char** out);
CTLAB_API ctlab_status ctlab_report_csv(const ctlab_report* r, const char** out);
/* formats: comma list of json, csv, svg. */
CTLAB_API ctlab_status ctlab_report_emit(const ctlab_report* r, const char* directory, const char* formats);

#ifdef __cplusplus
}
#endif

#endif
