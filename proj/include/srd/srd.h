#ifndef SRD_H
#define SRD_H

/* C interface to the singular reaction-diffusion toolkit. Every function
 * returns an srd_status; on failure srd_last_error() describes the cause
 * (thread-local, valid until the next call on the same thread). Handles are
 * opaque and released with the matching *_free function. */

#include <stddef.h>
#include <stdint.h>

#if defined(SRD_BUILDING_LIBRARY)
#define SRD_API __attribute__((visibility("default")))
#else
#define SRD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum srd_status {
    SRD_OK = 0,
    SRD_ERR_CONSTRAINT = 1,
    SRD_ERR_DOMAIN = 2,
    SRD_ERR_LINEAR_SOLVE = 3,
    SRD_ERR_ITERATE_BELOW_FLOOR = 4,
    SRD_ERR_PARSE = 5,
    SRD_ERR_SIMULATION = 6,
    SRD_ERR_IO = 7,
    SRD_ERR_INVALID_ARGUMENT = 8,
    SRD_ERR_INTERNAL = 9
} srd_status;

SRD_API const char* srd_version(void);
SRD_API const char* srd_status_name(srd_status status);
SRD_API const char* srd_last_error(void);

/* Derived barrier constants. */

typedef struct srd_growth_params {
    double nu;
    int dim;
    double alpha1, alpha2, eps;
    double a1, a2, b1, b2;
} srd_growth_params;

typedef struct srd_decay_params {
    double nu;
    int dim;
    double beta, horizon;
    double a3;
} srd_decay_params;

typedef struct srd_cone_params {
    double nu;
    int dim;
    double amp, t1;
    double slope, horizon;
} srd_cone_params;

/* a2_override may be NULL to select the smallest admissible A2. */
SRD_API srd_status srd_derive_growth(double nu, int dim, double alpha1, double alpha2, double eps,
                                     const double* a2_override, srd_growth_params* out);
SRD_API srd_status srd_derive_decay(double nu, int dim, double beta, double horizon, srd_decay_params* out);
SRD_API srd_status srd_derive_cone(double nu, int dim, double amp, double t1, srd_cone_params* out);
SRD_API srd_status srd_cone_amplitude_bound(double nu, int dim, double* out);

/* Barriers. Creation re-derives the constants from the input fields. */

typedef struct srd_barrier srd_barrier;

SRD_API srd_status srd_barrier_create_growth_lower(const srd_growth_params* params, srd_barrier** out);
SRD_API srd_status srd_barrier_create_growth_upper(const srd_growth_params* params, srd_barrier** out);
SRD_API srd_status srd_barrier_create_decay(const srd_decay_params* params, srd_barrier** out);
SRD_API srd_status srd_barrier_create_homogeneous(double nu, double horizon, srd_barrier** out);
SRD_API srd_status srd_barrier_create_cone(const srd_cone_params* params, srd_barrier** out);
SRD_API void srd_barrier_free(srd_barrier* barrier);

/* Family name: growth-lower, growth-upper, decay, homogeneous or cone. */
SRD_API srd_status srd_barrier_family(const srd_barrier* barrier, const char** out);
SRD_API srd_status srd_barrier_eval(const srd_barrier* barrier, double r2, double t, double* out);
SRD_API srd_status srd_barrier_laplacian(const srd_barrier* barrier, double r2, double t, double* out);
SRD_API srd_status srd_barrier_time_derivative(const srd_barrier* barrier, double r2, double t, double* out);
/* laplacian - psi^{-nu} - psi_t: >= 0 for growth-lower, <= 0 for the supersolutions, 0 for homogeneous. */
SRD_API srd_status srd_barrier_residual(const srd_barrier* barrier, double r2, double t, double* out);

/* Boundary conditions at r = R. */

typedef struct srd_boundary srd_boundary;

SRD_API srd_status srd_boundary_create_barrier(const srd_barrier* barrier, double scale, srd_boundary** out);
SRD_API srd_status srd_boundary_create_constant(double value, srd_boundary** out);
SRD_API srd_status srd_boundary_create_neumann(srd_boundary** out);
SRD_API void srd_boundary_free(srd_boundary* boundary);

/* Solver. */

typedef enum srd_scheme { SRD_SCHEME_BACKWARD_EULER = 0, SRD_SCHEME_TR_BDF2 = 1 } srd_scheme;

typedef struct srd_solver_config {
    double nu;
    double dt_init;
    double dt_safety;
    double dt_min;
    double floor;
    double t_end;
    double snapshot_every;
    srd_scheme scheme;
    int stop_on_first_extinction;
} srd_solver_config;

typedef struct srd_trajectory srd_trajectory;

SRD_API void srd_solver_config_default(srd_solver_config* out);

/* u0 holds cells + 1 nodal values r_j = j * radius / cells. */
SRD_API srd_status srd_simulate(double radius, int cells, int dim, const double* u0, const srd_solver_config* config,
                                const srd_boundary* boundary, srd_trajectory** out);
SRD_API void srd_trajectory_free(srd_trajectory* trajectory);

SRD_API srd_status srd_trajectory_snapshot_count(const srd_trajectory* trajectory, size_t* out);
SRD_API srd_status srd_trajectory_node_count(const srd_trajectory* trajectory, size_t* out);
/* Copies node_count values of snapshot `index` into values; time may be NULL. */
SRD_API srd_status srd_trajectory_snapshot(const srd_trajectory* trajectory, size_t index, double* time,
                                           double* values);
/* *has_extinction is 0 when no node reached the floor. */
SRD_API srd_status srd_trajectory_extinction(const srd_trajectory* trajectory, int* has_extinction, double* time,
                                             size_t* node);
SRD_API srd_status srd_trajectory_steps(const srd_trajectory* trajectory, long* out);
SRD_API srd_status srd_trajectory_write_csv(const srd_trajectory* trajectory, const char* path);

/* Batch runs from an INI configuration. */

typedef struct srd_run_options {
    const char* output_dir; /* NULL: configuration, SINGULAR_RD_OUTPUT, then "out" */
    int has_seed;
    uint64_t seed;
    int jobs; /* 0: hardware concurrency */
    double tolerance_scale;
    int record_timing;
    int quiet; /* suppress progress output on stdout */
} srd_run_options;

SRD_API void srd_run_options_default(srd_run_options* out);

/* Runs the configuration text. exit_code receives 0 (all checks pass),
 * 2 (configuration error), 3 (simulation or i/o failure) or 4 (a check failed);
 * diagnostics go to stderr. The status is SRD_OK unless the arguments are invalid. */
SRD_API srd_status srd_run_config(const char* text, const srd_run_options* options, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif
