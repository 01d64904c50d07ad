#include "srd/srd.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "srd/config.hpp"
#include "srd/errors.hpp"
#include "srd/radial_pde.hpp"

struct srd_barrier {
    srd::Barrier value;
};

struct srd_boundary {
    srd::BoundaryCondition value;
};

struct srd_trajectory {
    srd::Trajectory value;
};

namespace {

thread_local std::string last_error;

srd_status status_of(srd::ErrorKind kind) {
    switch (kind) {
        case srd::ErrorKind::ConstraintViolation: return SRD_ERR_CONSTRAINT;
        case srd::ErrorKind::DomainError: return SRD_ERR_DOMAIN;
        case srd::ErrorKind::LinearSolveFailure: return SRD_ERR_LINEAR_SOLVE;
        case srd::ErrorKind::IterateBelowFloor: return SRD_ERR_ITERATE_BELOW_FLOOR;
        case srd::ErrorKind::ParseError: return SRD_ERR_PARSE;
        case srd::ErrorKind::SimulationFailed: return SRD_ERR_SIMULATION;
        case srd::ErrorKind::IoError: return SRD_ERR_IO;
    }
    return SRD_ERR_INTERNAL;
}

srd_status fail(srd_status s, std::string message) {
    last_error = std::move(message);
    return s;
}

// Runs f, translating exceptions into status codes.
template <class F>
srd_status guarded(F&& f) {
    try {
        last_error.clear();
        f();
        return SRD_OK;
    } catch (const srd::Error& e) {
        return fail(status_of(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(SRD_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SRD_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SRD_ERR_INTERNAL, "unknown error");
    }
}

#define SRD_REQUIRE(cond) \
    if (!(cond)) return fail(SRD_ERR_INVALID_ARGUMENT, "invalid argument: " #cond)

srd_growth_params to_c(const srd::GrowthEnvelope& e) {
    return {e.nu, e.dim, e.alpha1, e.alpha2, e.eps, e.a1, e.a2, e.b1, e.b2};
}

srd::GrowthEnvelope from_c(const srd_growth_params& p) {
    return srd::derive_growth_params(p.nu, p.dim, p.alpha1, p.alpha2, p.eps, p.a2);
}

template <class Eval>
srd_status evaluate(const srd_barrier* b, double r2, double t, double* out, Eval&& eval) {
    SRD_REQUIRE(b && out);
    return guarded([&] { *out = eval(b->value, r2, t); });
}

srd_status make_barrier(srd::Barrier value, srd_barrier** out) {
    *out = new srd_barrier{std::move(value)};
    return SRD_OK;
}

}  // namespace

extern "C" {

const char* srd_version(void) { return "1.0.0"; }

const char* srd_status_name(srd_status status) {
    switch (status) {
        case SRD_OK: return "ok";
        case SRD_ERR_CONSTRAINT: return "constraint-violation";
        case SRD_ERR_DOMAIN: return "domain-error";
        case SRD_ERR_LINEAR_SOLVE: return "linear-solve-failure";
        case SRD_ERR_ITERATE_BELOW_FLOOR: return "iterate-below-floor";
        case SRD_ERR_PARSE: return "parse-error";
        case SRD_ERR_SIMULATION: return "simulation-failed";
        case SRD_ERR_IO: return "io-error";
        case SRD_ERR_INVALID_ARGUMENT: return "invalid-argument";
        case SRD_ERR_INTERNAL: return "internal-error";
    }
    return "unknown";
}

const char* srd_last_error(void) { return last_error.c_str(); }

srd_status srd_derive_growth(double nu, int dim, double alpha1, double alpha2, double eps, const double* a2_override,
                             srd_growth_params* out) {
    SRD_REQUIRE(out);
    return guarded([&] {
        const auto a2 = a2_override ? std::optional<double>(*a2_override) : std::nullopt;
        *out = to_c(srd::derive_growth_params(nu, dim, alpha1, alpha2, eps, a2));
    });
}

srd_status srd_derive_decay(double nu, int dim, double beta, double horizon, srd_decay_params* out) {
    SRD_REQUIRE(out);
    return guarded([&] {
        const auto p = srd::derive_decay_params(nu, dim, beta, horizon);
        *out = {p.nu, p.dim, p.beta, p.horizon, p.a3};
    });
}

srd_status srd_derive_cone(double nu, int dim, double amp, double t1, srd_cone_params* out) {
    SRD_REQUIRE(out);
    return guarded([&] {
        const auto p = srd::derive_cone_params(nu, dim, amp, t1);
        *out = {p.nu, p.dim, p.amp, p.t1, p.slope, p.horizon};
    });
}

srd_status srd_cone_amplitude_bound(double nu, int dim, double* out) {
    SRD_REQUIRE(out);
    return guarded([&] { *out = srd::cone_amplitude_bound(nu, dim); });
}

srd_status srd_barrier_create_growth_lower(const srd_growth_params* params, srd_barrier** out) {
    SRD_REQUIRE(params && out);
    return guarded([&] { make_barrier(srd::GrowthLower{from_c(*params)}, out); });
}

srd_status srd_barrier_create_growth_upper(const srd_growth_params* params, srd_barrier** out) {
    SRD_REQUIRE(params && out);
    return guarded([&] { make_barrier(srd::GrowthUpper{from_c(*params)}, out); });
}

srd_status srd_barrier_create_decay(const srd_decay_params* p, srd_barrier** out) {
    SRD_REQUIRE(p && out);
    return guarded([&] {
        make_barrier(srd::DecaySupersolution{srd::derive_decay_params(p->nu, p->dim, p->beta, p->horizon)}, out);
    });
}

srd_status srd_barrier_create_homogeneous(double nu, double horizon, srd_barrier** out) {
    SRD_REQUIRE(out);
    return guarded([&] { make_barrier(srd::make_homogeneous(nu, horizon), out); });
}

srd_status srd_barrier_create_cone(const srd_cone_params* p, srd_barrier** out) {
    SRD_REQUIRE(p && out);
    return guarded(
        [&] { make_barrier(srd::ConeSupersolution{srd::derive_cone_params(p->nu, p->dim, p->amp, p->t1)}, out); });
}

void srd_barrier_free(srd_barrier* barrier) { delete barrier; }

srd_status srd_barrier_family(const srd_barrier* barrier, const char** out) {
    SRD_REQUIRE(barrier && out);
    *out = srd::family_name(srd::family_of(barrier->value));
    return SRD_OK;
}

srd_status srd_barrier_eval(const srd_barrier* b, double r2, double t, double* out) {
    return evaluate(b, r2, t, out, [](const srd::Barrier& v, double x, double s) { return srd::eval(v, x, s); });
}

srd_status srd_barrier_laplacian(const srd_barrier* b, double r2, double t, double* out) {
    return evaluate(b, r2, t, out, [](const srd::Barrier& v, double x, double s) { return srd::laplacian(v, x, s); });
}

srd_status srd_barrier_time_derivative(const srd_barrier* b, double r2, double t, double* out) {
    return evaluate(b, r2, t, out,
                    [](const srd::Barrier& v, double x, double s) { return srd::time_derivative(v, x, s); });
}

srd_status srd_barrier_residual(const srd_barrier* b, double r2, double t, double* out) {
    return evaluate(b, r2, t, out, [](const srd::Barrier& v, double x, double s) { return srd::residual(v, x, s); });
}

srd_status srd_boundary_create_barrier(const srd_barrier* barrier, double scale, srd_boundary** out) {
    SRD_REQUIRE(barrier && out);
    return guarded([&] { *out = new srd_boundary{srd::DirichletBarrier{barrier->value, scale}}; });
}

srd_status srd_boundary_create_constant(double value, srd_boundary** out) {
    SRD_REQUIRE(out);
    return guarded([&] { *out = new srd_boundary{srd::DirichletConstant{value}}; });
}

srd_status srd_boundary_create_neumann(srd_boundary** out) {
    SRD_REQUIRE(out);
    return guarded([&] { *out = new srd_boundary{srd::NeumannZero{}}; });
}

void srd_boundary_free(srd_boundary* boundary) { delete boundary; }

void srd_solver_config_default(srd_solver_config* out) {
    if (!out) return;
    const srd::SolverConfig d;
    *out = {d.nu,     d.dt_init,        d.dt_safety, d.dt_min, d.floor, d.t_end, d.snapshot_every,
            SRD_SCHEME_BACKWARD_EULER, d.stop_on_first_extinction ? 1 : 0};
}

srd_status srd_simulate(double radius, int cells, int dim, const double* u0, const srd_solver_config* config,
                        const srd_boundary* boundary, srd_trajectory** out) {
    SRD_REQUIRE(u0 && config && boundary && out);
    SRD_REQUIRE(config->scheme == SRD_SCHEME_BACKWARD_EULER || config->scheme == SRD_SCHEME_TR_BDF2);
    return guarded([&] {
        const srd::RadialGrid grid = srd::build_grid(radius, cells, dim);
        srd::Field f{grid, std::vector<double>(u0, u0 + grid.size()), 0.0, {}};
        srd::SolverConfig cfg;
        cfg.nu = config->nu;
        cfg.dt_init = config->dt_init;
        cfg.dt_safety = config->dt_safety;
        cfg.dt_min = config->dt_min;
        cfg.floor = config->floor;
        cfg.t_end = config->t_end;
        cfg.snapshot_every = config->snapshot_every;
        cfg.scheme = config->scheme == SRD_SCHEME_TR_BDF2 ? srd::DiffusionScheme::TrBdf2
                                                          : srd::DiffusionScheme::BackwardEuler;
        cfg.stop_on_first_extinction = config->stop_on_first_extinction != 0;
        *out = new srd_trajectory{srd::simulate(f, cfg, boundary->value)};
    });
}

void srd_trajectory_free(srd_trajectory* trajectory) { delete trajectory; }

srd_status srd_trajectory_snapshot_count(const srd_trajectory* t, size_t* out) {
    SRD_REQUIRE(t && out);
    *out = t->value.snapshots.size();
    return SRD_OK;
}

srd_status srd_trajectory_node_count(const srd_trajectory* t, size_t* out) {
    SRD_REQUIRE(t && out && !t->value.snapshots.empty());
    *out = t->value.snapshots.front().values.size();
    return SRD_OK;
}

srd_status srd_trajectory_snapshot(const srd_trajectory* t, size_t index, double* time, double* values) {
    SRD_REQUIRE(t && values);
    SRD_REQUIRE(index < t->value.snapshots.size());
    const srd::Field& f = t->value.snapshots[index];
    if (time) *time = f.time;
    std::copy(f.values.begin(), f.values.end(), values);
    return SRD_OK;
}

srd_status srd_trajectory_extinction(const srd_trajectory* t, int* has_extinction, double* time, size_t* node) {
    SRD_REQUIRE(t && has_extinction);
    *has_extinction = t->value.extinction_time ? 1 : 0;
    if (t->value.extinction_time) {
        if (time) *time = *t->value.extinction_time;
        if (node) *node = *t->value.extinct_node;
    }
    return SRD_OK;
}

srd_status srd_trajectory_steps(const srd_trajectory* t, long* out) {
    SRD_REQUIRE(t && out);
    *out = t->value.stats.steps;
    return SRD_OK;
}

srd_status srd_trajectory_write_csv(const srd_trajectory* t, const char* path) {
    SRD_REQUIRE(t && path);
    return guarded([&] {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw srd::IoError(std::string("cannot open '") + path + "' for writing");
        srd::write_snapshots_csv(out, t->value);
        out.close();
        if (!out) throw srd::IoError(std::string("failed writing '") + path + "'");
    });
}

void srd_run_options_default(srd_run_options* out) {
    if (!out) return;
    const srd::RunOptions d;
    *out = {nullptr, 0, 0, d.jobs, d.tolerance_scale, d.record_timing ? 1 : 0, 0};
}

srd_status srd_run_config(const char* text, const srd_run_options* options, int* exit_code) {
    SRD_REQUIRE(text && options && exit_code);
    return guarded([&] {
        srd::RunOptions o;
        if (options->output_dir) o.output_dir = options->output_dir;
        if (options->has_seed) o.seed = options->seed;
        o.jobs = options->jobs;
        o.tolerance_scale = options->tolerance_scale;
        o.record_timing = options->record_timing != 0;
        std::ostringstream sink;
        std::ostream& log = options->quiet ? static_cast<std::ostream&>(sink) : std::cout;
        std::ostringstream err;
        *exit_code = srd::run_source(text, o, log, err);
        if (!err.str().empty()) {
            last_error = err.str();
            while (!last_error.empty() && last_error.back() == '\n') last_error.pop_back();
            std::cerr << err.str();
        }
    });
}

}  // extern "C"
