// Acceptance runs: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Each bound is checked after every accepted step against the closed forms.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

#include <fmt/core.h>

#include "srd/barriers.hpp"
#include "srd/picard.hpp"
#include "srd/radial_pde.hpp"
#include "srd/verify.hpp"

using namespace srd;

namespace {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(int id, const char* name, bool passed, double seconds, double limit, const std::string& detail) {
    const bool in_time = limit <= 0.0 || seconds < limit;
    const bool ok = passed && in_time;
    if (!ok) ++failures;
    std::string time = fmt::format("{:.2f}s", seconds);
    if (limit > 0.0) time += fmt::format(" < {:g}s {}", limit, in_time ? "ok" : "EXCEEDED");
    fmt::print("[{}] criterion {}: {} | {} | {}\n", ok ? "PASS" : "FAIL", id, name, detail, time);
    std::fflush(stdout);
}

SolverConfig solver(double dt, double t_end, double dt_min = 0.0) {
    SolverConfig cfg;
    cfg.nu = 1.0;
    cfg.dt_init = dt;
    cfg.dt_min = dt_min;
    cfg.floor = 1e-8;
    cfg.t_end = t_end;
    cfg.snapshot_every = 0.05;
    return cfg;
}

// Largest value of excess(r2, u, t) over live nodes of every step with t <= t_max.
struct MaxOverRun {
    double value = -std::numeric_limits<double>::infinity();
    double t_max;
    std::function<double(double r2, double u, double t)> excess;

    void operator()(const Field& f) {
        if (f.time > t_max) return;
        for (std::size_t j = 0; j < f.values.size(); ++j) {
            if (f.is_extinct(j)) continue;
            const double r = f.grid.node(j);
            value = std::max(value, excess(r * r, f.values[j], f.time));
        }
    }
};

// Criterion 1 and the time half of criterion 9 share this run.
struct HomogeneousRun {
    double extinction = 0.0;
    double sup_error = 0.0;
};

HomogeneousRun homogeneous_run(double dt) {
    const auto grid = build_grid(1.0, 16, 1);
    const Field u0 = make_field(grid, [](double) { return 1.0; });
    MaxOverRun err{.t_max = 0.49, .excess = [](double, double u, double t) { return std::abs(u - std::sqrt(1.0 - 2.0 * t)); }};
    const Trajectory traj = simulate(u0, solver(dt, 1.0), NeumannZero{}, [&](const Field& f) {
        if (f.time < 0.49) err(f);
    });
    return {traj.extinction_time.value_or(std::numeric_limits<double>::infinity()), std::max(err.value, 0.0)};
}

void criterion1() {
    const Stopwatch clock;
    const HomogeneousRun run = homogeneous_run(1e-4);
    const bool ok = std::abs(run.extinction - 0.5) <= 1e-3 && run.sup_error <= 1e-6;
    report(1, "homogeneous extinction oracle", ok, clock.seconds(), 5.0,
           fmt::format("t_ext={:.9f} (0.5 +- 1e-3), sup|u-(1-2t)^(1/2)| on t<0.49 = {:.2e} (<= 1e-6)", run.extinction,
                       run.sup_error));
}

GrowthEnvelope envelope_params() { return derive_growth_params(1.0, 3, 0.5, 0.5, 0.5); }

Trajectory envelope_run(int cells, const StepObserver& observer = {}) {
    const auto env = envelope_params();
    const Barrier low = GrowthLower{env};
    const auto grid = build_grid(20.0, cells, 3);
    const Field u0 = make_field(grid, [&](double r2) { return eval(low, r2, 0.0); });
    return simulate(u0, solver(1e-3, 1.0), DirichletBarrier{low}, observer);
}

void criterion2() {
    const Stopwatch clock;
    const auto env = envelope_params();
    const bool constants = std::abs(env.a1 - 1.0) <= 1e-12 && std::abs(env.a2 - 1.0) <= 1e-12 &&
                           std::abs(env.b1 - 2.0) <= 1e-12 && std::abs(env.b2 - 6.0) <= 1e-12;
    MaxOverRun below{.t_max = 1.0, .excess = [](double r2, double u, double t) {
                         return std::sqrt(1.0 + r2 + 2.0 * t) - u;
                     }};
    MaxOverRun above{.t_max = 1.0, .excess = [](double r2, double u, double t) {
                         return u - std::sqrt(1.0 + r2 + 6.0 * t);
                     }};
    below(make_field(build_grid(20.0, 2000, 3), [](double r2) { return std::sqrt(1.0 + r2); }));
    envelope_run(2000, [&](const Field& f) {
        below(f);
        above(f);
    });
    const bool ok = constants && below.value <= 1e-3 && above.value <= 1e-3;
    report(2, "growth envelope", ok, clock.seconds(), 60.0,
           fmt::format("A1={:g} A2={:g} b1={:g} b2={:g}; max(psi1-u)={:.2e}, max(u-psi2)={:.2e} (<= 1e-3)", env.a1,
                       env.a2, env.b1, env.b2, below.value, above.value));
}

void criterion3() {
    const Stopwatch clock;
    const auto p = derive_cone_params(1.0, 1, std::sqrt(0.5), 1.0);
    const Barrier psi = ConeSupersolution{p};
    const auto grid = build_grid(15.0, 1500, 1);
    const Field u0 = make_field(grid, [&](double r2) { return p.amp * std::sqrt(p.t1 + r2); });
    MaxOverRun above{.t_max = 0.475, .excess = [&](double r2, double u, double t) { return u - eval(psi, r2, t); }};
    above(u0);
    SolverConfig cfg = solver(1e-4, 0.501);
    cfg.stop_on_first_extinction = true;
    const Trajectory traj = simulate(u0, cfg, DirichletBarrier{psi}, std::ref(above));
    const bool origin_first = traj.extinct_node && *traj.extinct_node == 0;
    const double t_ext = traj.extinction_time.value_or(std::numeric_limits<double>::infinity());
    const bool ok = std::abs(p.slope - 2.0) <= 1e-12 && std::abs(p.horizon - 0.5) <= 1e-12 && origin_first &&
                    t_ext <= 0.501 && above.value <= 1e-3;
    report(3, "cone extinction", ok, clock.seconds(), 60.0,
           fmt::format("b={:g} T={:g}; max(u-psi5) on [0,0.475]={:.2e} (<= 1e-3); first extinct node {} at t={:.6f} "
                       "(origin, <= 0.501)",
                       p.slope, p.horizon, above.value, traj.extinct_node ? std::to_string(*traj.extinct_node) : "none",
                       t_ext));
}

double decay_excess(int dim, double expected_a3, bool& constants_ok) {
    const auto p = derive_decay_params(1.0, dim, 0.5, 1.0);
    constants_ok = constants_ok && std::abs(p.a3 - expected_a3) <= 1e-12;
    const Barrier psi = DecaySupersolution{p};
    const auto grid = build_grid(30.0, 3000, dim);
    const Field u0 = make_field(grid, [&](double r2) { return eval(psi, r2, 0.0); });
    MaxOverRun above{.t_max = 0.95, .excess = [&](double r2, double u, double t) { return u - eval(psi, r2, t); }};
    above(u0);
    simulate(u0, solver(1e-3, 0.95, 1e-5), DirichletBarrier{psi}, std::ref(above));
    return above.value;
}

void criterion4() {
    const Stopwatch clock;
    bool constants = true;
    const double n4 = decay_excess(4, std::sqrt(2.0), constants);
    const double n2 = decay_excess(2, std::sqrt(2.0 / 3.0), constants);
    const bool ok = constants && n4 <= 1e-3 && n2 <= 1e-3;
    report(4, "decay-rate bound", ok, clock.seconds(), 120.0,
           fmt::format("max(u-psi3) on [0,0.95]: n=4 (A3=sqrt2) {:.2e}, n=2 (A3=sqrt(2/3)) {:.2e} (<= 1e-3)", n4, n2));
}

constexpr BarrierFamily kFamilies[] = {BarrierFamily::GrowthLower, BarrierFamily::GrowthUpper, BarrierFamily::Decay,
                                       BarrierFamily::Homogeneous, BarrierFamily::Cone};

void criterion5() {
    const Stopwatch clock;
    bool ok = true;
    std::string detail;
    for (BarrierFamily f : kFamilies) {
        const auto rep = residual_sign_suite(f, 10000, 0);
        long violations = -1;
        for (const auto& [k, v] : rep.details)
            if (k == "violations") violations = std::stol(v);
        ok = ok && rep.passed && violations == 0;
        detail += fmt::format("{}{} {} viol (worst {:.1e})", detail.empty() ? "" : ", ", family_name(f), violations,
                              rep.worst_violation);
    }
    report(5, "residual-sign suite, 1e4 samples/family", ok, clock.seconds(), 10.0, detail);
}

void criterion6() {
    const Stopwatch clock;
    const auto env = envelope_params();
    const Barrier barriers[] = {GrowthLower{env}, GrowthUpper{env},
                                DecaySupersolution{derive_decay_params(1.0, 4, 0.5, 1.0)}, make_homogeneous(1.0, 0.5),
                                ConeSupersolution{derive_cone_params(1.0, 1, std::sqrt(0.5), 1.0)}};
    bool ok = true;
    std::string detail;
    for (const Barrier& b : barriers) {
        const auto rep = fd_consistency_check(b, 1000, 1e-6);
        ok = ok && rep.passed;
        detail += fmt::format("{}{} {:.1e}", detail.empty() ? "" : ", ", family_name(family_of(b)), rep.worst_violation);
    }
    report(6, "closed-form vs central differences, 1000 samples/family", ok, clock.seconds(), 5.0,
           detail + " (<= 1e-6)");
}

void criterion7() {
    const Stopwatch clock;
    PicardConfig cfg;
    cfg.nu = 1.0;
    cfg.grid = build_grid(1.0, 100, 1);
    cfg.u0 = make_field(cfg.grid, [](double) { return 1.0; });
    cfg.bdry = DirichletConstant{1.0};
    cfg.t1 = 10.0;
    const double horizon = compute_horizon(cfg);
    cfg.lin_dt = horizon / 2048.0;
    const auto rep = verify_picard_bounds(cfg, 1e-6, 1e-5);
    std::string detail = fmt::format("window [0,{:g}]", horizon);
    for (const auto& [k, v] : rep.details)
        if (k == "lower_violation" || k == "upper_violation" || k == "direct_solve_agreement" || k == "iterations" ||
            k == "converged")
            detail += fmt::format(", {}={}", k, v);
    report(7, "Picard bounds and limit", rep.passed && std::abs(horizon - 0.25) <= 1e-15, clock.seconds(), 30.0,
           detail + " (bounds <= 1e-6, agreement <= 1e-5)");
}

void criterion8() {
    const Stopwatch clock;
    Resolution res;
    res.radius = 20.0;
    res.cells = 1000;
    res.dt = 1e-3;
    res.dt_min = 1e-4;
    const auto reps = comparison_suite(envelope_params(), res, 1.0, 42, 10, 1e-6);
    double worst = -std::numeric_limits<double>::infinity();
    int passed = 0;
    for (const auto& r : reps) {
        worst = std::max(worst, r.worst_violation);
        passed += r.passed;
    }
    report(8, "comparison principle, 10 seeded pairs", passed == 10 && reps.size() == 10, clock.seconds(), 60.0,
           fmt::format("{}/10 ordered, max(u_low-u_high)={:.2e} (<= 1e-6)", passed, worst));
}

double max_diff_on_coarse(const Field& coarse, const Field& fine) {
    const std::size_t stride = (fine.values.size() - 1) / (coarse.values.size() - 1);
    double d = 0.0;
    for (std::size_t j = 0; j < coarse.values.size(); ++j)
        d = std::max(d, std::abs(coarse.values[j] - fine.values[j * stride]));
    return d;
}

// Smooth no-flux run away from extinction: u0 = 1 + exp(-r^2)/2.
Field smooth_run(double dt, DiffusionScheme scheme) {
    const auto grid = build_grid(5.0, 200, 1);
    const Field u0 = make_field(grid, [](double r2) { return 1.0 + 0.5 * std::exp(-r2); });
    SolverConfig cfg = solver(dt, 0.2);
    cfg.scheme = scheme;
    return simulate(u0, cfg, NeumannZero{}).snapshots.back();
}

void criterion9() {
    const Stopwatch clock;
    // Space: the criterion 2 run at h, h/2, h/4; successive differences cancel
    // the common time error and shrink by 4 at second order.
    const Field u1 = envelope_run(2000).snapshots.back();
    const Field u2 = envelope_run(4000).snapshots.back();
    const Field u4 = envelope_run(8000).snapshots.back();
    const double ds1 = max_diff_on_coarse(u1, u2);
    const double ds2 = max_diff_on_coarse(u2, u4);
    const double space_ratio = ds1 / ds2;

    // Time: the criterion 1 run is exact up to rounding (constant data, exact
    // reaction), so its errors carry no order information and are only shown.
    const double e1 = homogeneous_run(1e-4).sup_error;
    const double e2 = homogeneous_run(5e-5).sup_error;

    // Smooth regime: dt, dt/2, dt/4 with the same successive-difference ratio.
    auto time_ratio = [](DiffusionScheme s) {
        const Field a = smooth_run(4e-3, s), b = smooth_run(2e-3, s), c = smooth_run(1e-3, s);
        return max_diff_on_coarse(a, b) / max_diff_on_coarse(b, c);
    };
    const double tr_bdf2 = time_ratio(DiffusionScheme::TrBdf2);
    const double backward_euler = time_ratio(DiffusionScheme::BackwardEuler);

    const bool ok = space_ratio >= 3.5 && tr_bdf2 >= 3.5;
    report(9, "convergence orders", ok, clock.seconds(), 0.0,
           fmt::format("space: |u_h-u_h/2|={:.2e}, |u_h/2-u_h/4|={:.2e}, ratio {:.2f} (>= 3.5); time, smooth regime "
                       "TR-BDF2 ratio {:.2f} (>= 3.5) [backward Euler {:.2f}]; criterion 1 run errors {:.1e} (dt) "
                       "{:.1e} (dt/2), rounding level",
                       ds1, ds2, space_ratio, tr_bdf2, backward_euler, e1, e2));
}

}  // namespace

int main() {
    const std::function<void()> criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                              criterion6, criterion7, criterion8, criterion9};
    int id = 0;
    for (const auto& run : criteria) {
        ++id;
        try {
            run();
        } catch (const std::exception& e) {
            ++failures;
            fmt::print("[FAIL] criterion {}: error: {}\n", id, e.what());
        }
    }
    fmt::print("{} of 9 criteria passed\n", 9 - failures);
    return failures == 0 ? 0 : 1;
}
