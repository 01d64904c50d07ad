#include "srd/picard.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "diffusion.hpp"
#include "srd/errors.hpp"

namespace srd {

namespace {

constexpr int kBoundarySamples = 1025;
constexpr double kFloorTolerance = 1e-6;

struct Lattice {
    std::size_t steps;
    double dt;
};

Lattice make_lattice(const PicardConfig& cfg, double horizon) {
    const double target = cfg.lin_dt > 0.0 ? cfg.lin_dt : horizon / 512.0;
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / target - 1e-9)));
    return {steps, horizon / static_cast<double>(steps)};
}

SpaceTimeArray empty_array(const RadialGrid& grid, const Lattice& lat) {
    SpaceTimeArray a{grid, std::vector<double>(lat.steps + 1), std::vector<double>((lat.steps + 1) * grid.size())};
    for (std::size_t i = 0; i <= lat.steps; ++i) a.times[i] = static_cast<double>(i) * lat.dt;
    return a;
}

// Solves u_t = Δu + s on the lattice starting from u0; s may be empty.
SpaceTimeArray solve_linear(const PicardConfig& cfg, const Lattice& lat, const detail::SourceFn& source) {
    SpaceTimeArray out = empty_array(cfg.grid, lat);
    std::vector<double> u = cfg.u0.values;
    std::ranges::copy(u, out.slice(0).begin());
    detail::DiffusionIntegrator integ(cfg.grid, cfg.scheme);
    for (std::size_t i = 0; i < lat.steps; ++i) {
        integ.advance(u, out.times[i], lat.dt, cfg.bdry, {}, source);
        std::ranges::copy(u, out.slice(i + 1).begin());
    }
    return out;
}

double sup_diff(const SpaceTimeArray& a, const SpaceTimeArray& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
    return d;
}

}  // namespace

void PicardConfig::validate() const {
    if (!(nu > 0.0)) throw ConstraintViolation(fmt::format("nu must be positive, got {}", nu));
    if (!(t1 > 0.0)) throw ConstraintViolation(fmt::format("T1 must be positive, got {}", t1));
    if (max_iters < 1) throw ConstraintViolation(fmt::format("max_iters must be >= 1, got {}", max_iters));
    if (lin_dt < 0.0) throw ConstraintViolation(fmt::format("lin_dt must be nonnegative, got {}", lin_dt));
    if (!(stop_tol >= 0.0)) throw ConstraintViolation("stop_tol must be nonnegative");
    if (!(horizon >= 0.0)) throw ConstraintViolation(fmt::format("horizon must be nonnegative, got {}", horizon));
    if (!is_dirichlet(bdry)) throw ConstraintViolation("the iteration needs Dirichlet boundary data");
    if (!(u0.grid == grid) || u0.values.size() != grid.size())
        throw ConstraintViolation("u0 must be sampled on the configuration grid");
}

double compute_delta(const PicardConfig& cfg) {
    cfg.validate();
    double delta = *std::ranges::min_element(cfg.u0.values);
    for (int i = 0; i < kBoundarySamples; ++i) {
        const double t = cfg.t1 * i / (kBoundarySamples - 1);
        delta = std::min(delta, boundary_value(cfg.bdry, cfg.grid.radius(), t));
    }
    return delta;
}

double compute_horizon(const PicardConfig& cfg) {
    const double delta = compute_delta(cfg);
    if (!(delta > 0.0))
        throw ConstraintViolation(fmt::format("delta = min(u0, boundary data) must be positive, got {}", delta));
    return std::min(0.5 * cfg.t1, std::pow(0.5 * delta, 1.0 + cfg.nu));
}

SpaceTimeArray heat_majorant(const PicardConfig& cfg) {
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : compute_horizon(cfg);
    return solve_linear(cfg, make_lattice(cfg, horizon), {});
}

PicardRun iterate(const PicardConfig& cfg) {
    PicardRun run;
    run.delta = compute_delta(cfg);
    run.horizon = cfg.horizon > 0.0 ? cfg.horizon : compute_horizon(cfg);
    const Lattice lat = make_lattice(cfg, run.horizon);
    run.majorant = solve_linear(cfg, lat, {});

    SpaceTimeArray first = empty_array(cfg.grid, lat);
    std::ranges::fill(first.values, run.delta);
    run.iterates.push_back(std::move(first));

    const double nu = cfg.nu;
    const double lowest = 0.5 * run.delta - kFloorTolerance;
    for (int k = 2; k <= cfg.max_iters; ++k) {
        const SpaceTimeArray& prev = run.iterates.back();
        // -u_{k-1}^{-ν}, with u_{k-1} interpolated linearly between lattice slices.
        auto source = [&prev, &lat, nu](double t, std::span<double> out) {
            const double s = std::clamp(t / lat.dt, 0.0, static_cast<double>(lat.steps));
            const auto i = std::min(static_cast<std::size_t>(s), lat.steps - 1);
            const double w = s - static_cast<double>(i);
            const auto a = prev.slice(i);
            const auto b = prev.slice(i + 1);
            for (std::size_t j = 0; j < out.size(); ++j) out[j] = -std::pow((1.0 - w) * a[j] + w * b[j], -nu);
        };
        SpaceTimeArray next = solve_linear(cfg, lat, source);
        for (std::size_t i = 0; i < next.slices(); ++i) {
            const auto s = next.slice(i);
            for (std::size_t j = 0; j < s.size(); ++j)
                if (!(s[j] >= lowest))
                    throw IterateBelowFloor(fmt::format("iterate {} is {} at r = {}, t = {}, below delta/2 = {}", k,
                                                        s[j], cfg.grid.node(j), next.times[i], 0.5 * run.delta));
        }
        run.sup_diffs.push_back(sup_diff(next, prev));
        run.iterates.push_back(std::move(next));
        if (run.sup_diffs.back() < cfg.stop_tol) {
            run.converged = true;
            break;
        }
    }
    return run;
}

BoundReport check_bounds(const PicardRun& run, double delta) {
    BoundReport rep;
    const double lower = 0.5 * delta;
    for (std::size_t k = 0; k < run.iterates.size(); ++k) {
        const SpaceTimeArray& it = run.iterates[k];
        for (std::size_t i = 0; i < it.slices(); ++i) {
            for (std::size_t j = 0; j < it.grid.size(); ++j) {
                const double u = it.at(i, j);
                const double lo = lower - u;
                const double hi = u - run.majorant.at(i, j);
                if (lo > rep.lower_violation) {
                    rep.lower_violation = lo;
                    rep.lower_k = static_cast<int>(k) + 1;
                    rep.lower_r = it.grid.node(j);
                    rep.lower_t = it.times[i];
                }
                if (hi > rep.upper_violation) {
                    rep.upper_violation = hi;
                    rep.upper_k = static_cast<int>(k) + 1;
                    rep.upper_r = it.grid.node(j);
                    rep.upper_t = it.times[i];
                }
            }
        }
    }
    return rep;
}

void write_picard_csv(std::ostream& out, const PicardRun& run) {
    fmt::print(out, "k,t,r,u\n");
    for (std::size_t k = 0; k < run.iterates.size(); ++k) {
        const SpaceTimeArray& it = run.iterates[k];
        for (std::size_t i = 0; i < it.slices(); ++i)
            for (std::size_t j = 0; j < it.grid.size(); ++j)
                fmt::print(out, "{},{:.17g},{:.17g},{:.17g}\n", k + 1, it.times[i], it.grid.node(j), it.at(i, j));
    }
    fmt::print(out, "# delta,{:.17g}\n# horizon,{:.17g}\n# iterations,{}\n# converged,{}\n", run.delta, run.horizon,
               run.iterates.size(), run.converged ? "true" : "false");
    for (std::size_t i = 0; i < run.sup_diffs.size(); ++i)
        fmt::print(out, "# sup_diff,{},{:.17g}\n", i + 2, run.sup_diffs[i]);
}

}  // namespace srd
