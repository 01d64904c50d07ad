#include "srd/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/core.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "halton.hpp"
#include "srd/errors.hpp"

namespace srd {

namespace {

constexpr double kWindow = 0.95;
// Relative step of the difference oracles, near eps^(1/4): balances the
// O(h^2) truncation of second differences against O(eps/h^2) cancellation.
constexpr double kFdStep = 2e-4;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string g17(double x) { return fmt::format("{:.17g}", x); }

SolverConfig solver_config(double nu, const Resolution& res, double t_end) {
    SolverConfig cfg;
    cfg.nu = nu;
    cfg.dt_init = res.dt;
    cfg.dt_min = res.dt_min;
    cfg.floor = res.floor;
    cfg.t_end = t_end;
    cfg.snapshot_every = res.snapshot_every;
    cfg.scheme = res.scheme;
    return cfg;
}

std::string resolution_params(const Resolution& res) {
    return fmt::format("radius={};cells={};dt={};scheme={};floor={};dt_min={};snapshot_every={}", g17(res.radius),
                       res.cells, g17(res.dt), res.scheme == DiffusionScheme::TrBdf2 ? "tr-bdf2" : "backward-euler",
                       g17(res.floor), g17(res.dt_min), g17(res.snapshot_every));
}

// Largest violation seen over all checked nodes, with its location.
struct Worst {
    double value = -std::numeric_limits<double>::infinity();
    Location where;

    void update(double v, double r, double t) {
        if (v > value) {
            value = v;
            where = {r, t};
        }
    }
};

// Applies `check(r2, u, t)` to every non-extinct node of f.
template <class Check>
void for_live_nodes(const Field& f, Check&& check) {
    for (std::size_t j = 0; j < f.values.size(); ++j) {
        if (f.is_extinct(j)) continue;
        const double r = f.grid.node(j);
        check(r, r * r, f.values[j], f.time);
    }
}

void finish(VerificationReport& rep, const Worst& worst, const Stopwatch& clock) {
    rep.worst_violation = worst.value;
    rep.where = worst.where;
    rep.passed = rep.worst_violation <= rep.tolerance;
    rep.stats.wall_ms = clock.ms();
}

// Central or (near t = 0) second-order forward difference of g at t.
template <class G>
double time_difference(G&& g, double t, double ht) {
    if (t >= ht) return (g(t + ht) - g(t - ht)) / (2.0 * ht);
    return (-3.0 * g(t) + 4.0 * g(t + ht) - g(t + 2.0 * ht)) / (2.0 * ht);
}

double fd_laplacian(const Barrier& b, double r, double t, double h) {
    const int n = dim_of(b);
    auto f = [&](double x) { return eval(b, x * x, t); };
    const double f0 = f(r);
    if (r == 0.0) return 2.0 * n * (f(h) - f0) / (h * h);
    const double fp = f(r + h);
    const double fm = f(r - h);
    return (fp - 2.0 * f0 + fm) / (h * h) + (n - 1) / r * (fp - fm) / (2.0 * h);
}

std::string barrier_params(const Barrier& b) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GrowthLower> || std::is_same_v<T, GrowthUpper>) {
                const auto& e = v.env;
                return fmt::format("nu={};dim={};alpha1={};alpha2={};eps={};a1={};a2={};b1={};b2={}", g17(e.nu),
                                   e.dim, g17(e.alpha1), g17(e.alpha2), g17(e.eps), g17(e.a1), g17(e.a2), g17(e.b1),
                                   g17(e.b2));
            } else if constexpr (std::is_same_v<T, DecaySupersolution>) {
                const auto& p = v.params;
                return fmt::format("nu={};dim={};beta={};horizon={};a3={}", g17(p.nu), p.dim, g17(p.beta),
                                   g17(p.horizon), g17(p.a3));
            } else if constexpr (std::is_same_v<T, Homogeneous>) {
                return fmt::format("nu={};horizon={}", g17(v.nu), g17(v.horizon));
            } else {
                const auto& p = v.params;
                return fmt::format("nu={};dim={};amp={};t1={};slope={};horizon={}", g17(p.nu), p.dim, g17(p.amp),
                                   g17(p.t1), g17(p.slope), g17(p.horizon));
            }
        },
        b);
}

// One admissible (barrier, r2, t) draw from an 8-dimensional Halton point, or
// nullopt when the parameter combination is rejected by the derivation.
struct SignSample {
    Barrier barrier;
    double r2;
    double t;
};

std::optional<SignSample> draw_sign_sample(BarrierFamily family, const detail::Halton& h) {
    auto x = [&](int d) { return h.coord(d); };
    const int dim = 1 + static_cast<int>(8.0 * x(1));
    try {
        switch (family) {
            case BarrierFamily::GrowthLower:
            case BarrierFamily::GrowthUpper: {
                const double nu = 0.1 + 3.9 * x(0);
                const double alpha1 = 1.0 / (1.0 + nu) + 2.0 * x(2);
                const double alpha2 = alpha1 + 2.0 * x(3);
                const double eps = 0.02 + 0.96 * x(4);
                const GrowthEnvelope base = derive_growth_params(nu, dim, alpha1, alpha2, eps);
                const GrowthEnvelope env =
                    derive_growth_params(nu, dim, alpha1, alpha2, eps, base.a1 * (1.0 + x(5)));
                const double r2 = 1e4 * x(6) * x(6);
                const double t = 100.0 * x(7);
                if (family == BarrierFamily::GrowthLower) return SignSample{GrowthLower{env}, r2, t};
                return SignSample{GrowthUpper{env}, r2, t};
            }
            case BarrierFamily::Decay: {
                const double nu = 0.02 + 0.98 * x(0);
                const double beta = (0.01 + 0.99 * x(2)) / (1.0 + nu);
                const double horizon = 0.1 + 9.9 * x(3);
                return SignSample{DecaySupersolution{derive_decay_params(nu, dim, beta, horizon)},
                                  1e4 * x(4) * x(4), 0.99 * horizon * x(5)};
            }
            case BarrierFamily::Homogeneous: {
                const double nu = 0.1 + 3.9 * x(0);
                const double horizon = 0.1 + 9.9 * x(2);
                return SignSample{make_homogeneous(nu, horizon), 1e4 * x(3) * x(3), 0.99 * horizon * x(4)};
            }
            case BarrierFamily::Cone: {
                const double nu = 0.1 + 3.9 * x(0);
                const double amp = cone_amplitude_bound(nu, dim) * (0.05 + 0.949 * x(2));
                const double t1 = 0.1 + 9.9 * x(3);
                const ConeBarrierParams p = derive_cone_params(nu, dim, amp, t1);
                return SignSample{ConeSupersolution{p}, 1e4 * x(4) * x(4), 0.99 * p.horizon * x(5)};
            }
        }
    } catch (const ConstraintViolation&) {
    }
    return std::nullopt;
}

SignExpectation family_sign(BarrierFamily f) {
    switch (f) {
        case BarrierFamily::GrowthLower: return SignExpectation::Nonnegative;
        case BarrierFamily::Homogeneous: return SignExpectation::Zero;
        default: return SignExpectation::Nonpositive;
    }
}

}  // namespace

const char* kind_name(CheckKind k) {
    switch (k) {
        case CheckKind::Envelope: return "envelope";
        case CheckKind::DecayRate: return "decay-rate";
        case CheckKind::HomogeneousRate: return "homogeneous-rate";
        case CheckKind::ConeExtinction: return "cone-extinction";
        case CheckKind::Comparison: return "comparison";
        case CheckKind::FdConsistency: return "fd-consistency";
        case CheckKind::PicardBounds: return "picard-bounds";
        case CheckKind::ResidualSign: return "residual-sign";
    }
    return "unknown";
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", h);
}

std::string VerificationReport::params_hash() const {
    return fnv1a_hex(fmt::format("{}|{}|{}", kind_name(kind), params, g17(tolerance)));
}

VerificationReport verify_envelope(const GrowthEnvelope& env, const Resolution& res, double tolerance,
                                   double t_end) {
    const Stopwatch clock;
    const Barrier lower = GrowthLower{env};
    const Barrier upper = GrowthUpper{env};
    VerificationReport rep;
    rep.kind = CheckKind::Envelope;
    rep.tolerance = tolerance;
    rep.params = fmt::format("{};t_end={};{}", barrier_params(lower), g17(t_end), resolution_params(res));

    const RadialGrid grid = build_grid(res.radius, res.cells, env.dim);
    const Field u0 = make_field(grid, [&](double r2) { return eval(lower, r2, 0.0); });
    Worst below, above;
    auto check = [&](const Field& f) {
        for_live_nodes(f, [&](double r, double r2, double u, double t) {
            const double lo = eval(lower, r2, t);
            const double hi = eval(upper, r2, t);
            below.update((lo - u) / lo, r, t);
            above.update((u - hi) / hi, r, t);
        });
    };
    check(u0);
    Trajectory traj = simulate(u0, solver_config(env.nu, res, t_end), DirichletBarrier{lower}, check);

    Worst worst = below;
    worst.update(above.value, above.where.r, above.where.t);
    rep.stats.steps = traj.stats.steps;
    rep.details = {{"lower_violation", g17(below.value)},
                   {"upper_violation", g17(above.value)},
                   {"extinct", traj.extinction_time ? "true" : "false"},
                   {"origin_value_at_end", g17(traj.snapshots.back().values[0])}};
    rep.trajectory = std::move(traj);
    finish(rep, worst, clock);
    return rep;
}

VerificationReport verify_decay_rate(const DecayBarrierParams& p, const Resolution& res, double tolerance) {
    const Stopwatch clock;
    const Barrier psi = DecaySupersolution{p};
    VerificationReport rep;
    rep.kind = CheckKind::DecayRate;
    rep.tolerance = tolerance;
    rep.params = fmt::format("{};{}", barrier_params(psi), resolution_params(res));

    const double t_stop = kWindow * p.horizon;
    const RadialGrid grid = build_grid(res.radius, res.cells, p.dim);
    const Field u0 = make_field(grid, [&](double r2) { return eval(psi, r2, 0.0); });
    Worst worst;
    auto check = [&](const Field& f) {
        for_live_nodes(f, [&](double r, double r2, double u, double t) {
            const double bound = eval(psi, r2, t);
            worst.update((u - bound) / bound, r, t);
        });
    };
    check(u0);
    Trajectory traj = simulate(u0, solver_config(p.nu, res, t_stop), DirichletBarrier{psi}, check);

    rep.stats.steps = traj.stats.steps;
    rep.details = {{"checked_window", fmt::format("[0, {}]", g17(t_stop))},
                   {"excluded_window", fmt::format("({}, {})", g17(t_stop), g17(p.horizon))},
                   {"first_extinction", traj.extinction_time ? g17(*traj.extinction_time) : "none"},
                   {"origin_value_at_end", g17(traj.snapshots.back().values[0])}};
    rep.trajectory = std::move(traj);
    finish(rep, worst, clock);
    return rep;
}

VerificationReport verify_homogeneous_rate(double nu, double sup0, const Resolution& res, double tolerance,
                                           const Profile& profile) {
    const Stopwatch clock;
    const Homogeneous psi = homogeneous_from_sup(nu, sup0);
    const double horizon = psi.horizon;
    VerificationReport rep;
    rep.kind = CheckKind::HomogeneousRate;
    rep.tolerance = tolerance;
    rep.params = fmt::format("nu={};sup0={};profile={};{}", g17(nu), g17(sup0), profile ? "custom" : "constant",
                             resolution_params(res));

    const RadialGrid grid = build_grid(res.radius, res.cells, 1);
    const Field u0 = profile ? make_field(grid, profile) : make_field(grid, [sup0](double) { return sup0; });
    const double u0_max = *std::ranges::max_element(u0.values);
    if (u0_max > sup0 * (1.0 + 1e-12))
        throw ConstraintViolation(fmt::format("initial profile exceeds sup0 = {} (max {})", sup0, u0_max));

    const double t_check = kWindow * horizon;
    Worst worst;
    double closed_form_error = 0.0;
    auto check = [&](const Field& f) {
        if (f.time > t_check) return;
        const double bound = eval(psi, 0.0, f.time);
        for_live_nodes(f, [&](double r, double, double u, double t) {
            worst.update((u - bound) / bound, r, t);
            closed_form_error = std::max(closed_form_error, std::abs(u - bound));
        });
    };
    check(u0);
    SolverConfig cfg = solver_config(nu, res, 2.0 * horizon);
    Trajectory traj = simulate(u0, cfg, NeumannZero{}, check);

    // Every node must be extinct by T; the last node to go sets the excess.
    double last = 0.0;
    std::size_t last_node = 0;
    bool all_extinct = true;
    for (std::size_t j = 0; j < traj.node_extinction_time.size(); ++j) {
        const auto& te = traj.node_extinction_time[j];
        if (!te) {
            all_extinct = false;
            continue;
        }
        if (*te > last) {
            last = *te;
            last_node = j;
        }
    }
    if (!all_extinct) last = cfg.t_end;
    worst.update(last - horizon, grid.node(last_node), last);

    rep.stats.steps = traj.stats.steps;
    rep.details = {{"horizon", g17(horizon)},
                   {"first_extinction", traj.extinction_time ? g17(*traj.extinction_time) : "none"},
                   {"first_extinct_node", traj.extinct_node ? std::to_string(*traj.extinct_node) : "none"},
                   {"last_extinction", all_extinct ? g17(last) : "none"},
                   {"extinction_excess", g17(last - horizon)},
                   {"checked_window", fmt::format("[0, {}]", g17(t_check))},
                   {"closed_form_error", g17(closed_form_error)}};
    rep.trajectory = std::move(traj);
    finish(rep, worst, clock);
    return rep;
}

VerificationReport verify_cone_extinction(const ConeBarrierParams& p, const Resolution& res, double tolerance) {
    const Stopwatch clock;
    const Barrier psi = ConeSupersolution{p};
    VerificationReport rep;
    rep.kind = CheckKind::ConeExtinction;
    rep.tolerance = tolerance;
    rep.params = fmt::format("{};{}", barrier_params(psi), resolution_params(res));

    const double t_check = kWindow * p.horizon;
    const RadialGrid grid = build_grid(res.radius, res.cells, p.dim);
    const Field u0 = make_field(grid, [&](double r2) { return eval(psi, r2, 0.0); });
    Worst worst;
    auto check = [&](const Field& f) {
        if (f.time > t_check) return;
        for_live_nodes(f, [&](double r, double r2, double u, double t) {
            const double bound = eval(psi, r2, t);
            worst.update((u - bound) / bound, r, t);
        });
    };
    check(u0);
    SolverConfig cfg = solver_config(p.nu, res, p.horizon + std::max(10.0 * tolerance, 0.01));
    cfg.stop_on_first_extinction = true;
    Trajectory traj = simulate(u0, cfg, DirichletBarrier{psi}, check);

    // Time at which the origin goes extinct; a run in which another node goes
    // first (or nothing does) counts as no origin extinction within t_end.
    const bool origin_first = traj.extinct_node && *traj.extinct_node == 0;
    const double origin_time = origin_first ? *traj.extinction_time : cfg.t_end;
    worst.update(origin_time - p.horizon, 0.0, origin_time);

    rep.stats.steps = traj.stats.steps;
    rep.details = {{"horizon", g17(p.horizon)},
                   {"first_extinction", traj.extinction_time ? g17(*traj.extinction_time) : "none"},
                   {"first_extinct_node", traj.extinct_node ? std::to_string(*traj.extinct_node) : "none"},
                   {"origin_extinction_excess", g17(origin_time - p.horizon)},
                   {"checked_window", fmt::format("[0, {}]", g17(t_check))}};
    rep.trajectory = std::move(traj);
    finish(rep, worst, clock);
    return rep;
}

VerificationReport verify_comparison(const Field& low, const Field& high, const BoundaryCondition& bc_low,
                                     const BoundaryCondition& bc_high, const SolverConfig& cfg, double tolerance) {
    const Stopwatch clock;
    cfg.validate();
    if (!(low.grid == high.grid)) throw ConstraintViolation("compared fields must share a grid");
    if (is_dirichlet(bc_low) != is_dirichlet(bc_high))
        throw ConstraintViolation("compared problems must use the same kind of boundary condition");
    for (std::size_t j = 0; j < low.values.size(); ++j)
        if (low.values[j] > high.values[j])
            throw ConstraintViolation(fmt::format("initial data crossed at r = {}: {} > {}", low.grid.node(j),
                                                  low.values[j], high.values[j]));
    if (is_dirichlet(bc_low)) {
        constexpr int kBoundarySamples = 65;
        for (int i = 0; i < kBoundarySamples; ++i) {
            const double t = cfg.t_end * i / (kBoundarySamples - 1);
            const double a = boundary_value(bc_low, low.grid.radius(), t);
            const double b = boundary_value(bc_high, low.grid.radius(), t);
            if (a > b)
                throw ConstraintViolation(fmt::format("boundary data crossed at t = {}: {} > {}", t, a, b));
        }
    }

    VerificationReport rep;
    rep.kind = CheckKind::Comparison;
    rep.tolerance = tolerance;
    rep.params = fmt::format("low_hash={};high_hash={};nu={};dt={};t_end={};floor={}",
                             fnv1a_hex(fmt::format("{}", fmt::join(low.values, ","))),
                             fnv1a_hex(fmt::format("{}", fmt::join(high.values, ","))), g17(cfg.nu),
                             g17(cfg.dt_init), g17(cfg.t_end), g17(cfg.floor));

    Field a = low, b = high;
    Worst worst;
    auto check = [&] {
        for (std::size_t j = 0; j < a.values.size(); ++j)
            worst.update(a.values[j] - b.values[j], a.grid.node(j), a.time);
    };
    check();
    const double p = 1.0 + cfg.nu;
    const double t_stop = a.time + cfg.t_end;
    while (t_stop - a.time > 1e-12 * std::max(1.0, t_stop)) {
        double umin = std::numeric_limits<double>::infinity();
        for (const Field* f : {&a, &b})
            for (std::size_t j = 0; j < f->values.size(); ++j)
                if (!f->is_extinct(j)) umin = std::min(umin, f->values[j]);
        if (!std::isfinite(umin)) break;
        double dt = std::min(cfg.dt_init, t_stop - a.time);
        dt = std::min(dt, std::max(cfg.dt_min, cfg.dt_safety * std::pow(umin, p) / p));
        StepResult sa = step(a, cfg, bc_low, dt);
        StepResult sb = step(b, cfg, bc_high, dt);
        if (sa.dt_used != sb.dt_used)
            throw SimulationFailed(fmt::format("lockstep lost at t = {}: {} vs {}", a.time, sa.dt_used, sb.dt_used));
        a = std::move(sa.field);
        b = std::move(sb.field);
        b.time = a.time;
        ++rep.stats.steps;
        check();
    }
    rep.details = {{"final_time", g17(a.time)}};
    finish(rep, worst, clock);
    return rep;
}

std::vector<VerificationReport> comparison_suite(const GrowthEnvelope& env, const Resolution& res, double t_end,
                                                 std::uint64_t seed, int pairs, double tolerance) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> scale(0.5, 1.0);
    const Barrier psi = GrowthLower{env};
    const RadialGrid grid = build_grid(res.radius, res.cells, env.dim);
    const SolverConfig cfg = solver_config(env.nu, res, t_end);
    std::vector<VerificationReport> out;
    for (int i = 0; i < pairs; ++i) {
        double c1 = scale(rng), c2 = scale(rng);
        if (c1 > c2) std::swap(c1, c2);
        const Field low = make_field(grid, [&](double r2) { return c1 * eval(psi, r2, 0.0); });
        const Field high = make_field(grid, [&](double r2) { return c2 * eval(psi, r2, 0.0); });
        VerificationReport rep =
            verify_comparison(low, high, DirichletBarrier{psi, c1}, DirichletBarrier{psi, c2}, cfg, tolerance);
        rep.params = fmt::format("{};c_low={};c_high={};seed={};pair={};{}", barrier_params(psi), g17(c1),
                                 g17(c2), seed, i, resolution_params(res));
        rep.details.insert(rep.details.begin(), {{"c_low", g17(c1)}, {"c_high", g17(c2)}});
        out.push_back(std::move(rep));
    }
    return out;
}

VerificationReport fd_consistency_check(const Barrier& b, int samples, double tolerance, std::uint64_t seed) {
    const Stopwatch clock;
    VerificationReport rep;
    rep.kind = CheckKind::FdConsistency;
    rep.tolerance = tolerance;
    rep.params = fmt::format("family={};{};samples={};seed={}", family_name(family_of(b)), barrier_params(b),
                             samples, seed);

    const auto horizon = horizon_of(b);
    const bool cone = family_of(b) == BarrierFamily::Cone;
    const double r2_max = cone ? 25.0 : 100.0;
    const double t_max = horizon ? 0.9 * *horizon : 10.0;
    double cone_slope = 0.0;
    if (cone) cone_slope = std::get<ConeSupersolution>(b).params.slope;
    constexpr double kVertexExclusion = 1e-8;

    // Spatial and temporal steps at (r2, t); nullopt inside the cone vertex exclusion.
    auto steps_at = [&](double r2, double t) -> std::optional<std::pair<double, double>> {
        if (!cone)
            return std::pair{kFdStep * (1.0 + std::sqrt(r2)), kFdStep * (horizon ? *horizon - t : 1.0 + t)};
        const double s = cone_slope * (*horizon - t) + r2;
        if (s < kVertexExclusion) return std::nullopt;
        return std::pair{kFdStep * std::sqrt(s), std::min(kFdStep * s / cone_slope, 0.5 * (*horizon - t))};
    };
    auto lap_discrepancy = [&](double r, double t, double h) {
        const double lap = laplacian(b, r * r, t);
        return std::abs(lap - fd_laplacian(b, r, t, h)) / (1.0 + std::abs(lap));
    };

    Worst lap_worst, dt_worst;
    long skipped = 0, checked = 0;
    detail::Halton seq(seed);
    for (int i = 0; i < samples; ++i, seq.advance()) {
        const double r2 = r2_max * seq.coord(0);
        const double t = t_max * seq.coord(1);
        const double r = std::sqrt(r2);
        const auto st = steps_at(r2, t);
        if (!st) {
            ++skipped;
            continue;
        }
        const auto [h, ht] = *st;
        lap_worst.update(lap_discrepancy(r, t, h), r, t);
        const double psi_t = time_derivative(b, r2, t);
        const double psi_t_fd = time_difference([&](double s) { return eval(b, r2, s); }, t, ht);
        dt_worst.update(std::abs(psi_t - psi_t_fd) / (1.0 + std::abs(psi_t)), r, t);
        ++checked;
    }
    Worst worst = lap_worst;
    worst.update(dt_worst.value, dt_worst.where.r, dt_worst.where.t);
    if (checked == 0) worst.update(0.0, 0.0, 0.0);
    rep.stats.steps = checked;
    rep.details = {{"checked", std::to_string(checked)},
                   {"skipped_near_vertex", std::to_string(skipped)},
                   {"laplacian_discrepancy", g17(lap_worst.value)},
                   {"time_derivative_discrepancy", g17(dt_worst.value)}};
    // Truncation error of the oracle shrinks fourfold under step halving.
    if (checked > 0) {
        const Location w = lap_worst.where;
        const double h = steps_at(w.r * w.r, w.t)->first;
        const double half = lap_discrepancy(w.r, w.t, 0.5 * h);
        rep.details.emplace_back("laplacian_discrepancy_half_step", g17(half));
        rep.details.emplace_back("laplacian_step_ratio", g17(half > 0.0 ? lap_worst.value / half : 0.0));
    }
    finish(rep, worst, clock);
    return rep;
}

VerificationReport residual_sign_suite(BarrierFamily family, int samples, std::uint64_t seed, double tolerance) {
    const Stopwatch clock;
    VerificationReport rep;
    rep.kind = CheckKind::ResidualSign;
    rep.tolerance = tolerance;
    rep.params = fmt::format("family={};samples={};seed={}", family_name(family), samples, seed);

    Worst worst;
    std::string worst_barrier;
    long violations = 0, rejected = 0, drawn = 0;
    detail::Halton seq(seed);
    while (drawn < samples) {
        const auto sample = draw_sign_sample(family, seq);
        seq.advance();
        if (!sample) {
            ++rejected;
            continue;
        }
        ++drawn;
        const double v = sign_violation(sample->barrier, sample->r2, sample->t);
        if (v > tolerance) ++violations;
        if (v > worst.value) worst_barrier = barrier_params(sample->barrier);
        worst.update(v, std::sqrt(sample->r2), sample->t);
    }
    rep.stats.steps = drawn;
    rep.details = {{"samples", std::to_string(drawn)},
                   {"rejected_draws", std::to_string(rejected)},
                   {"violations", std::to_string(violations)},
                   {"expected_sign", sign_name(family_sign(family))},
                   {"worst_parameters", worst_barrier}};
    finish(rep, worst, clock);
    return rep;
}

VerificationReport verify_picard_bounds(const PicardConfig& cfg, double tolerance, double agreement_tolerance) {
    const Stopwatch clock;
    VerificationReport rep;
    rep.kind = CheckKind::PicardBounds;
    rep.tolerance = tolerance;
    rep.params = fmt::format("nu={};radius={};cells={};dim={};t1={};max_iters={};lin_dt={};u0_hash={};agreement={}",
                             g17(cfg.nu), g17(cfg.grid.radius()), cfg.grid.cells(), cfg.grid.dim(), g17(cfg.t1),
                             cfg.max_iters, g17(cfg.lin_dt),
                             fnv1a_hex(fmt::format("{}", fmt::join(cfg.u0.values, ","))), g17(agreement_tolerance));

    const PicardRun run = iterate(cfg);
    const BoundReport bounds = check_bounds(run, run.delta);
    Worst worst;
    worst.update(bounds.lower_violation, bounds.lower_r, bounds.lower_t);
    worst.update(bounds.upper_violation, bounds.upper_r, bounds.upper_t);

    // Direct nonlinear solve on the same grid and lattice.
    const SpaceTimeArray& last = run.iterates.back();
    const double dt = last.times.size() > 1 ? last.times[1] : run.horizon;
    SolverConfig direct;
    direct.nu = cfg.nu;
    direct.dt_init = dt;
    direct.t_end = run.horizon;
    direct.snapshot_every = run.horizon;
    direct.scheme = DiffusionScheme::TrBdf2;
    double agreement = 0.0;
    Location agreement_at;
    long compared = 0;
    auto compare = [&](const Field& f) {
        const double s = f.time / dt;
        const auto i = static_cast<std::size_t>(std::llround(s));
        if (i >= last.slices() || std::abs(s - static_cast<double>(i)) > 1e-6) return;
        ++compared;
        for (std::size_t j = 0; j < f.values.size(); ++j) {
            const double d = std::abs(f.values[j] - last.at(i, j));
            if (d > agreement) {
                agreement = d;
                agreement_at = {f.grid.node(j), f.time};
            }
        }
    };
    const Trajectory traj = simulate(cfg.u0, direct, cfg.bdry, compare);

    rep.stats.steps = traj.stats.steps;
    rep.details = {{"delta", g17(run.delta)},
                   {"horizon", g17(run.horizon)},
                   {"iterations", std::to_string(run.iterates.size())},
                   {"converged", run.converged ? "true" : "false"},
                   {"final_sup_diff", run.sup_diffs.empty() ? "none" : g17(run.sup_diffs.back())},
                   {"lower_violation", g17(bounds.lower_violation)},
                   {"upper_violation", g17(bounds.upper_violation)},
                   {"direct_solve_agreement", g17(agreement)},
                   {"agreement_r", g17(agreement_at.r)},
                   {"agreement_t", g17(agreement_at.t)},
                   {"agreement_tolerance", g17(agreement_tolerance)},
                   {"compared_slices", std::to_string(compared)}};
    finish(rep, worst, clock);
    // The verdict also requires agreement with the direct solve.
    rep.passed = rep.passed && agreement <= agreement_tolerance && compared > 0;
    return rep;
}

void write_report(std::ostream& out, const VerificationReport& rep) {
    fmt::print(out, "kind = {}\n", kind_name(rep.kind));
    fmt::print(out, "params = {}\n", rep.params);
    fmt::print(out, "params_hash = {}\n", rep.params_hash());
    fmt::print(out, "tolerance = {}\n", g17(rep.tolerance));
    fmt::print(out, "verdict = {}\n", rep.passed ? "pass" : "fail");
    fmt::print(out, "worst_violation = {}\n", g17(rep.worst_violation));
    fmt::print(out, "where_r = {}\n", g17(rep.where.r));
    fmt::print(out, "where_t = {}\n", g17(rep.where.t));
    fmt::print(out, "steps = {}\n", rep.stats.steps);
    for (const auto& [key, value] : rep.details) fmt::print(out, "{} = {}\n", key, value);
}

void write_summary_header(std::ostream& out) {
    fmt::print(out, "kind,params_hash,verdict,worst_violation,where_r,where_t,wall_ms\n");
}

void write_summary_row(std::ostream& out, const VerificationReport& rep) {
    fmt::print(out, "{},{},{},{},{},{},{:.3f}\n", kind_name(rep.kind), rep.params_hash(),
               rep.passed ? "pass" : "fail", g17(rep.worst_violation), g17(rep.where.r), g17(rep.where.t),
               rep.stats.wall_ms);
}

}  // namespace srd
