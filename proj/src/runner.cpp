#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "srd/config.hpp"
#include "srd/errors.hpp"
#include "srd/verify.hpp"

namespace srd {

namespace {

namespace fs = std::filesystem;

using Reports = std::vector<VerificationReport>;
using Task = std::function<Reports()>;

constexpr BarrierFamily kFamilies[] = {BarrierFamily::GrowthLower, BarrierFamily::GrowthUpper, BarrierFamily::Decay,
                                       BarrierFamily::Homogeneous, BarrierFamily::Cone};

std::string g17(double x) { return fmt::format("{:.17g}", x); }

Resolution resolution(const RunConfig& c) {
    Resolution r;
    r.radius = c.number("radius");
    r.cells = c.integer("cells");
    r.dt = c.number("dt");
    r.dt_min = c.number("dt_min");
    r.floor = c.number("floor");
    r.snapshot_every = c.number("snapshot_every");
    r.scheme = c.text("scheme") == "tr-bdf2" ? DiffusionScheme::TrBdf2 : DiffusionScheme::BackwardEuler;
    return r;
}

bool has(const RunConfig& c, const char* key) { return c.params.contains(key); }

GrowthEnvelope growth(const RunConfig& c) {
    const double alpha1 = c.number("alpha1");
    const double alpha2 = has(c, "alpha2") ? c.number("alpha2") : alpha1;
    const auto a2 = has(c, "a2") ? std::optional<double>(c.number("a2")) : std::nullopt;
    return derive_growth_params(c.number("nu"), c.integer("dim"), alpha1, alpha2, c.number("eps"), a2);
}

Barrier barrier(const RunConfig& c, BarrierFamily f) {
    switch (f) {
        case BarrierFamily::GrowthLower: return GrowthLower{growth(c)};
        case BarrierFamily::GrowthUpper: return GrowthUpper{growth(c)};
        case BarrierFamily::Decay:
            return DecaySupersolution{
                derive_decay_params(c.number("nu"), c.integer("dim"), c.number("beta"), c.number("horizon"))};
        case BarrierFamily::Homogeneous: return make_homogeneous(c.number("nu"), c.number("horizon"));
        case BarrierFamily::Cone:
            return ConeSupersolution{derive_cone_params(c.number("nu"), c.integer("dim"), c.number("amp"), c.number("t1"))};
    }
    throw ConstraintViolation("unknown barrier family");
}

// Section defaults of another command, used by the suite.
RunConfig defaults_of(Command c, std::uint64_t seed) {
    RunConfig cfg = parse_config(fmt::format("command = {}\n", command_name(c)));
    cfg.seed = seed;
    return cfg;
}

RunConfig family_defaults(BarrierFamily f, std::uint64_t seed) {
    RunConfig cfg = parse_config(fmt::format("command = fd-check\n[fd-check]\nfamily = {}\n", family_name(f)));
    cfg.seed = seed;
    return cfg;
}

VerificationReport sign_report(const Barrier& b, const SignReport& s, double r2_max, double t_max, int samples) {
    VerificationReport rep;
    rep.kind = CheckKind::ResidualSign;
    rep.params = fmt::format("family={};r2_max={};t_max={};samples={}", family_name(family_of(b)), g17(r2_max),
                             g17(t_max), samples);
    rep.tolerance = kSignTolerance;
    rep.passed = s.passed;
    rep.worst_violation = s.worst_relative;
    rep.where = {std::sqrt(s.worst_r2), s.worst_t};
    rep.details = {{"expected_sign", sign_name(s.expected)},
                   {"samples", std::to_string(s.samples)},
                   {"violations", std::to_string(s.violations)},
                   {"min_residual", g17(s.min_residual)},
                   {"max_residual", g17(s.max_residual)}};
    return rep;
}

PicardConfig picard_config(const RunConfig& c) {
    PicardConfig p;
    p.nu = c.number("nu");
    p.grid = build_grid(c.number("radius"), c.integer("cells"), c.integer("dim"));
    const double delta = c.number("delta");
    p.u0 = make_field(p.grid, [delta](double) { return delta; });
    p.bdry = DirichletConstant{delta};
    p.t1 = c.number("t1");
    p.max_iters = c.integer("max_iters");
    p.stop_tol = c.number("stop_tol");
    p.lin_dt = compute_horizon(p) / c.integer("lin_steps");
    return p;
}

void add_tasks(const RunConfig& c, double scale, std::vector<Task>& tasks);

void add_suite_tasks(const RunConfig& c, double scale, std::vector<Task>& tasks) {
    const std::string checks = c.text("checks");
    auto wanted = [&](const std::string& name) {
        if (checks == "all") return true;
        std::istringstream in(checks);
        std::string item;
        while (std::getline(in, item, ','))
            if (item == name) return true;
        return false;
    };
    const std::pair<const char*, Command> simulated[] = {{"homogeneous", Command::Homogeneous},
                                                         {"envelope", Command::Envelope},
                                                         {"cone", Command::Cone},
                                                         {"decay", Command::Decay},
                                                         {"picard", Command::Picard},
                                                         {"compare", Command::Compare}};
    for (const auto& [name, cmd] : simulated)
        if (wanted(name)) add_tasks(defaults_of(cmd, c.seed), scale, tasks);
    if (wanted("residual-sign")) {
        const int samples = c.integer("samples");
        for (BarrierFamily f : kFamilies)
            tasks.emplace_back([f, samples, seed = c.seed, scale] {
                return Reports{residual_sign_suite(f, samples, seed, kSignTolerance * scale)};
            });
    }
    if (wanted("fd")) {
        const int samples = c.integer("fd_samples");
        for (BarrierFamily f : kFamilies) {
            const RunConfig fc = family_defaults(f, c.seed);
            const double tol = fc.number("tolerance") * scale;
            tasks.emplace_back([fc, f, samples, tol] {
                return Reports{fd_consistency_check(barrier(fc, f), samples, tol, fc.seed)};
            });
        }
    }
}

void add_tasks(const RunConfig& c, double scale, std::vector<Task>& tasks) {
    auto tol = [&] { return c.number("tolerance") * scale; };
    switch (c.command) {
        case Command::Envelope:
            tasks.emplace_back([c, t = tol()] {
                return Reports{verify_envelope(growth(c), resolution(c), t, c.number("t_end"))};
            });
            break;
        case Command::Decay:
            tasks.emplace_back([c, t = tol()] {
                const auto p = derive_decay_params(c.number("nu"), c.integer("dim"), c.number("beta"), c.number("horizon"));
                return Reports{verify_decay_rate(p, resolution(c), t)};
            });
            break;
        case Command::Homogeneous:
            tasks.emplace_back([c, t = tol()] {
                const double sup0 = c.number("sup0");
                Profile profile;
                if (c.text("profile") == "decaying") profile = [sup0](double r2) { return sup0 / (1.0 + r2); };
                return Reports{verify_homogeneous_rate(c.number("nu"), sup0, resolution(c), t, profile)};
            });
            break;
        case Command::Cone:
            tasks.emplace_back([c, t = tol()] {
                const auto p = derive_cone_params(c.number("nu"), c.integer("dim"), c.number("amp"), c.number("t1"));
                return Reports{verify_cone_extinction(p, resolution(c), t)};
            });
            break;
        case Command::Picard:
            tasks.emplace_back([c, t = tol(), a = c.number("agreement") * scale] {
                return Reports{verify_picard_bounds(picard_config(c), t, a)};
            });
            break;
        case Command::Compare:
            tasks.emplace_back([c, t = tol()] {
                return comparison_suite(growth(c), resolution(c), c.number("t_end"), c.seed, c.integer("pairs"), t);
            });
            break;
        case Command::FdCheck: {
            const std::string fam = c.text("family");
            for (BarrierFamily f : kFamilies) {
                if (fam != "all" && fam != family_name(f)) continue;
                const RunConfig fc = fam == "all" ? family_defaults(f, c.seed) : c;
                tasks.emplace_back([fc, f, samples = c.integer("samples"), t = tol(), seed = c.seed] {
                    return Reports{fd_consistency_check(barrier(fc, f), samples, t, seed)};
                });
            }
            break;
        }
        case Command::BarriersCheck:
            tasks.emplace_back([c] {
                const Barrier b = barrier(c, *parse_family(c.text("family")));
                const double r2_max = c.number("r2_max"), t_max = c.number("t_max");
                const int samples = c.integer("samples");
                return Reports{sign_report(b, verify_sign_on_grid(b, r2_max, t_max, samples, c.seed), r2_max, t_max,
                                           samples)};
            });
            break;
        case Command::Suite: add_suite_tasks(c, scale, tasks); break;
        case Command::Simulate: break;
    }
}

// Runs every task on a pool of `jobs` workers; results keep the task order.
std::vector<Reports> run_tasks(const std::vector<Task>& tasks, int jobs) {
    std::vector<Reports> results(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                results[i] = tasks[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(tasks.size(), jobs > 0 ? jobs : hw);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

fs::path base_dir(const RunConfig& cfg, const RunOptions& options) {
    if (options.output_dir) return *options.output_dir;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("SINGULAR_RD_OUTPUT"); env && *env) return env;
    return "out";
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

void write_header(std::ostream& out, const RunConfig& cfg, double scale, const std::string& hash) {
    fmt::print(out, "command = {}\n", command_name(cfg.command));
    fmt::print(out, "config_hash = {}\n", hash);
    fmt::print(out, "seed = {}\n", cfg.seed);
    fmt::print(out, "tolerance_scale = {}\n", g17(scale));
    for (const auto& [k, v] : cfg.params) fmt::print(out, "param.{} = {}\n", k, v);
    for (const auto& [k, v] : cfg.derived) fmt::print(out, "derived.{} = {}\n", k, v);
}

int run_simulate(const RunConfig& c, const fs::path& dir, const std::string& hash, double scale, std::ostream& log) {
    const Barrier b = barrier(c, *parse_family(c.text("family")));
    const auto grid = build_grid(c.number("radius"), c.integer("cells"), dim_of(b));
    const double u_init = c.number("initial_value");
    const Field u0 = c.text("initial") == "constant" ? make_field(grid, [u_init](double) { return u_init; })
                                                     : make_field(grid, [&b](double r2) { return eval(b, r2, 0.0); });
    BoundaryCondition bc = NeumannZero{};
    if (c.text("boundary") == "barrier") bc = DirichletBarrier{b};
    if (c.text("boundary") == "constant") bc = DirichletConstant{c.number("boundary_value")};

    SolverConfig s;
    s.nu = nu_of(b);
    s.dt_init = c.number("dt");
    s.dt_safety = c.number("dt_safety");
    s.dt_min = c.number("dt_min");
    s.floor = c.number("floor");
    s.t_end = c.number("t_end");
    s.snapshot_every = c.number("snapshot_every");
    s.scheme = c.text("scheme") == "tr-bdf2" ? DiffusionScheme::TrBdf2 : DiffusionScheme::BackwardEuler;
    s.stop_on_first_extinction = c.text("stop_on_first_extinction") == "true";
    const Trajectory traj = simulate(u0, s, bc);

    fs::create_directories(dir);
    {
        auto out = open_output(dir / "snapshots.csv");
        write_snapshots_csv(out, traj);
        close_output(out, dir / "snapshots.csv");
    }
    {
        auto out = open_output(dir / "report.txt");
        write_header(out, c, scale, hash);
        fmt::print(out, "steps = {}\n", traj.stats.steps);
        fmt::print(out, "snapshots = {}\n", traj.snapshots.size());
        fmt::print(out, "final_time = {}\n", g17(traj.snapshots.back().time));
        if (traj.stats.steps > 0) {
            fmt::print(out, "dt_min_used = {}\n", g17(traj.stats.dt_min));
            fmt::print(out, "dt_max_used = {}\n", g17(traj.stats.dt_max));
        }
        if (traj.extinction_time) {
            fmt::print(out, "extinction_time = {}\n", g17(*traj.extinction_time));
            fmt::print(out, "extinct_node = {}\n", *traj.extinct_node);
        }
        close_output(out, dir / "report.txt");
    }
    {
        auto out = open_output(dir / "summary.csv");
        write_summary_header(out);
        close_output(out, dir / "summary.csv");
    }
    fmt::print(log, "simulate: {} steps, {} snapshots", traj.stats.steps, traj.snapshots.size());
    if (traj.extinction_time) fmt::print(log, ", first extinction t={} at node {}", g17(*traj.extinction_time), *traj.extinct_node);
    fmt::print(log, "\noutput: {}\n", dir.string());
    return kExitPass;
}

}  // namespace

int run(const RunConfig& config, const RunOptions& options, std::ostream& log) {
    RunConfig cfg = config;
    if (options.seed) cfg.seed = *options.seed;
    const double scale = options.tolerance_scale;
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw ConstraintViolation(fmt::format("tolerance scale must be positive, got {}", scale));
    const std::string hash = scale == 1.0 ? cfg.hash() : fnv1a_hex(cfg.hash() + ";tolerance_scale=" + g17(scale));
    const fs::path dir = base_dir(cfg, options) / fmt::format("{}-{}", command_name(cfg.command), hash);

    for (const auto& [k, v] : cfg.derived) fmt::print(log, "{} = {}\n", k, v);
    if (cfg.command == Command::Simulate) return run_simulate(cfg, dir, hash, scale, log);

    std::vector<Task> tasks;
    add_tasks(cfg, scale, tasks);
    Reports reports;
    for (auto& batch : run_tasks(tasks, options.jobs))
        for (auto& rep : batch) reports.push_back(std::move(rep));

    bool all_passed = true;
    for (auto& rep : reports) {
        if (!options.record_timing) rep.stats.wall_ms = 0.0;
        all_passed = all_passed && rep.passed;
    }

    try {
        fs::create_directories(dir);
    } catch (const fs::filesystem_error& e) {
        throw IoError(e.what());
    }
    {
        auto out = open_output(dir / "report.txt");
        write_header(out, cfg, scale, hash);
        fmt::print(out, "checks = {}\n", reports.size());
        fmt::print(out, "verdict = {}\n", all_passed ? "pass" : "fail");
        for (const auto& rep : reports) {
            fmt::print(out, "\n");
            write_report(out, rep);
        }
        close_output(out, dir / "report.txt");
    }
    {
        auto out = open_output(dir / "summary.csv");
        write_summary_header(out);
        for (const auto& rep : reports) write_summary_row(out, rep);
        close_output(out, dir / "summary.csv");
    }
    // Suite checks each get their own directory; other commands keep the first
    // trajectory as snapshots.csv.
    bool wrote_primary = false;
    for (const auto& rep : reports) {
        fs::path target = dir;
        if (cfg.command == Command::Suite) {
            target = dir / fmt::format("{}-{}", kind_name(rep.kind), rep.params_hash());
            fs::create_directories(target);
            auto out = open_output(target / "report.txt");
            write_report(out, rep);
            close_output(out, target / "report.txt");
        }
        if (!rep.trajectory) continue;
        const fs::path path = target / (wrote_primary && cfg.command != Command::Suite
                                            ? fmt::format("snapshots-{}.csv", rep.params_hash())
                                            : std::string("snapshots.csv"));
        auto out = open_output(path);
        write_snapshots_csv(out, *rep.trajectory);
        close_output(out, path);
        wrote_primary = true;
    }
    if (cfg.command == Command::Picard) {
        const PicardRun run = iterate(picard_config(cfg));
        auto out = open_output(dir / "iterates.csv");
        write_picard_csv(out, run);
        close_output(out, dir / "iterates.csv");
        const SpaceTimeArray& last = run.iterates.back();
        auto snap = open_output(dir / "snapshots.csv");
        fmt::print(snap, "t,r,u\n");
        for (std::size_t i = 0; i < last.slices(); ++i)
            for (std::size_t j = 0; j < last.grid.size(); ++j)
                fmt::print(snap, "{},{},{}\n", g17(last.times[i]), g17(last.grid.node(j)), g17(last.at(i, j)));
        close_output(snap, dir / "snapshots.csv");
    }

    for (const auto& rep : reports)
        fmt::print(log, "{:<16} {}  worst={:.3e}  tol={:.1e}  [{}]\n", kind_name(rep.kind),
                   rep.passed ? "PASS" : "FAIL", rep.worst_violation, rep.tolerance, rep.params_hash());
    fmt::print(log, "output: {}\n", dir.string());
    return all_passed ? kExitPass : kExitVerification;
}

int run_source(std::string_view source, const RunOptions& options, std::ostream& log, std::ostream& err) {
    try {
        return run(parse_config(source), options, log);
    } catch (const Error& e) {
        switch (e.kind()) {
            case ErrorKind::ParseError: fmt::print(err, "parse error: {}\n", e.what()); return kExitConfig;
            case ErrorKind::ConstraintViolation:
                fmt::print(err, "constraint violation: {}\n", e.what());
                return kExitConfig;
            case ErrorKind::DomainError: fmt::print(err, "domain error: {}\n", e.what()); return kExitConfig;
            case ErrorKind::SimulationFailed:
                fmt::print(err, "simulation failed: {}\n", e.what());
                return kExitSimulation;
            case ErrorKind::LinearSolveFailure:
                fmt::print(err, "linear solve failed: {}\n", e.what());
                return kExitSimulation;
            case ErrorKind::IterateBelowFloor:
                fmt::print(err, "iterate below floor: {}\n", e.what());
                return kExitSimulation;
            case ErrorKind::IoError: fmt::print(err, "i/o error: {}\n", e.what()); return kExitSimulation;
        }
        return kExitSimulation;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(err, "i/o error: {}\n", e.what());
        return kExitSimulation;
    }
}

}  // namespace srd
