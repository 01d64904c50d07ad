#include "srd/radial_pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "diffusion.hpp"
#include "srd/errors.hpp"

namespace srd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr long kMaxSteps = 50'000'000;

void check_field(const Field& f) {
    if (f.values.size() != f.grid.size())
        throw ConstraintViolation(
            fmt::format("field has {} values but the grid has {} nodes", f.values.size(), f.grid.size()));
    if (!f.extinct.empty() && f.extinct.size() != f.values.size())
        throw ConstraintViolation("extinction mask does not match the field size");
}

struct ExtinctionEvent {
    std::size_t node;
    double value_before;
};

// In-place exact reaction on the reactive, non-extinct nodes. Returns newly
// extinct nodes together with their value on entry.
void react(std::span<double> u, std::span<std::uint8_t> extinct, std::size_t reactive, double nu, double dt,
           double floor, std::vector<ExtinctionEvent>& events) {
    if (dt <= 0.0) return;
    const double p = 1.0 + nu;
    const double drop = p * dt;
    const double floor_p = std::pow(floor, p);
    for (std::size_t j = 0; j < reactive; ++j) {
        if (extinct[j]) continue;
        const double before = u[j];
        const double rem = before > floor ? std::pow(before, p) - drop : -1.0;
        if (rem <= floor_p) {
            u[j] = floor;
            extinct[j] = 1;
            events.push_back({j, before});
        } else {
            u[j] = std::pow(rem, 1.0 / p);
        }
    }
}

// Holds workspace for repeated steps on one grid.
class Stepper {
public:
    Stepper(const RadialGrid& grid, const SolverConfig& cfg, const BoundaryCondition& bc)
        : cfg_(cfg), bc_(bc), diffusion_(grid, cfg.scheme),
          reactive_(is_dirichlet(bc) ? grid.size() - 1 : grid.size()) {}

    std::size_t reactive() const { return reactive_; }

    bool all_extinct(const Field& f) const {
        for (std::size_t j = 0; j < reactive_; ++j)
            if (!f.extinct[j]) return false;
        return true;
    }

    double choose_dt(const Field& f, double dt_cap) const {
        double umin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < reactive_; ++j)
            if (!f.extinct[j]) umin = std::min(umin, f.values[j]);
        double dt = std::min(cfg_.dt_init, dt_cap);
        if (std::isfinite(umin)) {
            const double p = 1.0 + cfg_.nu;
            dt = std::min(dt, std::max(cfg_.dt_min, cfg_.dt_safety * std::pow(umin, p) / p));
        }
        return dt;
    }

    // Advances f in place by dt. Extinction events are appended with the
    // time at which the reaction substep that produced them ends.
    void advance(Field& f, double dt, std::vector<std::pair<double, ExtinctionEvent>>& events) {
        const double t0 = f.time;
        events_.clear();
        react(f.values, f.extinct, reactive_, cfg_.nu, 0.5 * dt, cfg_.floor, events_);
        for (auto& e : events_) events.push_back({t0 + 0.5 * dt, e});
        events_.clear();
        diffusion_.advance(f.values, t0, dt, bc_, f.extinct);
        react(f.values, f.extinct, reactive_, cfg_.nu, 0.5 * dt, cfg_.floor, events_);
        for (auto& e : events_) events.push_back({t0 + dt, e});
        f.time = t0 + dt;
        for (std::size_t j = 0; j < f.values.size(); ++j)
            if (!std::isfinite(f.values[j]))
                throw SimulationFailed(fmt::format("non-finite value at node {} and t = {}", j, f.time));
    }

private:
    SolverConfig cfg_;
    BoundaryCondition bc_;
    detail::DiffusionIntegrator diffusion_;
    std::size_t reactive_;
    std::vector<ExtinctionEvent> events_;
};

}  // namespace

RadialGrid::RadialGrid(double radius, int cells, int dim) : radius_(radius), cells_(cells), dim_(dim) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ConstraintViolation(fmt::format("grid radius must be positive, got {}", radius));
    if (cells < 8) throw ConstraintViolation(fmt::format("grid needs at least 8 cells, got {}", cells));
    if (dim < 1) throw ConstraintViolation(fmt::format("dimension must be >= 1, got {}", dim));
}

RadialGrid build_grid(double radius, int cells, int dim) { return RadialGrid(radius, cells, dim); }

Field make_field(const RadialGrid& grid, const std::function<double(double r2)>& profile, double time) {
    Field f{grid, std::vector<double>(grid.size()), time, {}};
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double r = grid.node(j);
        f.values[j] = profile(r * r);
    }
    return f;
}

bool is_dirichlet(const BoundaryCondition& bc) { return !std::holds_alternative<NeumannZero>(bc); }

double boundary_value(const BoundaryCondition& bc, double radius, double t) {
    return std::visit(overloaded{
                          [&](const DirichletBarrier& d) { return d.scale * eval(d.barrier, radius * radius, t); },
                          [](const DirichletConstant& d) { return d.value; },
                          [](const NeumannZero&) -> double {
                              throw DomainError("a no-flux boundary has no boundary value");
                          },
                      },
                      bc);
}

void SolverConfig::validate() const {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConstraintViolation(fmt::format("nu must be positive, got {}", nu));
    if (!(dt_init > 0.0)) throw ConstraintViolation(fmt::format("dt_init must be positive, got {}", dt_init));
    if (!(dt_safety > 0.0 && dt_safety <= 1.0))
        throw ConstraintViolation(fmt::format("dt_safety must lie in (0, 1], got {}", dt_safety));
    if (!(dt_min >= 0.0)) throw ConstraintViolation(fmt::format("dt_min must be nonnegative, got {}", dt_min));
    if (!(floor > 0.0)) throw ConstraintViolation(fmt::format("floor must be positive, got {}", floor));
    if (!(t_end >= 0.0) || !std::isfinite(t_end))
        throw ConstraintViolation(fmt::format("t_end must be finite and nonnegative, got {}", t_end));
    if (!(snapshot_every > 0.0))
        throw ConstraintViolation(fmt::format("snapshot_every must be positive, got {}", snapshot_every));
}

std::vector<double> discrete_laplacian(const Field& f) {
    check_field(f);
    detail::RadialOperator op(f.grid);
    std::vector<double> out(f.values.size());
    op.apply(f.values, out);
    out.pop_back();
    return out;
}

ReactionResult reaction_substep(std::span<const double> values, double nu, double dt, double floor) {
    ReactionResult res{{values.begin(), values.end()}, {}};
    std::vector<std::uint8_t> mask(values.size(), 0);
    std::vector<ExtinctionEvent> events;
    react(res.values, mask, values.size(), nu, dt, floor, events);
    for (const auto& e : events) res.extinct_nodes.push_back(e.node);
    return res;
}

Field diffusion_substep(const Field& f, double dt, const BoundaryCondition& bc, DiffusionScheme scheme) {
    check_field(f);
    if (!(dt > 0.0)) throw ConstraintViolation(fmt::format("diffusion step needs dt > 0, got {}", dt));
    Field out = f;
    detail::DiffusionIntegrator integ(f.grid, scheme);
    integ.advance(out.values, f.time, dt, bc, out.extinct);
    out.time = f.time + dt;
    return out;
}

StepResult step(const Field& f, const SolverConfig& cfg, const BoundaryCondition& bc, double dt_cap) {
    cfg.validate();
    check_field(f);
    StepResult res{f, 0.0, {}};
    if (res.field.extinct.empty()) res.field.extinct.assign(f.values.size(), 0);
    Stepper stepper(f.grid, cfg, bc);
    res.dt_used = stepper.choose_dt(res.field, dt_cap);
    std::vector<std::pair<double, ExtinctionEvent>> events;
    stepper.advance(res.field, res.dt_used, events);
    for (const auto& [t, e] : events) res.extinct_nodes.push_back(e.node);
    return res;
}

Trajectory simulate(const Field& u0, const SolverConfig& cfg, const BoundaryCondition& bc,
                    const StepObserver& observer) {
    cfg.validate();
    check_field(u0);
    for (std::size_t j = 0; j < u0.values.size(); ++j)
        if (!(u0.values[j] > 0.0) || !std::isfinite(u0.values[j]))
            throw ConstraintViolation(fmt::format("initial value at node {} is not positive: {}", j, u0.values[j]));

    Trajectory traj;
    Field state = u0;
    if (state.extinct.empty()) state.extinct.assign(state.values.size(), 0);
    traj.node_extinction_time.assign(state.values.size(), std::nullopt);
    traj.snapshots.push_back(state);

    const double t_start = state.time;
    const double t_final = t_start + cfg.t_end;
    Stepper stepper(state.grid, cfg, bc);
    std::vector<std::pair<double, ExtinctionEvent>> events;
    long snapshot_index = 1;
    auto next_target = [&] {
        return std::min(t_start + snapshot_index * cfg.snapshot_every, t_final);
    };
    auto close_enough = [](double a, double b) { return std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(b)); };

    bool stop = cfg.t_end <= 0.0 || stepper.all_extinct(state);
    while (!stop) {
        const double target = next_target();
        const double dt = stepper.choose_dt(state, target - state.time);
        events.clear();
        stepper.advance(state, dt, events);
        if (close_enough(state.time, target)) state.time = target;

        ++traj.stats.steps;
        traj.stats.dt_min = std::min(traj.stats.dt_min, dt);
        traj.stats.dt_max = std::max(traj.stats.dt_max, dt);
        if (traj.stats.steps > kMaxSteps)
            throw SimulationFailed(fmt::format("step budget exhausted at t = {}", state.time));

        if (!events.empty()) {
            for (const auto& [t, e] : events) traj.node_extinction_time[e.node] = t;
            if (!traj.extinction_time) {
                // Among the first events pick the node that was lowest on entry.
                const double first_t = events.front().first;
                const ExtinctionEvent* best = nullptr;
                for (const auto& [t, e] : events) {
                    if (t != first_t) break;
                    if (!best || e.value_before < best->value_before) best = &e;
                }
                traj.extinction_time = std::min(first_t, t_final);
                traj.extinct_node = best->node;
            }
        }
        if (observer) observer(state);

        const bool at_target = state.time >= target;
        const bool finished = state.time >= t_final;
        stop = finished || stepper.all_extinct(state) ||
               (cfg.stop_on_first_extinction && traj.extinction_time.has_value());
        if (at_target && !finished) ++snapshot_index;
        if (at_target || stop) traj.snapshots.push_back(state);
    }
    return traj;
}

void write_snapshots_csv(std::ostream& out, std::span<const Field> snapshots) {
    out << "t,r,u\n";
    for (const auto& f : snapshots)
        for (std::size_t j = 0; j < f.values.size(); ++j)
            fmt::print(out, "{:.17g},{:.17g},{:.17g}\n", f.time, f.grid.node(j), f.values[j]);
}

void write_snapshots_csv(std::ostream& out, const Trajectory& traj) { write_snapshots_csv(out, traj.snapshots); }

std::vector<Field> read_snapshots_csv(std::istream& in, const RadialGrid& grid) {
    std::string line;
    if (!std::getline(in, line) || line != "t,r,u") throw ParseError("snapshot CSV must start with header t,r,u");
    std::vector<Field> out;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        double cols[3];
        const char* p = line.c_str();
        for (int c = 0; c < 3; ++c) {
            char* end = nullptr;
            cols[c] = std::strtod(p, &end);
            if (end == p || (c < 2 && *end != ',') || (c == 2 && *end != '\0'))
                throw ParseError(fmt::format("snapshot CSV line {}: malformed row '{}'", lineno, line));
            p = end + 1;
        }
        if (out.empty() || out.back().time != cols[0] || out.back().values.size() == grid.size()) {
            if (!out.empty() && out.back().values.size() != grid.size())
                throw ParseError(fmt::format("snapshot CSV line {}: incomplete snapshot at t = {}", lineno,
                                             out.back().time));
            out.push_back(Field{grid, {}, cols[0], {}});
            out.back().values.reserve(grid.size());
        }
        Field& f = out.back();
        const std::size_t j = f.values.size();
        if (cols[1] != grid.node(j))
            throw ParseError(fmt::format("snapshot CSV line {}: r = {} does not match node {} of the grid", lineno,
                                         cols[1], j));
        f.values.push_back(cols[2]);
    }
    if (!out.empty() && out.back().values.size() != grid.size())
        throw ParseError("snapshot CSV ends with an incomplete snapshot");
    return out;
}

}  // namespace srd
