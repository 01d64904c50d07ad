#pragma once

// Radially symmetric finite-difference solver for u_t = Δu - u^{-ν} on the
// ball of radius R in n dimensions. Time stepping is a Strang composition of
// an exact reaction flow and an implicit diffusion solve.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "srd/barriers.hpp"

namespace srd {

/// Uniform mesh r_j = j h, j = 0..cells, h = radius / cells.
class RadialGrid {
public:
    RadialGrid(double radius, int cells, int dim);

    double radius() const { return radius_; }
    int cells() const { return cells_; }
    int dim() const { return dim_; }
    double spacing() const { return radius_ / cells_; }
    std::size_t size() const { return static_cast<std::size_t>(cells_) + 1; }
    double node(std::size_t j) const { return j == static_cast<std::size_t>(cells_) ? radius_ : j * spacing(); }

    friend bool operator==(const RadialGrid&, const RadialGrid&) = default;

private:
    double radius_;
    int cells_;
    int dim_;
};

RadialGrid build_grid(double radius, int cells, int dim);

/// Solution snapshot. `extinct` is either empty or flags nodes frozen at the floor.
struct Field {
    RadialGrid grid;
    std::vector<double> values;
    double time = 0.0;
    std::vector<std::uint8_t> extinct;

    bool is_extinct(std::size_t j) const { return !extinct.empty() && extinct[j] != 0; }
};

/// Field sampled from a radial profile u(r2).
Field make_field(const RadialGrid& grid, const std::function<double(double r2)>& profile, double time = 0.0);

/// Dirichlet data scale * ψ(R², t).
struct DirichletBarrier {
    Barrier barrier;
    double scale = 1.0;
};
struct DirichletConstant {
    double value = 1.0;
};
struct NeumannZero {};

using BoundaryCondition = std::variant<DirichletBarrier, DirichletConstant, NeumannZero>;

bool is_dirichlet(const BoundaryCondition& bc);
/// Boundary value at |x| = radius and time t (Dirichlet variants only).
double boundary_value(const BoundaryCondition& bc, double radius, double t);

enum class DiffusionScheme : std::uint8_t {
    BackwardEuler,  ///< monotone, first order
    TrBdf2,         ///< L-stable, second order, not monotone for large dt/h²
};

struct SolverConfig {
    double nu = 1.0;
    double dt_init = 1e-3;
    double dt_safety = 0.1;
    /// Lower bound on the reaction-limited step. 0 keeps the pure
    /// reaction-timescale controller; a positive value lets nodes whose
    /// remaining life is shorter than dt_min quench inside one exact step.
    double dt_min = 0.0;
    double floor = 1e-8;
    double t_end = 1.0;
    double snapshot_every = 0.1;
    DiffusionScheme scheme = DiffusionScheme::BackwardEuler;
    bool stop_on_first_extinction = false;

    void validate() const;
};

struct StepStats {
    long steps = 0;
    double dt_min = std::numeric_limits<double>::infinity();
    double dt_max = 0.0;
};

struct Trajectory {
    std::vector<Field> snapshots;
    std::optional<double> extinction_time;
    std::optional<std::size_t> extinct_node;
    /// Per-node time of extinction.
    std::vector<std::optional<double>> node_extinction_time;
    StepStats stats;
};

/// Δu at nodes 0..cells-1 (the boundary node is left to the boundary condition).
/// Finite-volume form with exact shell volumes: exact on r², equal to
/// 2n (u1 - u0)/h² at the origin, and an M-matrix for every dimension.
std::vector<double> discrete_laplacian(const Field& f);

struct ReactionResult {
    std::vector<double> values;
    std::vector<std::size_t> extinct_nodes;
};

/// Exact flow of u' = -u^{-ν} over dt: u -> (u^{1+ν} - (1+ν) dt)^{1/(1+ν)}.
/// Nodes with u^{1+ν} <= (1+ν) dt + floor^{1+ν} are reported and clamped to floor.
ReactionResult reaction_substep(std::span<const double> values, double nu, double dt, double floor);

/// One implicit solve of w_t = Δw over dt; Dirichlet data is taken at f.time + dt.
Field diffusion_substep(const Field& f, double dt, const BoundaryCondition& bc,
                        DiffusionScheme scheme = DiffusionScheme::BackwardEuler);

struct StepResult {
    Field field;
    double dt_used = 0.0;
    std::vector<std::size_t> extinct_nodes;
};

/// dt = min(dt_init, max(dt_min, dt_safety u_min^{1+ν}/(1+ν)), dt_cap), then
/// reaction(dt/2) -> diffusion(dt) -> reaction(dt/2).
StepResult step(const Field& f, const SolverConfig& cfg, const BoundaryCondition& bc,
                double dt_cap = std::numeric_limits<double>::infinity());

/// Called after every accepted step with the new state.
using StepObserver = std::function<void(const Field&)>;

/// Integrates to t_end, or until every reactive node is extinct (or the first
/// one, with stop_on_first_extinction). Snapshots land exactly on multiples of
/// snapshot_every, plus t_end and the stopping time.
Trajectory simulate(const Field& u0, const SolverConfig& cfg, const BoundaryCondition& bc,
                    const StepObserver& observer = {});

/// Long-form `t,r,u` CSV with 17 significant digits.
void write_snapshots_csv(std::ostream& out, const Trajectory& traj);
void write_snapshots_csv(std::ostream& out, std::span<const Field> snapshots);
/// Inverse of write_snapshots_csv for snapshots on `grid`.
std::vector<Field> read_snapshots_csv(std::istream& in, const RadialGrid& grid);

}  // namespace srd
