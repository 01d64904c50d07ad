#pragma once

// Constructive existence iteration on a ball: u_1 = δ and, for k >= 2, u_k
// solves the linear problem u_t = Δu - u_{k-1}^{-ν} with the original data.

#include <iosfwd>
#include <span>
#include <vector>

#include "srd/radial_pde.hpp"

namespace srd {

struct PicardConfig {
    double nu = 1.0;
    RadialGrid grid{1.0, 100, 1};
    Field u0{grid, {}, 0.0, {}};
    BoundaryCondition bdry = DirichletConstant{1.0};
    double t1 = 1.0;
    int max_iters = 30;
    /// Step of the inner linear solves; 0 selects horizon / 512.
    double lin_dt = 0.0;
    double stop_tol = 1e-10;
    /// Iteration window; 0 selects the admissible horizon from compute_horizon.
    double horizon = 0.0;
    DiffusionScheme scheme = DiffusionScheme::TrBdf2;

    void validate() const;
};

/// Samples on grid nodes x a uniform time lattice, stored slice by slice.
struct SpaceTimeArray {
    RadialGrid grid{1.0, 8, 1};
    std::vector<double> times;
    std::vector<double> values;

    std::size_t slices() const { return times.size(); }
    std::span<const double> slice(std::size_t i) const { return {values.data() + i * grid.size(), grid.size()}; }
    std::span<double> slice(std::size_t i) { return {values.data() + i * grid.size(), grid.size()}; }
    double at(std::size_t i, std::size_t j) const { return values[i * grid.size() + j]; }
};

/// min(min u0, inf of the boundary data over [0, T1]); the boundary is sampled
/// at 1025 equispaced times.
double compute_delta(const PicardConfig& cfg);
/// min(T1/2, (δ/2)^{1+ν}).
double compute_horizon(const PicardConfig& cfg);

/// Pure heat solution with the configuration's data on the iteration lattice.
SpaceTimeArray heat_majorant(const PicardConfig& cfg);

struct PicardRun {
    double delta = 0.0;
    double horizon = 0.0;
    std::vector<SpaceTimeArray> iterates;
    SpaceTimeArray majorant;
    /// sup_diffs[i] = max |u_{i+2} - u_{i+1}| over the lattice.
    std::vector<double> sup_diffs;
    bool converged = false;
};

PicardRun iterate(const PicardConfig& cfg);

struct BoundReport {
    /// max(δ/2 - u_k), clipped at 0.
    double lower_violation = 0.0;
    /// max(u_k - w), clipped at 0.
    double upper_violation = 0.0;
    int lower_k = 0, upper_k = 0;
    double lower_r = 0.0, lower_t = 0.0;
    double upper_r = 0.0, upper_t = 0.0;
};

BoundReport check_bounds(const PicardRun& run, double delta);

/// `k,t,r,u` rows for every iterate followed by a `#`-prefixed summary block.
void write_picard_csv(std::ostream& out, const PicardRun& run);

}  // namespace srd
