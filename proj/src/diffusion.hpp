#pragma once

// Internal building blocks shared by the nonlinear solver and the Picard
// construction: the radial diffusion operator and its implicit integrators.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "srd/radial_pde.hpp"

namespace srd::detail {

/// L u_j = west_j (u_{j-1} - u_j) + east_j (u_{j+1} - u_j).
/// Row `cells` carries the no-flux (ghost reflection) closure.
class RadialOperator {
public:
    explicit RadialOperator(const RadialGrid& grid);

    std::size_t size() const { return west_.size(); }
    double west(std::size_t j) const { return west_[j]; }
    double east(std::size_t j) const { return east_[j]; }

    /// out[j] = (L u)_j for every node, using the no-flux row at the boundary.
    void apply(std::span<const double> u, std::span<double> out) const;

private:
    std::vector<double> west_;
    std::vector<double> east_;
};

/// Source term s(t) written into `out` (one entry per node).
using SourceFn = std::function<void(double t, std::span<double> out)>;

/// Advances u_t = Δu + s over one step. Dirichlet rows take the boundary value at
/// the stage time; rows flagged in `frozen` keep their current value.
class DiffusionIntegrator {
public:
    DiffusionIntegrator(const RadialGrid& grid, DiffusionScheme scheme);

    void advance(std::span<double> u, double t, double dt, const BoundaryCondition& bc,
                 std::span<const std::uint8_t> frozen, const SourceFn& source = {});

    const RadialOperator& op() const { return op_; }

private:
    // Solves (I - theta dt L) x = rhs with Dirichlet / frozen rows overridden.
    void implicit_solve(double coef, std::span<const double> rhs, std::span<double> x, bool dirichlet,
                        double boundary, std::span<const std::uint8_t> frozen);

    RadialGrid grid_;
    DiffusionScheme scheme_;
    RadialOperator op_;
    std::vector<double> lower_, diag_, upper_, rhs_, stage_, work_, src_a_, src_b_, scratch_;
};

}  // namespace srd::detail
