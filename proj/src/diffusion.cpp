#include "diffusion.hpp"

#include <cmath>

#include "tridiagonal.hpp"

namespace srd::detail {

namespace {

// x^n - y^n for x - y = 1, summed without cancellation.
double shell_volume(double x, double y, int n) {
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += std::pow(x, k) * std::pow(y, n - 1 - k);
    return sum;
}

constexpr double kGamma = 2.0 - 1.4142135623730950488;

}  // namespace

RadialOperator::RadialOperator(const RadialGrid& grid) : west_(grid.size(), 0.0), east_(grid.size(), 0.0) {
    const int n = grid.dim();
    const double h2 = grid.spacing() * grid.spacing();
    const std::size_t m = static_cast<std::size_t>(grid.cells());
    east_[0] = 2.0 * n / h2;
    for (std::size_t j = 1; j <= m; ++j) {
        const double hi = j + 0.5;
        const double lo = j - 0.5;
        const double vol = shell_volume(hi, lo, n);
        const double w = n * std::pow(lo, n - 1) / (h2 * vol);
        const double e = n * std::pow(hi, n - 1) / (h2 * vol);
        if (j < m) {
            west_[j] = w;
            east_[j] = e;
        } else {
            // Ghost node u_{m+1} = u_{m-1}.
            west_[j] = w + e;
        }
    }
}

void RadialOperator::apply(std::span<const double> u, std::span<double> out) const {
    const std::size_t m = size() - 1;
    out[0] = east_[0] * (u[1] - u[0]);
    for (std::size_t j = 1; j < m; ++j) out[j] = west_[j] * (u[j - 1] - u[j]) + east_[j] * (u[j + 1] - u[j]);
    out[m] = west_[m] * (u[m - 1] - u[m]);
}

DiffusionIntegrator::DiffusionIntegrator(const RadialGrid& grid, DiffusionScheme scheme)
    : grid_(grid), scheme_(scheme), op_(grid) {
    const std::size_t n = grid.size();
    lower_.resize(n);
    diag_.resize(n);
    upper_.resize(n);
    rhs_.resize(n);
    stage_.resize(n);
    work_.resize(n);
}

void DiffusionIntegrator::implicit_solve(double coef, std::span<const double> rhs, std::span<double> x,
                                         bool dirichlet, double boundary, std::span<const std::uint8_t> frozen) {
    const std::size_t n = grid_.size();
    const std::size_t m = n - 1;
    for (std::size_t j = 0; j < n; ++j) {
        const double w = op_.west(j);
        const double e = op_.east(j);
        lower_[j] = -coef * w;
        upper_[j] = -coef * e;
        diag_[j] = 1.0 + coef * (w + e);
        rhs_[j] = rhs[j];
    }
    auto pin = [&](std::size_t j, double value) {
        lower_[j] = 0.0;
        upper_[j] = 0.0;
        diag_[j] = 1.0;
        rhs_[j] = value;
    };
    if (dirichlet) pin(m, boundary);
    if (!frozen.empty())
        for (std::size_t j = 0; j < n; ++j)
            if (frozen[j]) pin(j, x[j]);
    solve_tridiagonal(lower_, diag_, upper_, rhs_, x, scratch_);
}

void DiffusionIntegrator::advance(std::span<double> u, double t, double dt, const BoundaryCondition& bc,
                                  std::span<const std::uint8_t> frozen, const SourceFn& source) {
    const std::size_t n = grid_.size();
    const bool dirichlet = is_dirichlet(bc);
    const double radius = grid_.radius();

    if (scheme_ == DiffusionScheme::BackwardEuler) {
        for (std::size_t j = 0; j < n; ++j) work_[j] = u[j];
        if (source) {
            src_a_.resize(n);
            source(t + dt, src_a_);
            for (std::size_t j = 0; j < n; ++j) work_[j] += dt * src_a_[j];
        }
        const double g = dirichlet ? boundary_value(bc, radius, t + dt) : 0.0;
        implicit_solve(dt, work_, u, dirichlet, g, frozen);
        return;
    }

    // TR-BDF2: trapezoidal stage to t + γ dt, then BDF2 to t + dt.
    const double tr = 0.5 * kGamma * dt;
    op_.apply(u, work_);
    for (std::size_t j = 0; j < n; ++j) work_[j] = u[j] + tr * work_[j];
    if (source) {
        src_a_.resize(n);
        src_b_.resize(n);
        source(t, src_a_);
        source(t + kGamma * dt, src_b_);
        for (std::size_t j = 0; j < n; ++j) work_[j] += tr * (src_a_[j] + src_b_[j]);
    }
    for (std::size_t j = 0; j < n; ++j) stage_[j] = u[j];
    const double g1 = dirichlet ? boundary_value(bc, radius, t + kGamma * dt) : 0.0;
    implicit_solve(tr, work_, stage_, dirichlet, g1, frozen);

    const double c_stage = 1.0 / (kGamma * (2.0 - kGamma));
    const double c_old = (1.0 - kGamma) * (1.0 - kGamma) / (kGamma * (2.0 - kGamma));
    const double bdf = (1.0 - kGamma) / (2.0 - kGamma) * dt;
    for (std::size_t j = 0; j < n; ++j) work_[j] = c_stage * stage_[j] - c_old * u[j];
    if (source) {
        source(t + dt, src_a_);
        for (std::size_t j = 0; j < n; ++j) work_[j] += bdf * src_a_[j];
    }
    const double g2 = dirichlet ? boundary_value(bc, radius, t + dt) : 0.0;
    implicit_solve(bdf, work_, u, dirichlet, g2, frozen);
}

}  // namespace srd::detail
