#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "srd/errors.hpp"

namespace srd::detail {

/// Thomas algorithm for lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
/// lower[0] and upper[n-1] are ignored. `scratch` is resized as needed.
inline void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                              std::span<const double> upper, std::span<const double> rhs, std::span<double> x,
                              std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    double denom = diag[0];
    if (denom == 0.0 || !std::isfinite(denom)) throw LinearSolveFailure("singular tridiagonal system at row 0");
    scratch[0] = upper.size() > 0 && n > 1 ? upper[0] / denom : 0.0;
    x[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * scratch[i - 1];
        if (denom == 0.0 || !std::isfinite(denom))
            throw LinearSolveFailure("singular tridiagonal system during elimination");
        scratch[i] = i + 1 < n ? upper[i] / denom : 0.0;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= scratch[i] * x[i + 1];
}

}  // namespace srd::detail
