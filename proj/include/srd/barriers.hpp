#pragma once

// Closed-form barrier functions for u_t = Δu - u^{-ν} on radially symmetric
// domains. Every barrier is a function of r2 = |x|^2 and t.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace srd {

/// Constants of the growth sandwich
///   A1 (1 + r² + b1 t)^α1  <=  u  <=  A2 (1 + r² + b2 t)^α2.
struct GrowthEnvelope {
    double nu = 0.0;
    int dim = 0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double eps = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
};

/// Parameters of the decaying supersolution A3 (T - t)^{1/(1+ν)} (1 + r²)^{-β}.
struct DecayBarrierParams {
    double nu = 0.0;
    int dim = 0;
    double beta = 0.0;
    double horizon = 0.0;
    double a3 = 0.0;
};

/// Parameters of the cone supersolution A (b (T - t) + r²)^{1/(1+ν)}.
struct ConeBarrierParams {
    double nu = 0.0;
    int dim = 0;
    double amp = 0.0;
    double t1 = 0.0;
    double slope = 0.0;
    double horizon = 0.0;
};

GrowthEnvelope derive_growth_params(double nu, int dim, double alpha1, double alpha2, double eps,
                                    std::optional<double> a2_override = std::nullopt);
DecayBarrierParams derive_decay_params(double nu, int dim, double beta, double horizon);
ConeBarrierParams derive_cone_params(double nu, int dim, double amp, double t1);

/// Largest admissible cone amplitude (exclusive): ((1+ν)/(2n))^{1/(1+ν)}.
double cone_amplitude_bound(double nu, int dim);

struct GrowthLower {
    GrowthEnvelope env;
};
struct GrowthUpper {
    GrowthEnvelope env;
};
struct DecaySupersolution {
    DecayBarrierParams params;
};
/// Spatially constant extinction profile ((1+ν)(T - t))^{1/(1+ν)}.
struct Homogeneous {
    double nu = 0.0;
    double horizon = 0.0;
};
struct ConeSupersolution {
    ConeBarrierParams params;
};

using Barrier = std::variant<GrowthLower, GrowthUpper, DecaySupersolution, Homogeneous, ConeSupersolution>;

Homogeneous make_homogeneous(double nu, double horizon);
/// Homogeneous barrier whose value at t = 0 is sup0.
Homogeneous homogeneous_from_sup(double nu, double sup0);

enum class BarrierFamily : std::uint8_t { GrowthLower, GrowthUpper, Decay, Homogeneous, Cone };

BarrierFamily family_of(const Barrier& b);
const char* family_name(BarrierFamily f);
std::optional<BarrierFamily> parse_family(const std::string& name);

double nu_of(const Barrier& b);
int dim_of(const Barrier& b);
/// Extinction time of the time-decaying families, nullopt for growth barriers.
std::optional<double> horizon_of(const Barrier& b);

double eval(const Barrier& b, double r2, double t);
double laplacian(const Barrier& b, double r2, double t);
double time_derivative(const Barrier& b, double r2, double t);
/// Δψ - ψ^{-ν} - ψ_t from the closed forms.
double residual(const Barrier& b, double r2, double t);
/// |Δψ| + ψ^{-ν} + |ψ_t|; the magnitude against which residual rounding is judged.
double residual_scale(const Barrier& b, double r2, double t);

enum class SignExpectation : std::uint8_t { Nonnegative, Nonpositive, Zero };
SignExpectation expected_sign(const Barrier& b);
const char* sign_name(SignExpectation s);

struct SignReport {
    SignExpectation expected = SignExpectation::Zero;
    long samples = 0;
    long violations = 0;
    double min_residual = 0.0;
    double max_residual = 0.0;
    /// Largest residual/scale in the wrong direction (0 if none).
    double worst_relative = 0.0;
    double worst_r2 = 0.0;
    double worst_t = 0.0;
    bool passed = false;
};

/// Relative tolerance applied to residual signs.
inline constexpr double kSignTolerance = 1e-12;

/// Residual in the wrong direction for the barrier's expected sign, relative to
/// residual_scale (absolute for the zero-residual family); <= 0 when the sign holds.
double sign_violation(const Barrier& b, double r2, double t);

/// Residual sign on a samples x samples tensor grid of [0, r2_max] x [0, t_max]
/// plus samples^2 Halton points. Time is capped at 0.99 T for decaying barriers.
SignReport verify_sign_on_grid(const Barrier& b, double r2_max, double t_max, int samples,
                               std::uint64_t seed = 0);

}  // namespace srd
