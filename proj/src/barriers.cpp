#include "srd/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "halton.hpp"
#include "srd/errors.hpp"

namespace srd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_nu(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu))
        throw ConstraintViolation(fmt::format("nu must be a positive finite number, got {}", nu));
}

void require_dim(int dim) {
    if (dim < 1) throw ConstraintViolation(fmt::format("dimension must be >= 1, got {}", dim));
}

void require_point(double r2, double t) {
    if (!(r2 >= 0.0) || !std::isfinite(r2))
        throw DomainError(fmt::format("r2 must be finite and nonnegative, got {}", r2));
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError(fmt::format("t must be finite and nonnegative, got {}", t));
}

// Remaining time T - t for barriers that vanish at T.
double remaining_time(double horizon, double t) {
    if (!(t < horizon))
        throw DomainError(fmt::format("t = {} is not below the extinction time {}", t, horizon));
    return horizon - t;
}

double cone_argument(const ConeBarrierParams& p, double r2, double t) {
    if (t > p.horizon)
        throw DomainError(fmt::format("t = {} exceeds the cone extinction time {}", t, p.horizon));
    return p.slope * (p.horizon - t) + r2;
}

// Growth barrier A (1 + r2 + b t)^α and its derivatives.
struct PowerProfile {
    double amp, base_slope, alpha;
    int dim;
    double nu;
};

PowerProfile lower_profile(const GrowthEnvelope& e) { return {e.a1, e.b1, e.alpha1, e.dim, e.nu}; }
PowerProfile upper_profile(const GrowthEnvelope& e) { return {e.a2, e.b2, e.alpha2, e.dim, e.nu}; }

double growth_eval(const PowerProfile& p, double r2, double t) {
    return p.amp * std::pow(1.0 + r2 + p.base_slope * t, p.alpha);
}

double growth_laplacian(const PowerProfile& p, double r2, double t) {
    const double base = 1.0 + r2 + p.base_slope * t;
    const double n = p.dim;
    const double brace = n + 2.0 * p.alpha - 2.0 + 2.0 * (1.0 - p.alpha) * (1.0 + p.base_slope * t) / base;
    return 2.0 * p.alpha * p.amp * brace * std::pow(base, p.alpha - 1.0);
}

double growth_dt(const PowerProfile& p, double r2, double t) {
    const double base = 1.0 + r2 + p.base_slope * t;
    return p.alpha * p.base_slope * p.amp * std::pow(base, p.alpha - 1.0);
}

// A^{-ν} B^{-αν} { A^{1+ν} B^{α(1+ν)-1} K - 1 } with
// K = α(2(n+2α-2) - b) + 4α(1-α)(1+bt)/B, the bracket assembled so that the
// part that cancels exactly for the derived constants is never formed as a
// difference of two large numbers.
double growth_residual(const PowerProfile& p, double r2, double t) {
    const double x = r2 + p.base_slope * t;
    const double base = 1.0 + x;
    const double n = p.dim;
    const double a_pow = std::pow(p.amp, 1.0 + p.nu);
    const double expo = p.alpha * (1.0 + p.nu) - 1.0;
    const double base_pow_m1 = std::expm1(expo * std::log1p(x));
    const double base_pow = 1.0 + base_pow_m1;
    const double k0 = p.alpha * (2.0 * (n + 2.0 * p.alpha - 2.0) - p.base_slope);
    const double k1 = 4.0 * p.alpha * (1.0 - p.alpha) * (1.0 + p.base_slope * t) / base;
    const double bracket = base_pow_m1 + base_pow * ((a_pow * k0 - 1.0) + a_pow * k1);
    return std::pow(p.amp, -p.nu) * std::pow(base, -p.alpha * p.nu) * bracket;
}

double decay_eval(const DecayBarrierParams& p, double r2, double t) {
    const double tau = remaining_time(p.horizon, t);
    const double q = 1.0 / (1.0 + p.nu);
    return p.a3 * std::pow(tau, q) * std::pow(1.0 + r2, -p.beta);
}

double decay_laplacian(const DecayBarrierParams& p, double r2, double t) {
    const double tau = remaining_time(p.horizon, t);
    const double q = 1.0 / (1.0 + p.nu);
    const double s = 1.0 + r2;
    const double b = p.beta;
    const double n = p.dim;
    return p.a3 * std::pow(tau, q) *
           (2.0 * b * (2.0 * b + 2.0 - n) * std::pow(s, -b - 1.0) - 4.0 * b * (b + 1.0) * std::pow(s, -b - 2.0));
}

double decay_dt(const DecayBarrierParams& p, double r2, double t) {
    const double tau = remaining_time(p.horizon, t);
    const double q = 1.0 / (1.0 + p.nu);
    return -q * p.a3 * std::pow(tau, q - 1.0) * std::pow(1.0 + r2, -p.beta);
}

// A3 τ^q S^{-β-2} { 2β(2β+2-n) S - 4β(β+1) + (S²/τ)(q - A3^{-1-ν} S^{β(1+ν)}) }.
double decay_residual(const DecayBarrierParams& p, double r2, double t) {
    const double tau = remaining_time(p.horizon, t);
    const double q = 1.0 / (1.0 + p.nu);
    const double s = 1.0 + r2;
    const double b = p.beta;
    const double n = p.dim;
    const double a_inv = std::pow(p.a3, -1.0 - p.nu);
    const double growth_m1 = std::expm1(b * (1.0 + p.nu) * std::log1p(r2));
    const double time_term = (s * s / tau) * ((q - a_inv) - a_inv * growth_m1);
    const double brace = 2.0 * b * (2.0 * b + 2.0 - n) * s - 4.0 * b * (b + 1.0) + time_term;
    return p.a3 * std::pow(tau, q) * std::pow(s, -b - 2.0) * brace;
}

double homogeneous_eval(const Homogeneous& h, double t) {
    const double tau = remaining_time(h.horizon, t);
    return std::pow((1.0 + h.nu) * tau, 1.0 / (1.0 + h.nu));
}

double homogeneous_dt(const Homogeneous& h, double t) {
    const double tau = remaining_time(h.horizon, t);
    return -homogeneous_eval(h, t) / ((1.0 + h.nu) * tau);
}

double cone_eval(const ConeBarrierParams& p, double r2, double t) {
    const double s = cone_argument(p, r2, t);
    return p.amp * std::pow(s, 1.0 / (1.0 + p.nu));
}

double cone_nonsmooth_guard(const ConeBarrierParams& p, double r2, double t) {
    const double s = cone_argument(p, r2, t);
    if (!(s > 0.0)) throw DomainError("cone barrier is not differentiable at its vertex");
    return s;
}

double cone_laplacian(const ConeBarrierParams& p, double r2, double t) {
    const double s = cone_nonsmooth_guard(p, r2, t);
    const double q = 1.0 / (1.0 + p.nu);
    const double n = p.dim;
    return p.amp * q * std::pow(s, q - 1.0) * (2.0 * n + 4.0 * r2 * (q - 1.0) / s);
}

double cone_dt(const ConeBarrierParams& p, double r2, double t) {
    const double s = cone_nonsmooth_guard(p, r2, t);
    const double q = 1.0 / (1.0 + p.nu);
    return -p.amp * q * p.slope * std::pow(s, q - 1.0);
}

// s^{-νq} { (Aq(2n+b) - A^{-ν}) + 4Aq(q-1) r2/s }.
double cone_residual(const ConeBarrierParams& p, double r2, double t) {
    const double s = cone_nonsmooth_guard(p, r2, t);
    const double q = 1.0 / (1.0 + p.nu);
    const double n = p.dim;
    const double constant = p.amp * q * (2.0 * n + p.slope) - std::pow(p.amp, -p.nu);
    return std::pow(s, -p.nu * q) * (constant + 4.0 * p.amp * q * (q - 1.0) * r2 / s);
}

}  // namespace

GrowthEnvelope derive_growth_params(double nu, int dim, double alpha1, double alpha2, double eps,
                                    std::optional<double> a2_override) {
    require_nu(nu);
    require_dim(dim);
    const double lowest = 1.0 / (1.0 + nu);
    if (!(alpha1 >= lowest))
        throw ConstraintViolation(fmt::format("alpha1 = {} must satisfy alpha1 >= 1/(1+nu) = {}", alpha1, lowest));
    if (!(alpha2 >= alpha1))
        throw ConstraintViolation(fmt::format("alpha2 = {} must satisfy alpha2 >= alpha1 = {}", alpha2, alpha1));
    if (!(eps > 0.0 && eps < 1.0))
        throw ConstraintViolation(fmt::format("eps = {} must lie strictly inside (0, 1)", eps));

    const double n = dim;
    GrowthEnvelope e;
    e.nu = nu;
    e.dim = dim;
    e.alpha1 = alpha1;
    e.alpha2 = alpha2;
    e.eps = eps;

    // At alpha1 == 1 both branches coincide; the alpha1 <= 1 form is used.
    const double spread = alpha1 <= 1.0 ? n + 2.0 * alpha1 - 2.0 : n;
    if (!(spread > 0.0))
        throw ConstraintViolation(
            fmt::format("n + 2 alpha1 - 2 = {} must be positive for A1 to exist (n = {}, alpha1 = {})", spread,
                        dim, alpha1));
    e.a1 = std::pow(2.0 * alpha1 * (1.0 - eps) * spread, -1.0 / (1.0 + nu));
    e.b1 = 2.0 * spread * eps;
    e.b2 = alpha2 <= 1.0 ? 2.0 * n : 2.0 * (n + 2.0 * alpha2 - 2.0);

    if (a2_override) {
        if (!(*a2_override >= e.a1))
            throw ConstraintViolation(
                fmt::format("A2 = {} must satisfy A2 >= A1 = {}", *a2_override, e.a1));
        e.a2 = *a2_override;
    } else {
        e.a2 = e.a1;
    }
    return e;
}

DecayBarrierParams derive_decay_params(double nu, int dim, double beta, double horizon) {
    if (!(nu > 0.0 && nu <= 1.0))
        throw ConstraintViolation(fmt::format("the decay barrier requires 0 < nu <= 1, got nu = {}", nu));
    require_dim(dim);
    const double q = 1.0 / (1.0 + nu);
    if (!(beta > 0.0 && beta <= q))
        throw ConstraintViolation(fmt::format("beta = {} must satisfy 0 < beta <= 1/(1+nu) = {}", beta, q));
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConstraintViolation(fmt::format("horizon T must be positive, got {}", horizon));

    const double n = dim;
    DecayBarrierParams p{nu, dim, beta, horizon, 0.0};
    if (beta <= std::min((n - 2.0) / 2.0, q)) {
        p.a3 = std::pow(1.0 + nu, q);
    } else {
        const double denom = 1.0 + 2.0 * beta * (1.0 + nu) * (2.0 * beta + 2.0 - n) * horizon;
        p.a3 = std::pow((1.0 + nu) / denom, q);
    }
    return p;
}

double cone_amplitude_bound(double nu, int dim) {
    require_nu(nu);
    require_dim(dim);
    return std::pow((1.0 + nu) / (2.0 * dim), 1.0 / (1.0 + nu));
}

ConeBarrierParams derive_cone_params(double nu, int dim, double amp, double t1) {
    const double bound = cone_amplitude_bound(nu, dim);
    if (!(amp > 0.0)) throw ConstraintViolation(fmt::format("cone amplitude A must be positive, got {}", amp));
    if (!(t1 > 0.0) || !std::isfinite(t1))
        throw ConstraintViolation(fmt::format("T1 must be positive, got {}", t1));
    const double slope = (1.0 + nu) / std::pow(amp, 1.0 + nu) - 2.0 * dim;
    if (!(amp < bound) || !(slope > 0.0))
        throw ConstraintViolation(fmt::format(
            "cone amplitude A = {} violates 0 < A < ((1+nu)/(2n))^(1/(1+nu)) = {} (slope b = {} is not positive)", amp,
            bound, slope));
    return {nu, dim, amp, t1, slope, t1 / slope};
}

Homogeneous make_homogeneous(double nu, double horizon) {
    require_nu(nu);
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConstraintViolation(fmt::format("horizon T must be positive, got {}", horizon));
    return {nu, horizon};
}

Homogeneous homogeneous_from_sup(double nu, double sup0) {
    require_nu(nu);
    if (!(sup0 > 0.0) || !std::isfinite(sup0))
        throw ConstraintViolation(fmt::format("sup of the initial data must be positive, got {}", sup0));
    return make_homogeneous(nu, std::pow(sup0, 1.0 + nu) / (1.0 + nu));
}

BarrierFamily family_of(const Barrier& b) {
    return std::visit(overloaded{
                          [](const GrowthLower&) { return BarrierFamily::GrowthLower; },
                          [](const GrowthUpper&) { return BarrierFamily::GrowthUpper; },
                          [](const DecaySupersolution&) { return BarrierFamily::Decay; },
                          [](const Homogeneous&) { return BarrierFamily::Homogeneous; },
                          [](const ConeSupersolution&) { return BarrierFamily::Cone; },
                      },
                      b);
}

const char* family_name(BarrierFamily f) {
    switch (f) {
        case BarrierFamily::GrowthLower: return "growth-lower";
        case BarrierFamily::GrowthUpper: return "growth-upper";
        case BarrierFamily::Decay: return "decay";
        case BarrierFamily::Homogeneous: return "homogeneous";
        case BarrierFamily::Cone: return "cone";
    }
    return "?";
}

std::optional<BarrierFamily> parse_family(const std::string& name) {
    for (auto f : {BarrierFamily::GrowthLower, BarrierFamily::GrowthUpper, BarrierFamily::Decay,
                   BarrierFamily::Homogeneous, BarrierFamily::Cone})
        if (name == family_name(f)) return f;
    return std::nullopt;
}

double nu_of(const Barrier& b) {
    return std::visit(overloaded{
                          [](const GrowthLower& g) { return g.env.nu; },
                          [](const GrowthUpper& g) { return g.env.nu; },
                          [](const DecaySupersolution& d) { return d.params.nu; },
                          [](const Homogeneous& h) { return h.nu; },
                          [](const ConeSupersolution& c) { return c.params.nu; },
                      },
                      b);
}

int dim_of(const Barrier& b) {
    return std::visit(overloaded{
                          [](const GrowthLower& g) { return g.env.dim; },
                          [](const GrowthUpper& g) { return g.env.dim; },
                          [](const DecaySupersolution& d) { return d.params.dim; },
                          [](const Homogeneous&) { return 1; },
                          [](const ConeSupersolution& c) { return c.params.dim; },
                      },
                      b);
}

std::optional<double> horizon_of(const Barrier& b) {
    return std::visit(overloaded{
                          [](const GrowthLower&) -> std::optional<double> { return std::nullopt; },
                          [](const GrowthUpper&) -> std::optional<double> { return std::nullopt; },
                          [](const DecaySupersolution& d) -> std::optional<double> { return d.params.horizon; },
                          [](const Homogeneous& h) -> std::optional<double> { return h.horizon; },
                          [](const ConeSupersolution& c) -> std::optional<double> { return c.params.horizon; },
                      },
                      b);
}

double eval(const Barrier& b, double r2, double t) {
    require_point(r2, t);
    return std::visit(overloaded{
                          [&](const GrowthLower& g) { return growth_eval(lower_profile(g.env), r2, t); },
                          [&](const GrowthUpper& g) { return growth_eval(upper_profile(g.env), r2, t); },
                          [&](const DecaySupersolution& d) { return decay_eval(d.params, r2, t); },
                          [&](const Homogeneous& h) { return homogeneous_eval(h, t); },
                          [&](const ConeSupersolution& c) { return cone_eval(c.params, r2, t); },
                      },
                      b);
}

double laplacian(const Barrier& b, double r2, double t) {
    require_point(r2, t);
    return std::visit(overloaded{
                          [&](const GrowthLower& g) { return growth_laplacian(lower_profile(g.env), r2, t); },
                          [&](const GrowthUpper& g) { return growth_laplacian(upper_profile(g.env), r2, t); },
                          [&](const DecaySupersolution& d) { return decay_laplacian(d.params, r2, t); },
                          [&](const Homogeneous& h) {
                              remaining_time(h.horizon, t);
                              return 0.0;
                          },
                          [&](const ConeSupersolution& c) { return cone_laplacian(c.params, r2, t); },
                      },
                      b);
}

double time_derivative(const Barrier& b, double r2, double t) {
    require_point(r2, t);
    return std::visit(overloaded{
                          [&](const GrowthLower& g) { return growth_dt(lower_profile(g.env), r2, t); },
                          [&](const GrowthUpper& g) { return growth_dt(upper_profile(g.env), r2, t); },
                          [&](const DecaySupersolution& d) { return decay_dt(d.params, r2, t); },
                          [&](const Homogeneous& h) { return homogeneous_dt(h, t); },
                          [&](const ConeSupersolution& c) { return cone_dt(c.params, r2, t); },
                      },
                      b);
}

double residual(const Barrier& b, double r2, double t) {
    require_point(r2, t);
    return std::visit(overloaded{
                          [&](const GrowthLower& g) { return growth_residual(lower_profile(g.env), r2, t); },
                          [&](const GrowthUpper& g) { return growth_residual(upper_profile(g.env), r2, t); },
                          [&](const DecaySupersolution& d) { return decay_residual(d.params, r2, t); },
                          [&](const Homogeneous& h) {
                              const double psi = homogeneous_eval(h, t);
                              return -std::pow(psi, -h.nu) - homogeneous_dt(h, t);
                          },
                          [&](const ConeSupersolution& c) { return cone_residual(c.params, r2, t); },
                      },
                      b);
}

double residual_scale(const Barrier& b, double r2, double t) {
    const double psi = eval(b, r2, t);
    return std::abs(laplacian(b, r2, t)) + std::pow(psi, -nu_of(b)) + std::abs(time_derivative(b, r2, t));
}

SignExpectation expected_sign(const Barrier& b) {
    switch (family_of(b)) {
        case BarrierFamily::GrowthLower: return SignExpectation::Nonnegative;
        case BarrierFamily::Homogeneous: return SignExpectation::Zero;
        default: return SignExpectation::Nonpositive;
    }
}

const char* sign_name(SignExpectation s) {
    switch (s) {
        case SignExpectation::Nonnegative: return "nonnegative";
        case SignExpectation::Nonpositive: return "nonpositive";
        case SignExpectation::Zero: return "zero";
    }
    return "?";
}

double sign_violation(const Barrier& b, double r2, double t) {
    const double res = residual(b, r2, t);
    switch (expected_sign(b)) {
        case SignExpectation::Nonnegative: return -res / residual_scale(b, r2, t);
        case SignExpectation::Nonpositive: return res / residual_scale(b, r2, t);
        // psi_4 has Δψ = 0, so its residual is judged absolutely.
        case SignExpectation::Zero: return std::abs(res);
    }
    return 0.0;
}

SignReport verify_sign_on_grid(const Barrier& b, double r2_max, double t_max, int samples, std::uint64_t seed) {
    SignReport rep;
    rep.expected = expected_sign(b);
    rep.min_residual = std::numeric_limits<double>::infinity();
    rep.max_residual = -std::numeric_limits<double>::infinity();
    if (samples < 2) samples = 2;

    double t_hi = t_max;
    if (auto h = horizon_of(b)) t_hi = std::min(t_hi, 0.99 * *h);
    t_hi = std::max(t_hi, 0.0);
    r2_max = std::max(r2_max, 0.0);

    auto visit_point = [&](double r2, double t) {
        const double res = residual(b, r2, t);
        rep.min_residual = std::min(rep.min_residual, res);
        rep.max_residual = std::max(rep.max_residual, res);
        const double wrong = sign_violation(b, r2, t);
        if (wrong > kSignTolerance) ++rep.violations;
        if (wrong > rep.worst_relative) {
            rep.worst_relative = wrong;
            rep.worst_r2 = r2;
            rep.worst_t = t;
        }
        ++rep.samples;
    };

    for (int i = 0; i < samples; ++i) {
        const double r2 = r2_max * i / (samples - 1);
        for (int k = 0; k < samples; ++k) visit_point(r2, t_hi * k / (samples - 1));
    }
    detail::Halton seq(seed);
    const long interior = static_cast<long>(samples) * samples;
    for (long i = 0; i < interior; ++i, seq.advance()) visit_point(r2_max * seq.coord(0), t_hi * seq.coord(1));

    rep.passed = rep.violations == 0;
    return rep;
}

}  // namespace srd
