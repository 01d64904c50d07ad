#pragma once

// Checks that simulated solutions respect the barrier bounds, that the
// discrete comparison principle holds, and that the closed forms are
// consistent with finite differences and with their residual signs.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srd/barriers.hpp"
#include "srd/picard.hpp"
#include "srd/radial_pde.hpp"

namespace srd {

enum class CheckKind : std::uint8_t {
    Envelope,
    DecayRate,
    HomogeneousRate,
    ConeExtinction,
    Comparison,
    FdConsistency,
    PicardBounds,
    ResidualSign,
};

const char* kind_name(CheckKind k);

/// Grid and time-stepping settings of a simulation-backed check.
struct Resolution {
    double radius = 20.0;
    int cells = 2000;
    double dt = 1e-3;
    DiffusionScheme scheme = DiffusionScheme::BackwardEuler;
    double floor = 1e-8;
    double dt_min = 0.0;
    double snapshot_every = 0.05;
};

struct Location {
    double r = 0.0;
    double t = 0.0;
};

struct RuntimeStats {
    long steps = 0;
    double wall_ms = 0.0;
};

struct VerificationReport {
    CheckKind kind = CheckKind::Envelope;
    /// Canonical `key=value` list; the parameter hash is taken over it.
    std::string params;
    double tolerance = 0.0;
    bool passed = false;
    double worst_violation = 0.0;
    Location where;
    RuntimeStats stats;
    std::vector<std::pair<std::string, std::string>> details;
    /// Snapshots of the (first) simulation, when the check ran one.
    std::optional<Trajectory> trajectory;

    std::string params_hash() const;
};

/// u0 = ψ1(·, 0), Dirichlet data ψ1 at r = R; checks ψ1 <= u <= ψ2 after every
/// step, violations measured relative to the barrier value.
VerificationReport verify_envelope(const GrowthEnvelope& env, const Resolution& res, double tolerance,
                                   double t_end = 1.0);

/// u0 = ψ3(·, 0), Dirichlet data ψ3; checks u <= ψ3 for t in [0, 0.95 T].
VerificationReport verify_decay_rate(const DecayBarrierParams& p, const Resolution& res, double tolerance);

/// Initial profile for the homogeneous check; empty means u0 = sup0.
using Profile = std::function<double(double r2)>;

/// No-flux run from data with sup norm sup0; checks u <= ψ4 on [0, 0.95 T]
/// and that every node is extinct by T + tolerance, T = sup0^{1+ν}/(1+ν).
VerificationReport verify_homogeneous_rate(double nu, double sup0, const Resolution& res, double tolerance,
                                           const Profile& profile = {});

/// u0 = ψ5(·, 0), Dirichlet data ψ5; checks u <= ψ5 on [0, 0.95 T] and that the
/// origin is the first node to go extinct, no later than T + tolerance.
VerificationReport verify_cone_extinction(const ConeBarrierParams& p, const Resolution& res, double tolerance);

/// Runs both problems in lockstep (common dt) and checks u_low <= u_high + tolerance
/// after every step. Crossed initial or boundary data is a ConstraintViolation.
VerificationReport verify_comparison(const Field& low, const Field& high, const BoundaryCondition& bc_low,
                                     const BoundaryCondition& bc_high, const SolverConfig& cfg,
                                     double tolerance = 1e-6);

/// `pairs` ordered pairs c_lo ψ1(·,0) <= c_hi ψ1(·,0), c uniform in [0.5, 1] from
/// a seeded generator, with boundary data scaled by the same c.
std::vector<VerificationReport> comparison_suite(const GrowthEnvelope& env, const Resolution& res, double t_end,
                                                 std::uint64_t seed, int pairs = 10, double tolerance = 1e-6);

/// Analytic Laplacian and time derivative against central differences of eval
/// at `samples` Halton points; discrepancy |a - fd| / (1 + |a|).
VerificationReport fd_consistency_check(const Barrier& b, int samples, double tolerance = 1e-6,
                                        std::uint64_t seed = 0);

/// `samples` quasi-random admissible (parameters, point) draws for one family;
/// violations measured by sign_violation.
VerificationReport residual_sign_suite(BarrierFamily family, int samples, std::uint64_t seed = 0,
                                       double tolerance = kSignTolerance);

/// Iterate bounds δ/2 <= u_k <= w and agreement of the last iterate with the
/// direct nonlinear solve (same grid, dt = lattice step, TR-BDF2 diffusion).
VerificationReport verify_picard_bounds(const PicardConfig& cfg, double tolerance = 1e-6,
                                        double agreement_tolerance = 1e-5);

/// Structured `key = value` document.
void write_report(std::ostream& out, const VerificationReport& rep);
void write_summary_header(std::ostream& out);
/// kind,params_hash,verdict,worst_violation,where_r,where_t,wall_ms
void write_summary_row(std::ostream& out, const VerificationReport& rep);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace srd
