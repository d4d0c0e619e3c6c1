#pragma once

#include "thinlayer/fields.hpp"
#include "thinlayer/geometry.hpp"
#include "thinlayer/layer_solver.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace thinlayer {

/// Closed-form spatial factor s(x) of the data families.
struct SpatialFunction {
    enum class Kind { zero, constant, sin_product, affine, polynomial };
    Kind kind = Kind::zero;
    double amplitude = 1.0;
    std::array<double, 2> wave{1.0, 1.0};  ///< sin_product: a sin(k1 x1) sin(k2 x2)
    Vec3 slope = Vec3::Zero();             ///< affine: a + slope . x
    unsigned long long seed = 42;          ///< polynomial: a * AmbientPolynomial(seed)

    double value(const Vec3& x) const;
};

/// Transverse factor phi(t) of a separable source f(x, t) = s(x) phi(t).
struct TransverseProfile {
    enum class Kind { polynomial, cosine, log_singular };
    Kind kind = Kind::polynomial;
    std::vector<double> coefficients{1.0};  ///< polynomial: sum c_k t^k
    double frequency = 1.0;                 ///< cosine: cos(w t)

    /// log_singular: 1 / (sqrt(t) ln t) on (0, 1/2), zero elsewhere.
    double value(double t) const;
};

struct SourceFamily {
    SpatialFunction spatial;
    TransverseProfile profile;
    /// Must be set for sources whose t-average is not expected to converge.
    bool pathological = false;

    double operator()(const Vec3& x, double t) const { return spatial.value(x) * profile.value(t); }
    bool lebesgue_regular() const { return profile.kind != TransverseProfile::Kind::log_singular; }
};

/// Face data q(x, +eps) = s(x) psi(eps), q(x, -eps) = s(x) psi(-eps).
struct FluxFamily {
    enum class Kind { zero, odd_power, even, sine };
    Kind kind = Kind::zero;
    SpatialFunction spatial;
    double exponent = 1.0;   ///< odd_power: psi(s) = sign(s) |s|^exponent
    double frequency = 1.0;  ///< sine: psi(s) = sin(w s)
    double level = 1.0;      ///< even: psi(s) = level

    double profile(double signed_eps) const;
    /// lim (psi(eps) - psi(-eps)) / (2 eps), when it exists.
    std::optional<double> q0_factor() const;
};

struct Q0Estimate {
    ScalarField q0;
    /// Max-norm differences of successive difference quotients, same order as eps.
    std::vector<double> cauchy_defects;
    /// Order of the remainder used for extrapolation; 0 when the quotients agree to roundoff.
    double order = 0.0;
    bool extrapolated = false;
};

/// Limit of (q(eps) - q(-eps)) / (2 eps) from at least three strictly decreasing
/// eps values: Richardson extrapolation from the two smallest eps, with the
/// remainder order estimated from the three smallest. Throws NoConvergence
/// when the Cauchy defect grows as eps decreases.
Q0Estimate compute_q0(const std::vector<ScalarField>& q_plus, const std::vector<ScalarField>& q_minus,
                      const std::vector<double>& eps);

struct WeakQ0Check {
    /// max over test functions of |<phi, d_eps> - <phi, q0>| / max(1, |<phi, q0>|), per eps.
    std::vector<double> per_eps;
    /// Same residual for the extrapolated pairings.
    double extrapolated = 0.0;
};

/// Weak form of the q0 definition against `count` seeded polynomial test functions.
WeakQ0Check weak_q0_check(const SurfaceMesh& mesh, const std::vector<ScalarField>& q_plus,
                          const std::vector<ScalarField>& q_minus, const std::vector<double>& eps,
                          const Q0Estimate& estimate, int count = 10, unsigned long long seed = 42);

/// Dirichlet problem Laplace-Beltrami T = f0 + q0 on C, T = 0 on the boundary.
ScalarField solve_limit_bvp(const SurfaceMesh& mesh, const ScalarField& f0, const ScalarField& q0);

struct SweepConfig {
    Chart chart;
    std::vector<double> eps;
    int transverse_intervals = 8;
    SourceFamily source;
    FluxFamily flux;
    /// Bound on the final mid-plane L2 error against the discrete limit.
    double tol = 1e-2;
    /// Optional closed-form limit solution for the exact_l2_err column.
    AmbientFunction exact_limit;
};

struct GammaRecord {
    double eps = 0.0;
    double l2_err = 0.0;        ///< ||T_eps(., 0) - T_limit||_L2(C)
    double h1_err = 0.0;        ///< H1 seminorm of the same difference
    double avg_l2_err = 0.0;    ///< tau-averaged variant
    double exact_l2_err = 0.0;  ///< against exact_limit; NaN when none
    double scaled_energy = 0.0;
    double limit_energy = 0.0;
    double recovery_energy = 0.0;  ///< E_eps of the extruded limit solution
    double t_indep_ratio = 0.0;
    int iterations = 0;
    bool pass = false;
    std::string failure;
};

struct GammaReport {
    std::vector<GammaRecord> records;  ///< eps descending
    double fitted_order = 0.0;         ///< NaN when the errors are at noise level
    double limit_energy = 0.0;
    double limit_l2_norm = 0.0;
    double noise_floor = 0.0;
    std::vector<double> q0_cauchy_defects;
    double q0_order = 0.0;
    bool monotone = false;
    bool pass = false;
};

/// Solves the layer problem for every eps (in parallel), compares mid-plane
/// traces and energies with the limit problem, and flags PASS when the errors
/// are non-increasing (5 % jitter plus a noise floor) and the last is <= tol.
GammaReport gamma_sweep(const SweepConfig& config);

/// int |d_tau T|^2 / int |T|^2.
double t_independence_check(const LayerMesh& mesh, const LayerField& t);

struct LebesgueReport {
    std::vector<double> eps;
    std::vector<double> averages;  ///< F_eps = (1/eps) int_{-eps}^{eps} F(t) dt
    double f_at_zero = 0.0;        ///< F(0) = int_C |f(., 0)|^2
    bool divergent = false;        ///< monotone growth beyond 10x the first average
    bool bounded_by_2f0 = false;   ///< every F_eps <= 2 F(0)
};

/// F(t) = int_C |f(., t)|^2 by surface quadrature, averaged over (-eps, eps)
/// with tanh-sinh quadrature on each half.
LebesgueReport lebesgue_diagnostic(const SurfaceMesh& mesh, const LayerFunction& f, const std::vector<double>& eps);

}  // namespace thinlayer
