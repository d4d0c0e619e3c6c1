#include "thinlayer/gamma_harness.hpp"

#include "thinlayer/convergence.hpp"
#include "thinlayer/errors.hpp"
#include "thinlayer/parallel.hpp"
#include "thinlayer/surface_solver.hpp"
#include "thinlayer/tangential_ops.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace thinlayer {

double SpatialFunction::value(const Vec3& x) const {
    switch (kind) {
        case Kind::zero:
            return 0.0;
        case Kind::constant:
            return amplitude;
        case Kind::sin_product:
            return amplitude * std::sin(wave[0] * x(0)) * std::sin(wave[1] * x(1));
        case Kind::affine:
            return amplitude + slope.dot(x);
        case Kind::polynomial:
            return amplitude * AmbientPolynomial(seed).value(x);
    }
    return 0.0;
}

double TransverseProfile::value(double t) const {
    switch (kind) {
        case Kind::polynomial: {
            double v = 0.0;
            for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) v = v * t + *it;
            return v;
        }
        case Kind::cosine:
            return std::cos(frequency * t);
        case Kind::log_singular:
            if (t <= 0.0 || t >= 0.5) return 0.0;
            return 1.0 / (std::sqrt(t) * std::log(t));
    }
    return 0.0;
}

double FluxFamily::profile(double s) const {
    switch (kind) {
        case Kind::zero:
            return 0.0;
        case Kind::odd_power:
            return std::copysign(std::pow(std::abs(s), exponent), s);
        case Kind::even:
            return level;
        case Kind::sine:
            return std::sin(frequency * s);
    }
    return 0.0;
}

std::optional<double> FluxFamily::q0_factor() const {
    switch (kind) {
        case Kind::zero:
        case Kind::even:
            return 0.0;
        case Kind::odd_power:
            if (exponent == 1.0) return 1.0;
            if (exponent > 1.0) return 0.0;
            return std::nullopt;
        case Kind::sine:
            return frequency;
    }
    return std::nullopt;
}

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void check_eps(const std::vector<double>& eps, std::size_t minimum) {
    if (eps.size() < minimum) throw std::invalid_argument("need at least " + std::to_string(minimum) + " eps values");
    for (std::size_t k = 0; k < eps.size(); ++k) {
        if (!(eps[k] > 0.0) || !std::isfinite(eps[k])) throw std::invalid_argument("eps values must be positive");
        if (k > 0 && !(eps[k] < eps[k - 1])) throw std::invalid_argument("eps values must be strictly decreasing");
    }
}

// R(p) = (e1^p - e2^p) / (e2^p - e3^p) grows with p for e1 > e2 > e3.
double remainder_ratio(double p, double e1, double e2, double e3) {
    return (std::pow(e1, p) - std::pow(e2, p)) / (std::pow(e2, p) - std::pow(e3, p));
}

double estimate_order(double ratio, double e1, double e2, double e3) {
    double lo = 1e-3, hi = 12.0;
    if (ratio <= remainder_ratio(lo, e1, e2, e3)) return lo;
    if (ratio >= remainder_ratio(hi, e1, e2, e3)) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (remainder_ratio(mid, e1, e2, e3) < ratio ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

constexpr double kNoise = 64 * std::numeric_limits<double>::epsilon();

// Extrapolates the last element of a sequence of values at e2 > e3 with order p.
double richardson(double d2, double d3, double e2, double e3, double p) {
    const double a = std::pow(e2, p), b = std::pow(e3, p);
    return d3 + (d3 - d2) * b / (a - b);
}

}  // namespace

Q0Estimate compute_q0(const std::vector<ScalarField>& q_plus, const std::vector<ScalarField>& q_minus,
                      const std::vector<double>& eps) {
    check_eps(eps, 3);
    if (q_plus.size() != eps.size() || q_minus.size() != eps.size()) {
        throw std::invalid_argument("one pair of face fields per eps is required");
    }
    const std::size_t n = q_plus.front().size();
    std::vector<std::vector<double>> d(eps.size(), std::vector<double>(n));
    for (std::size_t k = 0; k < eps.size(); ++k) {
        if (q_plus[k].size() != n || q_minus[k].size() != n) throw std::invalid_argument("face field size mismatch");
        for (std::size_t i = 0; i < n; ++i) d[k][i] = (q_plus[k][i] - q_minus[k][i]) / (2 * eps[k]);
    }

    Q0Estimate out;
    double scale = 0.0;
    for (const auto& dk : d) scale = std::max(scale, max_abs(dk));
    const double noise = kNoise * std::max(scale, std::numeric_limits<double>::min());
    for (std::size_t k = 0; k + 1 < d.size(); ++k) {
        const double c = max_abs_diff(d[k], d[k + 1]);
        if (!std::isfinite(c)) throw NoConvergence("non-finite difference quotient at eps = " + std::to_string(eps[k + 1]));
        out.cauchy_defects.push_back(c);
    }
    for (std::size_t k = 0; k + 1 < out.cauchy_defects.size(); ++k) {
        const double prev = out.cauchy_defects[k], next = out.cauchy_defects[k + 1];
        if (next > noise && next > prev * (1 + 1e-9)) {
            throw NoConvergence("Cauchy defect of the q0 quotient grows from " + std::to_string(prev) + " to " +
                                std::to_string(next) + " as eps decreases");
        }
    }

    const std::size_t last = eps.size() - 1;
    const double c12 = out.cauchy_defects[last - 2];
    const double c23 = out.cauchy_defects[last - 1];
    out.q0 = ScalarField(d[last]);
    if (c23 <= noise) return out;
    out.order = estimate_order(c12 / c23, eps[last - 2], eps[last - 1], eps[last]);
    out.extrapolated = true;
    for (std::size_t i = 0; i < n; ++i) {
        out.q0[i] = richardson(d[last - 1][i], d[last][i], eps[last - 1], eps[last], out.order);
    }
    return out;
}

WeakQ0Check weak_q0_check(const SurfaceMesh& mesh, const std::vector<ScalarField>& q_plus,
                          const std::vector<ScalarField>& q_minus, const std::vector<double>& eps,
                          const Q0Estimate& estimate, int count, unsigned long long seed) {
    check_eps(eps, 2);
    WeakQ0Check out;
    out.per_eps.assign(eps.size(), 0.0);
    for (int c = 0; c < count; ++c) {
        const AmbientPolynomial poly(seed + static_cast<unsigned long long>(c));
        const ScalarField phi = sample(mesh, [&](const Vec3& x) { return poly.value(x); });
        const double target = surface_inner(mesh, phi, estimate.q0);
        const double scale = std::max(1.0, std::abs(target));
        std::vector<double> pairing(eps.size());
        for (std::size_t k = 0; k < eps.size(); ++k) {
            ScalarField quotient = ScalarField::zeros(mesh.node_count());
            for (std::size_t i = 0; i < quotient.size(); ++i) {
                quotient[i] = (q_plus[k][i] - q_minus[k][i]) / (2 * eps[k]);
            }
            pairing[k] = surface_inner(mesh, phi, quotient);
            out.per_eps[k] = std::max(out.per_eps[k], std::abs(pairing[k] - target) / scale);
        }
        const std::size_t last = eps.size() - 1;
        const double extrapolated = estimate.extrapolated
                                        ? richardson(pairing[last - 1], pairing[last], eps[last - 1], eps[last],
                                                     estimate.order)
                                        : pairing[last];
        out.extrapolated = std::max(out.extrapolated, std::abs(extrapolated - target) / scale);
    }
    return out;
}

ScalarField solve_limit_bvp(const SurfaceMesh& mesh, const ScalarField& f0, const ScalarField& q0) {
    const std::size_t n = mesh.node_count();
    if (f0.size() != n || q0.size() != n) throw std::invalid_argument("limit data size mismatch");
    MixedBVPSpec spec = MixedBVPSpec::homogeneous(n);
    for (std::size_t i = 0; i < n; ++i) spec.source[i] = f0[i] + q0[i];
    return solve_mixed_bvp(mesh, AnisotropyField::identity(n), spec);
}

double t_independence_check(const LayerMesh& mesh, const LayerField& t) { return t_independence_ratio(mesh, t); }

namespace {

double l2_norm(const SurfaceMesh& mesh, const ScalarField& a) { return std::sqrt(surface_inner(mesh, a, a)); }

ScalarField difference(const ScalarField& a, const ScalarField& b) {
    ScalarField d = ScalarField::zeros(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

}  // namespace

GammaReport gamma_sweep(const SweepConfig& config) {
    check_eps(config.eps, 1);
    if (!config.source.lebesgue_regular() && !config.source.pathological) {
        throw ConfigError("source", "profile is not Lebesgue regular at t = 0; mark the source as pathological");
    }
    const SurfaceMesh mesh = build_surface_mesh(config.chart);
    for (double e : config.eps) {
        if (e >= mesh.eps_max()) throw LayerTooThick(e, mesh.eps_max());
    }
    const std::size_t ns = mesh.node_count();
    const std::size_t ne = config.eps.size();

    std::vector<ScalarField> q_plus(ne), q_minus(ne);
    const ScalarField spatial_q = sample(mesh, [&](const Vec3& x) { return config.flux.spatial.value(x); });
    for (std::size_t k = 0; k < ne; ++k) {
        q_plus[k] = q_minus[k] = spatial_q;
        const double up = config.flux.profile(config.eps[k]), down = config.flux.profile(-config.eps[k]);
        for (std::size_t i = 0; i < ns; ++i) {
            q_plus[k][i] *= up;
            q_minus[k][i] *= down;
        }
    }

    GammaReport report;
    ScalarField q0 = ScalarField::zeros(ns);
    if (ne >= 3) {
        const Q0Estimate est = compute_q0(q_plus, q_minus, config.eps);
        q0 = est.q0;
        report.q0_cauchy_defects = est.cauchy_defects;
        report.q0_order = est.order;
    } else if (const auto factor = config.flux.q0_factor()) {
        for (std::size_t i = 0; i < ns; ++i) q0[i] = *factor * spatial_q[i];
    } else {
        throw NoConvergence("q0 needs three eps values for this flux family");
    }

    const ScalarField f0 = sample(mesh, [&](const Vec3& x) { return config.source(x, 0.0); });
    const ScalarField limit = solve_limit_bvp(mesh, f0, q0);
    report.limit_energy = limit_energy(mesh, limit, f0, q0);
    report.limit_l2_norm = l2_norm(mesh, limit);
    ScalarField exact;
    if (config.exact_limit) exact = sample(mesh, config.exact_limit);

    report.records.resize(ne);
    parallel_tasks(ne, [&](std::size_t k) {
        GammaRecord& rec = report.records[k];
        rec.eps = config.eps[k];
        rec.limit_energy = report.limit_energy;
        try {
            const LayerMesh lm(mesh, rec.eps, config.transverse_intervals);
            LayerData data{sample(lm, [&](const Vec3& x, double t) { return config.source(x, t); }), q_plus[k],
                           q_minus[k]};
            const LayerProblem problem(lm, std::move(data));
            const auto sol = problem.solve();
            rec.iterations = sol.iterations;
            const ScalarField err = difference(sol.field.slice(lm, lm.mid_plane()), limit);
            rec.l2_err = l2_norm(mesh, err);
            rec.h1_err = std::sqrt(std::max(0.0, problem.surface_matrices().stiffness.bilinear(err.values, err.values)));
            rec.avg_l2_err = l2_norm(mesh, difference(tau_average(lm, sol.field), limit));
            rec.exact_l2_err = exact.size() ? l2_norm(mesh, difference(sol.field.slice(lm, lm.mid_plane()), exact))
                                            : std::numeric_limits<double>::quiet_NaN();
            rec.scaled_energy = problem.scaled_energy(sol.field);
            rec.recovery_energy = problem.scaled_energy(extrude(lm, limit));
            const LayerForms forms = problem.forms(sol.field);
            rec.t_indep_ratio = forms.mass > 0.0 ? forms.transverse / forms.mass : 0.0;
            rec.pass = true;
        } catch (const std::exception& e) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            rec.l2_err = rec.h1_err = rec.avg_l2_err = rec.exact_l2_err = nan;
            rec.scaled_energy = rec.recovery_energy = rec.t_indep_ratio = nan;
            rec.failure = e.what();
            rec.pass = false;
        }
    });

    // CG stops at a 1e-10 relative residual; differences below this are noise.
    report.noise_floor = 1e-7 * report.limit_l2_norm + 1e-14;
    report.monotone = true;
    for (std::size_t k = 0; k < ne; ++k) {
        GammaRecord& rec = report.records[k];
        if (k > 0 && rec.pass) {
            const double prev = report.records[k - 1].l2_err;
            if (!(rec.l2_err <= 1.05 * prev + report.noise_floor)) report.monotone = false;
        }
        if (!rec.pass) report.monotone = false;
        rec.pass = rec.pass && report.monotone;
    }
    if (ne > 0 && report.records.back().pass && !(report.records.back().l2_err <= config.tol)) {
        report.records.back().pass = false;
    }

    report.fitted_order = std::numeric_limits<double>::quiet_NaN();
    if (ne >= 3) {
        std::vector<double> h, e;
        for (std::size_t k = ne - 3; k < ne; ++k) {
            if (!(report.records[k].l2_err > report.noise_floor)) break;
            h.push_back(report.records[k].eps);
            e.push_back(report.records[k].l2_err);
        }
        if (h.size() == 3) report.fitted_order = fit_order(h, e);
    }
    report.pass = ne > 0;
    for (const auto& rec : report.records) report.pass = report.pass && rec.pass;
    return report;
}

LebesgueReport lebesgue_diagnostic(const SurfaceMesh& mesh, const LayerFunction& f, const std::vector<double>& eps) {
    check_eps(eps, 1);
    const auto weights = mesh.quadrature_weights();
    auto big_f = [&](double t) {
        std::vector<double> terms(mesh.node_count());
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const double v = f(mesh.geometry(i).position, t);
            terms[i] = weights[i] * v * v;
        }
        return pairwise_sum(terms);
    };
    LebesgueReport out;
    out.eps = eps;
    out.f_at_zero = big_f(0.0);
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (double e : eps) {
        const double lower = integrator.integrate(big_f, -e, 0.0);
        const double upper = integrator.integrate(big_f, 0.0, e);
        out.averages.push_back((lower + upper) / e);
    }
    bool growing = true;
    for (std::size_t k = 1; k < out.averages.size(); ++k) growing = growing && out.averages[k] > out.averages[k - 1];
    out.divergent = out.averages.size() > 1 && growing && out.averages.back() > 10 * out.averages.front();
    out.bounded_by_2f0 = true;
    for (double a : out.averages) {
        out.bounded_by_2f0 = out.bounded_by_2f0 && a <= 2 * out.f_at_zero * (1 + 1e-12);
    }
    return out;
}

}  // namespace thinlayer
