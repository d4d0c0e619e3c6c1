#include "thinlayer/tangential_ops.hpp"

#include "thinlayer/errors.hpp"
#include "thinlayer/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thinlayer {
namespace {

void check_size(const SurfaceMesh& mesh, std::size_t n) {
    if (n != mesh.node_count()) throw std::invalid_argument("field size does not match the mesh");
}

}  // namespace

VectorField surface_gradient(const SurfaceMesh& mesh, const ScalarField& f) {
    check_size(mesh, f.size());
    const auto d1 = mesh.chart_partial(f.values, 0);
    const auto d2 = mesh.chart_partial(f.values, 1);
    VectorField out(std::vector<Vec3>(f.size(), Vec3::Zero()));
    parallel_for(f.size(), [&](std::size_t k) {
        const auto& g = mesh.geometry(k);
        out[k] = d1[k] * g.contravariant[0] + d2[k] * g.contravariant[1];
    });
    return out;
}

ScalarField gunter_derivative(const SurfaceMesh& mesh, const ScalarField& f, int j) {
    return surface_gradient(mesh, f).component(j);
}

ScalarField stokes_derivative(const SurfaceMesh& mesh, const ScalarField& f, int j, int k) {
    const VectorField grad = surface_gradient(mesh, f);
    ScalarField out = ScalarField::zeros(f.size());
    if (j == k) return out;
    for (std::size_t n = 0; n < f.size(); ++n) {
        const Vec3& nu = mesh.geometry(n).normal;
        out[n] = nu(j) * grad[n](k) - nu(k) * grad[n](j);
    }
    return out;
}

ScalarField surface_divergence(const SurfaceMesh& mesh, const VectorField& v, double tang_tol) {
    check_size(mesh, v.size());
    double scale = 0.0;
    for (const auto& x : v.values) scale = std::max(scale, x.norm());
    for (std::size_t n = 0; n < v.size(); ++n) {
        const double defect = std::abs(v[n].dot(mesh.geometry(n).normal));
        if (defect > tang_tol * scale) throw NonTangentInput(n, defect);
    }
    ScalarField out = ScalarField::zeros(v.size());
    for (int j = 0; j < 3; ++j) {
        const VectorField grad = surface_gradient(mesh, v.component(j));
        for (std::size_t n = 0; n < v.size(); ++n) out[n] += grad[n](j);
    }
    return out;
}

ScalarField laplace_beltrami(const SurfaceMesh& mesh, const ScalarField& f) {
    return surface_divergence(mesh, surface_gradient(mesh, f), 1e-8);
}

ScalarField laplace_beltrami_stokes(const SurfaceMesh& mesh, const ScalarField& f) {
    ScalarField out = ScalarField::zeros(f.size());
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            if (j == k) continue;
            const ScalarField mf = stokes_derivative(mesh, f, j, k);
            const ScalarField mmf = stokes_derivative(mesh, mf, j, k);
            for (std::size_t n = 0; n < f.size(); ++n) out[n] += 0.5 * mmf[n];
        }
    }
    return out;
}

ScalarField gunter_adjoint(const SurfaceMesh& mesh, const ScalarField& f, int j) {
    ScalarField out = gunter_derivative(mesh, f, j);
    for (std::size_t n = 0; n < f.size(); ++n) {
        const auto& g = mesh.geometry(n);
        out[n] = -out[n] + g.normal(j) * g.h0 * f[n];
    }
    return out;
}

ScalarField gunter_adjoint_literal(const SurfaceMesh& mesh, const ScalarField& f, int j) {
    ScalarField out = gunter_derivative(mesh, f, j);
    for (std::size_t n = 0; n < f.size(); ++n) {
        const auto& g = mesh.geometry(n);
        out[n] = -out[n] - g.normal(j) * g.h0 * f[n];
    }
    return out;
}

double surface_inner(const SurfaceMesh& mesh, const ScalarField& f, const ScalarField& g) {
    check_size(mesh, f.size());
    check_size(mesh, g.size());
    const auto w = mesh.quadrature_weights();
    std::vector<double> terms(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) terms[n] = w[n] * f[n] * g[n];
    return pairwise_sum(terms);
}

double boundary_inner(const SurfaceMesh& mesh, const ScalarField& f, const ScalarField& g) {
    check_size(mesh, f.size());
    check_size(mesh, g.size());
    const Chart& chart = mesh.chart();
    std::vector<double> terms;
    // Each non-periodic direction alpha contributes two edges along direction beta.
    for (int alpha = 0; alpha < 2; ++alpha) {
        if (chart.periodic(alpha)) continue;
        const int beta = 1 - alpha;
        const double h = chart.spacing(beta);
        const int m = mesh.nodes(beta);
        for (int side : {0, mesh.nodes(alpha) - 1}) {
            for (int p = 0; p < m; ++p) {
                const std::size_t n = alpha == 0 ? mesh.index(side, p) : mesh.index(p, side);
                const bool end = !chart.periodic(beta) && (p == 0 || p == m - 1);
                const double ds = mesh.geometry(n).covariant[beta].norm() * h * (end ? 0.5 : 1.0);
                terms.push_back(ds * f[n] * g[n]);
            }
        }
    }
    return pairwise_sum(terms);
}

bool IdentityReport::all_pass() const {
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

const IdentityResult& IdentityReport::find(const std::string& name) const {
    for (const auto& r : results)
        if (r.identity_name == name) return r;
    throw std::out_of_range("no identity named " + name);
}

namespace {

class ResidualTracker {
public:
    void add(double residual, double magnitude) {
        residual_ = std::max(residual_, std::abs(residual));
        scale_ = std::max(scale_, std::abs(magnitude));
    }
    double relative() const { return residual_ / std::max(1.0, scale_); }

private:
    double residual_ = 0.0;
    double scale_ = 0.0;
};

}  // namespace

IdentityReport verify_identities(const SurfaceMesh& mesh, double tol, const IdentityOptions& options) {
    const unsigned long long seed = options.seed;
    const int field_count = options.field_count;
    const std::size_t nn = mesh.node_count();
    std::size_t deep = 0;
    for (std::size_t n = 0; n < nn; ++n)
        if (mesh.boundary_distance(n) >= 2) ++deep;

    ResidualTracker tangency, dependence, antisym, recip_d, recip_m, gunter_amb, lap, skew, adjoint;

    for (std::size_t n = 0; n < nn; ++n) {
        const Vec3& nu = mesh.geometry(n).normal;
        Vec3 sum = Vec3::Zero();
        for (int j = 0; j < 3; ++j) sum += nu(j) * (Vec3::Unit(j) - nu(j) * nu);
        dependence.add(sum.norm(), 1.0);
    }

    for (int field = 0; field < field_count; ++field) {
        const AmbientPolynomial poly(seed + static_cast<unsigned long long>(field));
        const ScalarField f = sample(mesh, [&](const Vec3& x) { return poly.value(x); });
        const VectorField grad = surface_gradient(mesh, f);

        std::array<std::array<ScalarField, 3>, 3> m;
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) m[j][k] = stokes_derivative(mesh, f, j, k);

        for (std::size_t n = 0; n < nn; ++n) {
            const auto& g = mesh.geometry(n);
            const Vec3& nu = g.normal;
            tangency.add(nu.dot(grad[n]), grad[n].norm());

            const Vec3 amb = poly.gradient(g.position);
            const Vec3 amb_tangential = amb - nu * nu.dot(amb);
            for (int j = 0; j < 3; ++j) {
                gunter_amb.add(grad[n](j) - amb_tangential(j), amb_tangential(j));
                double rec = 0.0;
                for (int k = 0; k < 3; ++k) {
                    rec += nu(k) * m[k][j][n];
                    antisym.add(m[j][k][n] + m[k][j][n], m[j][k][n]);
                    const double ambient_m = nu(j) * amb(k) - nu(k) * amb(j);
                    recip_m.add(m[j][k][n] - ambient_m, ambient_m);
                }
                recip_d.add(grad[n](j) - rec, grad[n](j));
            }
        }

        const ScalarField lap_d = laplace_beltrami(mesh, f);
        const ScalarField lap_m = laplace_beltrami_stokes(mesh, f);
        for (std::size_t n = 0; n < nn; ++n) {
            if (mesh.boundary_distance(n) < 2) continue;
            lap.add(lap_d[n] - lap_m[n], lap_d[n]);
        }

        if (mesh.closed()) {
            const AmbientPolynomial other(seed + 1000 + static_cast<unsigned long long>(field));
            const ScalarField psi = sample(mesh, [&](const Vec3& x) { return other.value(x); });
            for (int j = 0; j < 3; ++j) {
                const double lhs = surface_inner(mesh, gunter_derivative(mesh, f, j), psi);
                const double rhs = surface_inner(mesh, f, gunter_adjoint(mesh, psi, j));
                adjoint.add(lhs - rhs, lhs);
                for (int k = 0; k < 3; ++k) {
                    if (j == k) continue;
                    const double a = surface_inner(mesh, m[j][k], psi);
                    const double b = surface_inner(mesh, f, stokes_derivative(mesh, psi, j, k));
                    skew.add(a + b, a);
                }
            }
        }
    }

    ResidualTracker w_sym, w_normal;
    for (std::size_t n = 0; n < nn; ++n) {
        const auto& g = mesh.geometry(n);
        w_sym.add((g.weingarten - g.weingarten.transpose()).cwiseAbs().maxCoeff(),
                  g.weingarten.cwiseAbs().maxCoeff());
        w_normal.add((g.weingarten * g.normal).cwiseAbs().maxCoeff(), g.weingarten.cwiseAbs().maxCoeff());
    }

    IdentityReport report;
    auto push = [&](std::string name, const ResidualTracker& r, std::size_t nodes) {
        const double res = r.relative();
        report.results.push_back({std::move(name), res, nodes, res <= tol});
    };
    push("tangency", tangency, nn);
    push("generating_fields_dependence", dependence, nn);
    push("stokes_antisymmetry", antisym, nn);
    push("reciprocal_gunter_from_stokes", recip_d, nn);
    if (options.ambient_routes) {
        push("reciprocal_stokes_vs_ambient", recip_m, nn);
        push("gunter_vs_ambient", gunter_amb, nn);
    }
    push("laplacian_gunter_vs_stokes", lap, deep);
    push("weingarten_symmetry", w_sym, nn);
    push("weingarten_annihilates_normal", w_normal, nn);
    if (mesh.closed()) {
        push("stokes_skew_symmetry", skew, nn);
        push("gunter_adjoint", adjoint, nn);
    }
    return report;
}

}  // namespace thinlayer
