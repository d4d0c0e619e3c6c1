#include <doctest.h>

#include "thinlayer/convergence.hpp"
#include "thinlayer/errors.hpp"
#include "thinlayer/tangential_ops.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

using namespace thinlayer;

namespace {

const ChartDomain kUnitSquare{{0.0, 0.0}, {1.0, 1.0}};
const ChartDomain kSphereBand{{M_PI / 6, 0.0}, {M_PI / 2, M_PI / 2}};

SurfaceMesh sphere(int n) { return build_surface_mesh(make_sphere_cap(1.0, kSphereBand, {n, n})); }

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("Gunter derivative examples") {
    const SurfaceMesh plane = build_surface_mesh(make_plane(kUnitSquare, {8, 8}));
    const ScalarField ones = sample(plane, [](const Vec3&) { return 3.5; });
    for (int j = 0; j < 3; ++j) {
        for (double v : gunter_derivative(plane, ones, j).values) CHECK(v == 0.0);
    }
    const ScalarField x1 = sample(plane, [](const Vec3& x) { return x(0); });
    for (std::size_t n = 0; n < plane.node_count(); ++n) {
        CHECK(gunter_derivative(plane, x1, 0)[n] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(gunter_derivative(plane, x1, 1)[n]) < 1e-14);
        CHECK(gunter_derivative(plane, x1, 2)[n] == 0.0);
    }

    // On the unit sphere D_j x3 = delta_j3 - nu_j nu_3 (the field d^3).
    std::vector<double> hs, errs;
    for (int n : {16, 32, 64}) {
        const SurfaceMesh mesh = sphere(n);
        const ScalarField x3 = sample(mesh, [](const Vec3& x) { return x(2); });
        const VectorField grad = surface_gradient(mesh, x3);
        double err = 0.0;
        for (std::size_t k = 0; k < mesh.node_count(); ++k) {
            const Vec3& nu = mesh.geometry(k).normal;
            const Vec3 d3 = Vec3::UnitZ() - nu(2) * nu;
            err = std::max(err, (grad[k] - d3).cwiseAbs().maxCoeff());
        }
        hs.push_back(1.0 / n);
        errs.push_back(err);
    }
    CHECK(errs.back() < 1e-3);
    CHECK(fit_order(hs, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("tangency holds at every node for arbitrary fields") {
    const SurfaceMesh mesh = build_surface_mesh(make_torus(2.0, 0.7, {24, 20}));
    const AmbientPolynomial poly(7);
    const ScalarField f = sample(mesh, [&](const Vec3& x) { return poly.value(x); });
    const VectorField grad = surface_gradient(mesh, f);
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        CHECK(std::abs(grad[n].dot(mesh.geometry(n).normal)) < 1e-12 * std::max(1.0, grad[n].norm()));
    }
}

TEST_CASE("Stokes derivative examples") {
    const SurfaceMesh plane = build_surface_mesh(make_plane(kUnitSquare, {8, 8}));
    const ScalarField x1 = sample(plane, [](const Vec3& x) { return x(0); });
    for (int j = 0; j < 3; ++j)
        for (double v : stokes_derivative(plane, x1, j, j).values) CHECK(v == 0.0);
    for (double v : stokes_derivative(plane, x1, 2, 0).values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    // Unit sphere: M_13 x3 = nu_1 D_3 x3 - nu_3 D_1 x3 = nu_1 (1 - nu_3^2) + nu_3^2 nu_1 = x1.
    const SurfaceMesh mesh = sphere(32);
    const ScalarField x3 = sample(mesh, [](const Vec3& x) { return x(2); });
    const ScalarField m13 = stokes_derivative(mesh, x3, 0, 2);
    const ScalarField m31 = stokes_derivative(mesh, x3, 2, 0);
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        CHECK(std::abs(m13[n] - mesh.geometry(n).position(0)) < 2e-3);
        CHECK(m13[n] == -m31[n]);
    }
}

TEST_CASE("surface gradient and divergence") {
    const SurfaceMesh plane = build_surface_mesh(make_plane(kUnitSquare, {8, 8}));
    const ScalarField q = sample(plane, [](const Vec3& x) { return x(0) * x(0) + x(1) * x(1); });
    const VectorField grad = surface_gradient(plane, q);
    for (std::size_t n = 0; n < plane.node_count(); ++n) {
        const Vec3& x = plane.geometry(n).position;
        CHECK((grad[n] - Vec3(2 * x(0), 2 * x(1), 0)).norm() < 1e-12);
    }
    for (double v : surface_divergence(plane, grad).values) CHECK(v == doctest::Approx(4.0).epsilon(1e-12));

    const VectorField zero(std::vector<Vec3>(plane.node_count(), Vec3::Zero()));
    for (double v : surface_divergence(plane, zero).values) CHECK(v == 0.0);

    // Div d^3 = -2 x3 on the unit sphere.
    const SurfaceMesh mesh = sphere(32);
    VectorField d3(std::vector<Vec3>(mesh.node_count()));
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        const Vec3& nu = mesh.geometry(n).normal;
        d3[n] = Vec3::UnitZ() - nu(2) * nu;
    }
    const ScalarField div = surface_divergence(mesh, d3);
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        CHECK(std::abs(div[n] + 2.0 * mesh.geometry(n).position(2)) < 5e-3);
    }
}

TEST_CASE("non-tangent input is rejected") {
    const SurfaceMesh mesh = sphere(8);
    VectorField nu(std::vector<Vec3>(mesh.node_count()));
    for (std::size_t n = 0; n < mesh.node_count(); ++n) nu[n] = mesh.geometry(n).normal;
    CHECK_THROWS_AS(surface_divergence(mesh, nu), NonTangentInput);
}

TEST_CASE("Laplace-Beltrami examples") {
    const SurfaceMesh plane = build_surface_mesh(make_plane({{0, 0}, {M_PI, M_PI}}, {32, 32}));
    const ScalarField c = sample(plane, [](const Vec3&) { return -1.25; });
    for (double v : laplace_beltrami(plane, c).values) CHECK(v == 0.0);

    std::vector<double> hs, sphere_err, plane_err;
    for (int n : {16, 32, 64}) {
        const SurfaceMesh s = sphere(n);
        const ScalarField x3 = sample(s, [](const Vec3& x) { return x(2); });
        const ScalarField lap = laplace_beltrami(s, x3);
        double e = 0.0;
        for (std::size_t k = 0; k < s.node_count(); ++k) {
            if (s.boundary_distance(k) < 2) continue;
            e = std::max(e, std::abs(lap[k] + 2.0 * x3[k]));
        }
        sphere_err.push_back(e);

        const SurfaceMesh p = build_surface_mesh(make_plane({{0, 0}, {M_PI, M_PI}}, {n, n}));
        const ScalarField ss = sample(p, [](const Vec3& x) { return std::sin(x(0)) * std::sin(x(1)); });
        const ScalarField lp = laplace_beltrami(p, ss);
        double ep = 0.0;
        for (std::size_t k = 0; k < p.node_count(); ++k) {
            if (p.boundary_distance(k) < 2) continue;
            ep = std::max(ep, std::abs(lp[k] + 2.0 * ss[k]));
        }
        plane_err.push_back(ep);
        hs.push_back(1.0 / n);
    }
    CHECK(fit_order(hs, sphere_err) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(fit_order(hs, plane_err) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("Gunter adjoint") {
    const SurfaceMesh plane = build_surface_mesh(make_plane(kUnitSquare, {8, 8}));
    const AmbientPolynomial poly(3);
    const ScalarField f = sample(plane, [&](const Vec3& x) { return poly.value(x); });
    for (int j = 0; j < 3; ++j) {
        const ScalarField d = gunter_derivative(plane, f, j);
        const ScalarField a = gunter_adjoint(plane, f, j);
        for (std::size_t n = 0; n < plane.node_count(); ++n) CHECK(a[n] == -d[n]);
    }

    // Unit sphere, f = 1: D_3 1 = 0 and H0 = 2, so D_3^* 1 = 2 nu_3.
    const SurfaceMesh s = sphere(32);
    const ScalarField one = sample(s, [](const Vec3&) { return 1.0; });
    const ScalarField a = gunter_adjoint(s, one, 2);
    const ScalarField lit = gunter_adjoint_literal(s, one, 2);
    for (std::size_t n = 0; n < s.node_count(); ++n) {
        CHECK(std::abs(a[n] - 2.0 * s.geometry(n).normal(2)) < 2e-3);
        CHECK(std::abs(lit[n] + 2.0 * s.geometry(n).normal(2)) < 2e-3);
    }
}

TEST_CASE("integration by parts on the torus") {
    std::vector<double> hs, corrected, literal;
    const AmbientPolynomial phi_poly(11), psi_poly(12);
    for (int n : {16, 32, 64}) {
        const SurfaceMesh mesh = build_surface_mesh(make_torus(2.0, 0.5, {n, n}));
        const ScalarField phi = sample(mesh, [&](const Vec3& x) { return phi_poly.value(x); });
        const ScalarField psi = sample(mesh, [&](const Vec3& x) { return psi_poly.value(x); });
        double c = 0.0, l = 0.0;
        for (int j = 0; j < 3; ++j) {
            const double lhs = surface_inner(mesh, gunter_derivative(mesh, phi, j), psi);
            c = std::max(c, std::abs(lhs - surface_inner(mesh, phi, gunter_adjoint(mesh, psi, j))));
            l = std::max(l, std::abs(lhs - surface_inner(mesh, phi, gunter_adjoint_literal(mesh, psi, j))));
        }
        hs.push_back(1.0 / n);
        corrected.push_back(c);
        literal.push_back(l);
    }
    CHECK(fit_order(hs, corrected) >= 1.8);
    // The -nu_j H0 sign leaves an O(1) residual 2<phi, nu_j H0 psi>.
    CHECK(literal.back() > 0.5 * literal.front());
    CHECK(literal.back() > 100 * corrected.back());
}

TEST_CASE("quadrature") {
    // Area of the unit-sphere band theta in [pi/6, pi/2], phi in [0, pi/2]: (pi/2) cos(pi/6).
    const SurfaceMesh s = sphere(64);
    const ScalarField one = sample(s, [](const Vec3&) { return 1.0; });
    CHECK(surface_inner(s, one, one) == doctest::Approx(M_PI / 2 * std::cos(M_PI / 6)).epsilon(1e-3));
    // Perimeter of the unit square.
    const SurfaceMesh plane = build_surface_mesh(make_plane(kUnitSquare, {8, 8}));
    const ScalarField pone = sample(plane, [](const Vec3&) { return 1.0; });
    CHECK(boundary_inner(plane, pone, pone) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("gradient kernel is the constants") {
    // Mass-weighted spectrum of G^T W G: one zero eigenvalue (constants), the
    // next one bounded away from zero under refinement.
    std::vector<double> second;
    for (int n : {8, 12, 16}) {
        const SurfaceMesh mesh = sphere(n);
        const std::size_t nn = mesh.node_count();
        Eigen::MatrixXd g(3 * nn, nn);
        for (std::size_t c = 0; c < nn; ++c) {
            ScalarField e = ScalarField::zeros(nn);
            e[c] = 1.0;
            const VectorField col = surface_gradient(mesh, e);
            for (std::size_t r = 0; r < nn; ++r) g.block<3, 1>(3 * static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
        }
        Eigen::VectorXd w(nn), w3(3 * nn);
        for (std::size_t r = 0; r < nn; ++r) {
            w(static_cast<Eigen::Index>(r)) = mesh.quadrature_weights()[r];
            w3.segment<3>(3 * static_cast<Eigen::Index>(r)).setConstant(mesh.quadrature_weights()[r]);
        }
        const Eigen::MatrixXd a = g.transpose() * w3.asDiagonal() * g;
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::MatrixXd(w.asDiagonal()),
                                                                      Eigen::EigenvaluesOnly);
        CHECK(std::abs(eig.eigenvalues()(0)) < 1e-10);
        second.push_back(eig.eigenvalues()(1));
    }
    for (double s : second) CHECK(s > 0.5);
    CHECK(second.back() > 0.5 * second.front());
}

TEST_CASE("verify_identities") {
    const SurfaceMesh plane = build_surface_mesh(make_plane(kUnitSquare, {16, 16}));
    const IdentityReport flat = verify_identities(plane, 1e-10);
    CHECK(flat.all_pass());
    CHECK(flat.results.size() == 7);

    const SurfaceMesh cap = sphere(32);
    const IdentityReport curved = verify_identities(cap, 1e-3);
    CHECK(curved.find("tangency").max_residual < 1e-12);
    CHECK(curved.find("laplacian_gunter_vs_stokes").max_residual < 1e-3);
    CHECK(curved.find("laplacian_gunter_vs_stokes").max_residual > 1e-12);
    CHECK(curved.all_pass());

    IdentityOptions opts;
    opts.ambient_routes = true;
    const IdentityReport amb = verify_identities(plane, 1e-10, opts);
    CHECK_FALSE(amb.all_pass());
    CHECK(amb.find("gunter_vs_ambient").max_residual < 1e-2);

    const SurfaceMesh torus = build_surface_mesh(make_torus(2.0, 0.5, {32, 32}));
    const IdentityReport closed = verify_identities(torus, 5e-2);
    CHECK(closed.find("stokes_skew_symmetry").nodes_checked == torus.node_count());
    CHECK(closed.all_pass());
}
