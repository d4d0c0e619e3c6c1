#include <doctest.h>

#include "thinlayer/convergence.hpp"
#include "thinlayer/errors.hpp"
#include "thinlayer/layer_solver.hpp"
#include "thinlayer/parallel.hpp"
#include "thinlayer/tangential_ops.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace thinlayer;

namespace {

const ChartDomain kPiSquare{{0.0, 0.0}, {M_PI, M_PI}};
const ChartDomain kBand{{M_PI / 12, 0.0}, {M_PI / 3, M_PI / 2}};

SurfaceMesh slab_base(int n) { return build_surface_mesh(make_plane(kPiSquare, {n, n})); }
SurfaceMesh sphere_base(int n, double shear = 0.0) {
    return build_surface_mesh(make_sphere_cap(1.0, kBand, {n, n}, shear));
}

double sin_sin(const Vec3& x) { return std::sin(x(0)) * std::sin(x(1)); }

}  // namespace

TEST_CASE("layer mesh validation") {
    const SurfaceMesh plane = slab_base(8);
    CHECK_NOTHROW(LayerMesh(plane, 0.99, 4));
    CHECK_NOTHROW(LayerMesh(plane, 50.0, 4));
    CHECK_THROWS_AS(LayerMesh(plane, 0.1, 5), std::invalid_argument);
    CHECK_THROWS_AS(LayerMesh(plane, 0.1, 2), std::invalid_argument);
    CHECK_THROWS_AS(LayerMesh(plane, 0.0, 4), std::invalid_argument);

    const SurfaceMesh sphere = sphere_base(8);
    CHECK_NOTHROW(LayerMesh(sphere, 0.85, 4));
    CHECK_THROWS_AS(LayerMesh(sphere, 0.95, 4), LayerTooThick);
    CHECK_THROWS_AS(LayerMesh(sphere, 1.5, 4), LayerTooThick);

    const LayerMesh lm(sphere, 0.2, 6);
    CHECK(lm.node_count() == 7 * sphere.node_count());
    CHECK(lm.tau(lm.mid_plane()) == 0.0);
    CHECK(lm.t(6) == doctest::Approx(0.2));
    const Vec3 p = lm.point(5, 6);
    CHECK(p.norm() == doctest::Approx(1.2).epsilon(1e-14));
}

TEST_CASE("extended gradient examples") {
    const SurfaceMesh plane = slab_base(8);
    const LayerMesh slab(plane, 0.3, 4);
    const LayerGradient zero = extended_gradient(slab, sample(slab, [](const Vec3&, double) { return 2.0; }));
    for (const auto& g : zero.values) CHECK(g.norm() == 0.0);

    const LayerGradient lin = extended_gradient(slab, sample(slab, [](const Vec3& x, double t) { return x(0) + 5 * t; }));
    for (const auto& g : lin.values) CHECK((g - Eigen::Vector4d(1, 0, 0, 5)).norm() < 1e-12);

    // Unit sphere: the ambient coordinate y3 at y = x (1 + t) has tangential part d^3
    // and fiber derivative nu_3 = x3. The base-point value x3 is constant along
    // fibers and has tangential gradient d^3 / (1 + t).
    std::vector<double> hs, err_ambient, err_base;
    for (int n : {16, 32, 64}) {
        const SurfaceMesh base = sphere_base(n);
        const LayerMesh lm(base, 0.3, 8);
        const LayerGradient ga = extended_gradient(lm, sample_ambient(lm, [](const Vec3& y) { return y(2); }));
        const LayerGradient gb = extended_gradient(lm, sample(lm, [](const Vec3& x, double) { return x(2); }));
        double ea = 0.0, eb = 0.0;
        for (int m = 0; m < lm.transverse_nodes(); ++m) {
            for (std::size_t k = 0; k < base.node_count(); ++k) {
                const Vec3& nu = base.geometry(k).normal;
                const Vec3 d3 = Vec3::UnitZ() - nu(2) * nu;
                Eigen::Vector4d want_a, want_b;
                want_a << d3, nu(2);
                want_b << d3 / (1 + lm.t(m)), 0.0;
                ea = std::max(ea, (ga.values[lm.index(k, m)] - want_a).cwiseAbs().maxCoeff());
                eb = std::max(eb, (gb.values[lm.index(k, m)] - want_b).cwiseAbs().maxCoeff());
            }
        }
        hs.push_back(1.0 / n);
        err_ambient.push_back(ea);
        err_base.push_back(eb);
    }
    CHECK(err_ambient.back() < 1e-3);
    CHECK(fit_order(hs, err_ambient) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(fit_order(hs, err_base) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("extended gradient preserves the Cartesian gradient norm") {
    const AmbientPolynomial poly(17);
    std::vector<double> hs, errs;
    for (int n : {16, 32, 64}) {
        const SurfaceMesh base = sphere_base(n, 0.3);
        const LayerMesh lm(base, 0.4, n / 2);
        const LayerGradient g = extended_gradient(lm, sample_ambient(lm, [&](const Vec3& y) { return poly.value(y); }));
        double e = 0.0;
        for (int m = 0; m < lm.transverse_nodes(); ++m) {
            for (std::size_t k = 0; k < base.node_count(); ++k) {
                const double classical = poly.gradient(lm.point(k, m)).squaredNorm();
                e = std::max(e, std::abs(g.values[lm.index(k, m)].squaredNorm() - classical) / std::max(1.0, classical));
            }
        }
        hs.push_back(1.0 / n);
        errs.push_back(e);
    }
    CHECK(errs.back() < 1e-2);
    CHECK(fit_order(hs, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("extended divergence") {
    const SurfaceMesh base = sphere_base(32);
    const LayerMesh lm(base, 0.3, 8);
    LayerVectorField normal, d3;
    normal.values.resize(lm.node_count());
    d3.values.resize(lm.node_count());
    for (int m = 0; m < lm.transverse_nodes(); ++m) {
        for (std::size_t k = 0; k < base.node_count(); ++k) {
            const Vec3& nu = base.geometry(k).normal;
            normal.values[lm.index(k, m)] = nu;
            d3.values[lm.index(k, m)] = Vec3::UnitZ() - nu(2) * nu;
        }
    }
    const LayerField hn = extended_divergence(lm, normal);
    const LayerField dd = extended_divergence(lm, d3);
    for (int m = 0; m < lm.transverse_nodes(); ++m) {
        const double radius = 1 + lm.t(m);
        for (std::size_t k = 0; k < base.node_count(); ++k) {
            // Mean curvature (trace form) of the parallel sphere, and the tangential
            // divergence of d^3 there, -2 nu_3 / R.
            CHECK(std::abs(hn[lm.index(k, m)] - 2 / radius) < 4e-3);
            CHECK(std::abs(dd[lm.index(k, m)] + 2 * base.geometry(k).normal(2) / radius) < 5e-3);
        }
    }
    // Mid-plane value of div N is the base H0.
    for (std::size_t k = 0; k < base.node_count(); ++k) {
        CHECK(hn[lm.index(k, lm.mid_plane())] == doctest::Approx(base.geometry(k).h0).epsilon(1e-12));
    }

    // Classical divergence of an ambient gradient field equals its Laplacian.
    const AmbientPolynomial poly(23);
    auto laplacian = [&](const Vec3& y) {
        const double h = 1e-4;
        double s = 0.0;
        for (int j = 0; j < 3; ++j) {
            Vec3 e = Vec3::Zero();
            e(j) = h;
            s += (poly.gradient(y + e)(j) - poly.gradient(y - e)(j)) / (2 * h);
        }
        return s;
    };
    std::vector<double> hs, errs;
    for (int n : {16, 32, 64}) {
        const SurfaceMesh b = sphere_base(n, 0.2);
        const LayerMesh l(b, 0.3, n / 2);
        LayerVectorField grad;
        grad.values.resize(l.node_count());
        for (int m = 0; m < l.transverse_nodes(); ++m) {
            for (std::size_t k = 0; k < b.node_count(); ++k) grad.values[l.index(k, m)] = poly.gradient(l.point(k, m));
        }
        double e = 0.0;
        for (int m = 1; m + 1 < l.transverse_nodes(); ++m) {
            const ScalarField div = extended_divergence_slice(l, grad, m);
            for (std::size_t k = 0; k < b.node_count(); ++k) {
                if (b.boundary_distance(k) < 1) continue;
                e = std::max(e, std::abs(div[k] - laplacian(l.point(k, m))));
            }
        }
        hs.push_back(1.0 / n);
        errs.push_back(e);
    }
    CHECK(fit_order(hs, errs) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("layer Laplacian examples") {
    const SurfaceMesh base = slab_base(32);
    const LayerMesh lm(base, 0.25, 8);
    for (double v : layer_laplacian(lm, sample(lm, [](const Vec3&, double) { return 4.0; })).values) CHECK(v == 0.0);
    for (double v : layer_laplacian(lm, sample(lm, [](const Vec3&, double t) { return t; })).values) {
        CHECK(std::abs(v) < 1e-9);
    }
    const LayerField f = sample(lm, [](const Vec3& x, double t) { return sin_sin(x) * t * t; });
    const LayerField lap = layer_laplacian(lm, f);
    double e = 0.0;
    for (int m = 0; m < lm.transverse_nodes(); ++m) {
        for (std::size_t k = 0; k < base.node_count(); ++k) {
            if (base.boundary_distance(k) < 2) continue;
            const Vec3& x = base.geometry(k).position;
            const double t = lm.t(m);
            e = std::max(e, std::abs(lap[lm.index(k, m)] - (-2 * sin_sin(x) * t * t + 2 * sin_sin(x))));
        }
    }
    CHECK(e < 2e-3);
}

TEST_CASE("transverse element matrices") {
    const TransverseMatrices tm = transverse_matrices(4, -1.0, 1.0);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(5);
    CHECK(one.dot(tm.mass * one) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK((tm.stiffness * one).norm() < 1e-15);
    Eigen::VectorXd tau(5);
    tau << -1, -0.5, 0, 0.5, 1;
    CHECK(tau.dot(tm.mass * tau) == doctest::Approx(2.0 / 3).epsilon(1e-14));
    CHECK(tau.dot(tm.stiffness * tau) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("layer solve: trivial and t-independent data") {
    const SurfaceMesh base = slab_base(16);
    const LayerMesh zero_mesh(base, 0.2, 4);
    const LayerProblem zero(zero_mesh, LayerData::zeros(zero_mesh));
    const auto zs = zero.solve();
    for (double v : zs.field.values) CHECK(v == 0.0);
    CHECK(zero.scaled_energy(zs.field) == 0.0);

    MixedBVPSpec spec = MixedBVPSpec::homogeneous(base.node_count());
    spec.source = sample(base, [](const Vec3& x) { return -2 * sin_sin(x); });
    const ScalarField planar = solve_mixed_bvp(base, AnisotropyField::identity(base.node_count()), spec);
    std::vector<double> energies;
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        const LayerMesh lm(base, eps, 8);
        LayerData data = LayerData::zeros(lm);
        data.source = extrude(lm, spec.source);
        const LayerProblem problem(lm, data);
        const auto sol = problem.solve();
        CHECK(sol.relative_residual <= 1e-10);
        double dev = 0.0;
        for (int m = 0; m < lm.transverse_nodes(); ++m) {
            for (std::size_t k = 0; k < base.node_count(); ++k) {
                const double v = sol.field[lm.index(k, m)];
                if (base.on_boundary(k)) CHECK(v == 0.0);
                dev = std::max(dev, std::abs(v - planar[k]));
            }
        }
        CHECK(dev < 1e-8);
        CHECK(t_independence_ratio(lm, sol.field) < 1e-16);
        energies.push_back(problem.scaled_energy(extrude(lm, planar)));
    }
    // Extruded field with q = 0: the transverse term vanishes and the energy is eps independent.
    for (double e : energies) CHECK(e == doctest::Approx(energies.front()).epsilon(1e-13));
}

TEST_CASE("layer solve: odd face fluxes approach the limit problem") {
    const SurfaceMesh base = slab_base(16);
    MixedBVPSpec spec = MixedBVPSpec::homogeneous(base.node_count());
    spec.source = sample(base, sin_sin);
    const ScalarField limit = solve_mixed_bvp(base, AnisotropyField::identity(base.node_count()), spec);
    std::vector<double> errs, ratios;
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        const LayerMesh lm(base, eps, 8);
        LayerData data = LayerData::zeros(lm);
        for (std::size_t k = 0; k < base.node_count(); ++k) {
            data.q_plus[k] = eps * spec.source[k];
            data.q_minus[k] = -eps * spec.source[k];
        }
        const LayerField t = solve_layer_bvp(lm, data);
        const ScalarField mid = t.slice(lm, lm.mid_plane());
        double e = 0.0;
        for (std::size_t k = 0; k < base.node_count(); ++k) e = std::max(e, std::abs(mid[k] - limit[k]));
        errs.push_back(e);
        ratios.push_back(t_independence_ratio(lm, t));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        CHECK(errs[i] < errs[i - 1]);
        CHECK(ratios[i] < ratios[i - 1]);
        // Second order in eps once eps is small.
        if (i >= 2) CHECK(errs[i - 1] / errs[i] == doctest::Approx(4.0).epsilon(0.1));
    }
}

TEST_CASE("scaled and unscaled energies agree") {
    const SurfaceMesh base = sphere_base(16, 0.25);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coef(-1, 1);
    for (int trial = 0; trial < 3; ++trial) {
        const double eps = 0.1 + 0.2 * trial;
        const LayerMesh lm(base, eps, 8);
        const double a = coef(rng), b = coef(rng), c = coef(rng);
        const LayerField t = sample(lm, [&](const Vec3& x, double s) {
            return std::sin(a * x(0) + 2 * s) + b * x(1) * x(2) * std::exp(s) + c * s * s;
        });
        LayerData data = LayerData::zeros(lm);
        data.source = sample(lm, [&](const Vec3& x, double s) { return a + b * x(0) + c * s; });
        data.q_plus = sample(base, [&](const Vec3& x) { return std::cos(b * x(1)) * eps; });
        data.q_minus = sample(base, [&](const Vec3& x) { return x(2) * c; });
        const double scaled = scaled_energy(lm, t, data);
        const double unscaled = unscaled_energy(lm, t, data);
        CHECK(std::abs(scaled - unscaled / eps) <= 1e-8 * std::abs(scaled));
    }
}

TEST_CASE("t-independence ratio") {
    const SurfaceMesh base = sphere_base(12);
    const LayerMesh lm(base, 0.3, 6);
    const ScalarField g = sample(base, [](const Vec3& x) { return 1 + x(0) * x(1); });
    CHECK(t_independence_ratio(lm, extrude(lm, g)) == 0.0);
    LayerField tg = LayerField::zeros(lm);
    for (int m = 0; m < lm.transverse_nodes(); ++m) {
        for (std::size_t k = 0; k < base.node_count(); ++k) tg[lm.index(k, m)] = lm.tau(m) * g[k];
    }
    CHECK(t_independence_ratio(lm, tg) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(t_independence_ratio(lm, LayerField::zeros(lm)) == 0.0);

    const ScalarField avg = tau_average(lm, tg);
    for (std::size_t k = 0; k < base.node_count(); ++k) CHECK(std::abs(avg[k]) < 1e-15);
    const ScalarField avg_g = tau_average(lm, extrude(lm, g));
    for (std::size_t k = 0; k < base.node_count(); ++k) CHECK(avg_g[k] == doctest::Approx(g[k]).epsilon(1e-15));
}

TEST_CASE("a priori bound with the measured Poincare constant") {
    const SurfaceMesh base = sphere_base(12);
    const LayerMesh probe(base, 0.5, 6);
    const double c0 = layer_poincare_constant(probe);
    CHECK(c0 > 0.0);
    CHECK(c0 < 1.0);
    for (double eps : {0.5, 0.2, 0.05}) {
        const LayerMesh lm = probe.with_eps(eps);
        LayerData data = LayerData::zeros(lm);
        data.source = sample(lm, [](const Vec3& x, double t) { return std::exp(x(0)) * (1 + t) - x(2); });
        const LayerProblem problem(lm, data);
        const LayerField t = problem.solve().field;
        CHECK(layer_h1_norm(problem, t) <= 2.0 / c0 * layer_l2_norm(problem, data.source));
    }
}

TEST_CASE("layer problems need a lateral boundary") {
    const SurfaceMesh torus = build_surface_mesh(make_torus(2.0, 0.5, {8, 8}));
    const LayerMesh lm(torus, 0.1, 4);
    CHECK_THROWS_AS(LayerProblem(lm, LayerData::zeros(lm)), EmptyDirichletBoundary);
}

TEST_CASE("layer solve is independent of the worker count") {
    const SurfaceMesh base = sphere_base(16);
    const LayerMesh lm(base, 0.1, 8);
    LayerData data = LayerData::zeros(lm);
    data.source = sample(lm, [](const Vec3& x, double t) { return x(0) * (1 + t) + std::cos(3 * x(1)); });
    data.q_plus = sample(base, [](const Vec3& x) { return 0.1 * x(2); });
    set_worker_count(1);
    const LayerField one = solve_layer_bvp(lm, data);
    set_worker_count(5);
    const LayerField five = solve_layer_bvp(lm, data);
    set_worker_count(0);
    CHECK(one.values == five.values);
}

TEST_CASE("layer CSV export") {
    const SurfaceMesh base = slab_base(4);
    const LayerMesh lm(base, 0.1, 4);
    LayerField t = LayerField::zeros(lm);
    t[lm.index(3, 4)] = 0.1;
    std::ostringstream os;
    write_layer_csv(os, lm, t);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "node,tau,value");
    int rows = 0;
    std::string last_hit;
    while (std::getline(is, line)) {
        ++rows;
        if (line.rfind("3,1,", 0) == 0) last_hit = line;
    }
    CHECK(rows == 125);
    CHECK(last_hit == "3,1,0.10000000000000001");
}
