#include "thinlayer/geometry.hpp"

#include "thinlayer/errors.hpp"
#include "thinlayer/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thinlayer {

Chart::Chart(Definition def) : def_(std::move(def)) {
    for (int a = 0; a < 2; ++a) {
        if (def_.intervals[a] < 4) {
            throw std::invalid_argument("chart '" + def_.name + "' needs at least 4 intervals per direction");
        }
        if (!(def_.domain.upper[a] > def_.domain.lower[a])) {
            throw std::invalid_argument("chart '" + def_.name + "' has an empty parameter interval");
        }
    }
    if (!def_.map || !def_.partials[0] || !def_.partials[1]) {
        throw std::invalid_argument("chart '" + def_.name + "' is missing its map or partials");
    }
}

double Chart::spacing(int alpha) const {
    return (def_.domain.upper.at(alpha) - def_.domain.lower.at(alpha)) / def_.intervals.at(alpha);
}

Chart Chart::refined(std::array<int, 2> intervals) const {
    Definition def = def_;
    def.intervals = intervals;
    Chart out(std::move(def));
    out.rank_tol_ = rank_tol_;
    return out;
}

namespace {

Chart sheared(Chart::Definition def, double shear) {
    if (shear == 0.0) return Chart(std::move(def));
    auto base_map = def.map;
    auto base_d1 = def.partials[0];
    auto base_d2 = def.partials[1];
    auto pull = [shear](const ChartCoords& u) { return ChartCoords{u[0] + shear * u[1], u[1]}; };
    def.map = [=](const ChartCoords& u) { return base_map(pull(u)); };
    def.partials[0] = [=](const ChartCoords& u) { return base_d1(pull(u)); };
    def.partials[1] = [=](const ChartCoords& u) {
        const ChartCoords v = pull(u);
        return Vec3(shear * base_d1(v) + base_d2(v));
    };
    def.name += "_sheared";
    return Chart(std::move(def));
}

}  // namespace

Chart make_plane(ChartDomain domain, std::array<int, 2> intervals, double shear) {
    Chart::Definition def;
    def.name = "plane";
    def.domain = domain;
    def.intervals = intervals;
    def.map = [](const ChartCoords& u) { return Vec3(u[0], u[1], 0.0); };
    def.partials[0] = [](const ChartCoords&) { return Vec3(1.0, 0.0, 0.0); };
    def.partials[1] = [](const ChartCoords&) { return Vec3(0.0, 1.0, 0.0); };
    return sheared(std::move(def), shear);
}

Chart make_sphere_cap(double radius, ChartDomain domain, std::array<int, 2> intervals,
                      double shear) {
    if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
    Chart::Definition def;
    def.name = "sphere_cap";
    def.domain = domain;
    def.intervals = intervals;
    def.map = [radius](const ChartCoords& u) {
        return Vec3(radius * std::sin(u[0]) * std::cos(u[1]), radius * std::sin(u[0]) * std::sin(u[1]),
                    radius * std::cos(u[0]));
    };
    def.partials[0] = [radius](const ChartCoords& u) {
        return Vec3(radius * std::cos(u[0]) * std::cos(u[1]), radius * std::cos(u[0]) * std::sin(u[1]),
                    -radius * std::sin(u[0]));
    };
    def.partials[1] = [radius](const ChartCoords& u) {
        return Vec3(-radius * std::sin(u[0]) * std::sin(u[1]), radius * std::sin(u[0]) * std::cos(u[1]),
                    0.0);
    };
    return sheared(std::move(def), shear);
}

Chart make_cylinder(double radius, ChartDomain domain, std::array<int, 2> intervals,
                    double shear) {
    if (!(radius > 0.0)) throw std::invalid_argument("cylinder radius must be positive");
    Chart::Definition def;
    def.name = "cylinder";
    def.domain = domain;
    def.intervals = intervals;
    def.map = [radius](const ChartCoords& u) {
        return Vec3(radius * std::cos(u[0]), radius * std::sin(u[0]), u[1]);
    };
    def.partials[0] = [radius](const ChartCoords& u) {
        return Vec3(-radius * std::sin(u[0]), radius * std::cos(u[0]), 0.0);
    };
    def.partials[1] = [](const ChartCoords&) { return Vec3(0.0, 0.0, 1.0); };
    return sheared(std::move(def), shear);
}

Chart make_torus(double major, double minor, std::array<int, 2> intervals) {
    if (!(minor > 0.0 && major > minor)) {
        throw std::invalid_argument("torus needs 0 < minor radius < major radius");
    }
    Chart::Definition def;
    def.name = "torus";
    def.domain = {{0.0, 0.0}, {2.0 * M_PI, 2.0 * M_PI}};
    def.intervals = intervals;
    def.periodic = {true, true};
    def.map = [=](const ChartCoords& u) {
        const double rho = major + minor * std::cos(u[1]);
        return Vec3(rho * std::cos(u[0]), rho * std::sin(u[0]), minor * std::sin(u[1]));
    };
    def.partials[0] = [=](const ChartCoords& u) {
        const double rho = major + minor * std::cos(u[1]);
        return Vec3(-rho * std::sin(u[0]), rho * std::cos(u[0]), 0.0);
    };
    def.partials[1] = [=](const ChartCoords& u) {
        return Vec3(-minor * std::sin(u[1]) * std::cos(u[0]), -minor * std::sin(u[1]) * std::sin(u[0]),
                    minor * std::cos(u[1]));
    };
    return Chart(std::move(def));
}

namespace {

double smallest_singular_value(const Vec3& d1, const Vec3& d2) {
    Eigen::Matrix<double, 3, 2> jac;
    jac.col(0) = d1;
    jac.col(1) = d2;
    Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(jac);
    return svd.singularValues()(1);
}

}  // namespace

Vec3 normal(const Chart& chart, const ChartCoords& u) {
    const Vec3 d1 = chart.partial(0, u);
    const Vec3 d2 = chart.partial(1, u);
    const double sigma = smallest_singular_value(d1, d2);
    if (!(sigma > chart.rank_tol())) throw RankDeficientChart(0, sigma);
    return d1.cross(d2).normalized();
}

std::array<int, 2> SurfaceMesh::grid_position(std::size_t node) const {
    const auto n0 = static_cast<std::size_t>(nodes(0));
    return {static_cast<int>(node % n0), static_cast<int>(node / n0)};
}

ChartCoords SurfaceMesh::coords(std::size_t node) const {
    const auto ij = grid_position(node);
    const auto& dom = chart_.domain();
    return {dom.lower[0] + ij[0] * chart_.spacing(0), dom.lower[1] + ij[1] * chart_.spacing(1)};
}

int SurfaceMesh::boundary_distance(std::size_t node) const {
    const auto ij = grid_position(node);
    int dist = std::numeric_limits<int>::max();
    for (int a = 0; a < 2; ++a) {
        if (chart_.periodic(a)) continue;
        dist = std::min({dist, ij[a], nodes(a) - 1 - ij[a]});
    }
    return dist;
}

double SurfaceMesh::eps_max() const {
    if (max_curvature_ <= 0.0) return std::numeric_limits<double>::infinity();
    return 0.9 / max_curvature_;
}

std::vector<double> SurfaceMesh::chart_partial(std::span<const double> values, int alpha) const {
    if (values.size() != node_count()) {
        throw std::invalid_argument("field size does not match the mesh");
    }
    const int m = nodes(alpha);
    const double h = chart_.spacing(alpha);
    const bool wrap = chart_.periodic(alpha);
    const auto stride = alpha == 0 ? std::size_t{1} : static_cast<std::size_t>(nodes(0));
    std::vector<double> out(values.size());
    parallel_for(values.size(), [&](std::size_t k) {
        const int i = grid_position(k)[alpha];
        const std::size_t base = k - stride * static_cast<std::size_t>(i);
        auto at = [&](int p) { return values[base + stride * static_cast<std::size_t>(p)]; };
        if (wrap) {
            out[k] = (at((i + 1) % m) - at((i + m - 1) % m)) / (2.0 * h);
        } else if (i == 0) {
            out[k] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
        } else if (i == m - 1) {
            out[k] = (3.0 * at(m - 1) - 4.0 * at(m - 2) + at(m - 3)) / (2.0 * h);
        } else {
            out[k] = (at(i + 1) - at(i - 1)) / (2.0 * h);
        }
    });
    return out;
}

SurfaceMesh build_surface_mesh(const Chart& chart) {
    SurfaceMesh mesh(chart);
    const std::size_t count = static_cast<std::size_t>(chart.nodes(0)) * chart.nodes(1);
    mesh.geometry_.resize(count);
    mesh.edges_.assign(count, 0);
    mesh.weights_.assign(count, 0.0);

    // Pointwise geometry; the first rank-deficient node (lowest index) is reported.
    std::vector<double> sigma(count);
    parallel_for(count, [&](std::size_t k) {
        const ChartCoords u = mesh.coords(k);
        GeometryCache& g = mesh.geometry_[k];
        g.position = chart.point(u);
        g.covariant = {chart.partial(0, u), chart.partial(1, u)};
        sigma[k] = smallest_singular_value(g.covariant[0], g.covariant[1]);
        if (!(sigma[k] > chart.rank_tol())) return;
        g.normal = g.covariant[0].cross(g.covariant[1]).normalized();
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) g.gram(a, b) = g.covariant[a].dot(g.covariant[b]);
        const Mat2 inv = g.gram.inverse();
        for (int a = 0; a < 2; ++a) {
            g.contravariant[a] = inv(a, 0) * g.covariant[0] + inv(a, 1) * g.covariant[1];
        }
        g.area_density = std::sqrt(g.gram.determinant());
    });
    for (std::size_t k = 0; k < count; ++k) {
        if (!(sigma[k] > chart.rank_tol())) throw RankDeficientChart(k, sigma[k]);
    }

    const double cell = chart.spacing(0) * chart.spacing(1);
    for (std::size_t k = 0; k < count; ++k) {
        const auto ij = mesh.grid_position(k);
        std::uint8_t e = 0;
        double factor = 1.0;
        if (!chart.periodic(0)) {
            if (ij[0] == 0) e |= kEdgeU1Min;
            if (ij[0] == chart.nodes(0) - 1) e |= kEdgeU1Max;
            if (ij[0] == 0 || ij[0] == chart.nodes(0) - 1) factor *= 0.5;
        }
        if (!chart.periodic(1)) {
            if (ij[1] == 0) e |= kEdgeU2Min;
            if (ij[1] == chart.nodes(1) - 1) e |= kEdgeU2Max;
            if (ij[1] == 0 || ij[1] == chart.nodes(1) - 1) factor *= 0.5;
        }
        mesh.edges_[k] = e;
        mesh.weights_[k] = factor * cell * mesh.geometry_[k].area_density;
    }

    // Weingarten matrix W = sum_alpha g^alpha (d_alpha nu)^T, i.e. W_jk = D_j nu_k.
    std::array<std::array<std::vector<double>, 3>, 2> dnu;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> comp(count);
        for (std::size_t k = 0; k < count; ++k) comp[k] = mesh.geometry_[k].normal(c);
        for (int a = 0; a < 2; ++a) dnu[a][c] = mesh.chart_partial(comp, a);
    }
    std::vector<double> kappa(count);
    parallel_for(count, [&](std::size_t k) {
        GeometryCache& g = mesh.geometry_[k];
        Mat3 w = Mat3::Zero();
        for (int a = 0; a < 2; ++a) {
            const Vec3 d(dnu[a][0][k], dnu[a][1][k], dnu[a][2][k]);
            w += g.contravariant[a] * d.transpose();
        }
        g.weingarten = w;
        const Curvatures c = curvatures(w);
        g.h0 = c.h0;
        g.mean_curvature = c.mean;
        g.gauss_curvature = c.gauss;
        Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (w + w.transpose()), Eigen::EigenvaluesOnly);
        kappa[k] = eig.eigenvalues().cwiseAbs().maxCoeff();
    });
    mesh.max_curvature_ = *std::max_element(kappa.begin(), kappa.end());
    return mesh;
}

const Mat3& weingarten(const SurfaceMesh& mesh, std::size_t node) {
    return mesh.geometry(node).weingarten;
}

Curvatures curvatures(const Mat3& w) {
    // The discrete W carries an O(h^2) spurious normal eigenvalue, so the
    // eigenvalue of smallest magnitude is dropped rather than assumed zero.
    Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (w + w.transpose()), Eigen::EigenvaluesOnly);
    std::array<double, 3> lam{eig.eigenvalues()(0), eig.eigenvalues()(1), eig.eigenvalues()(2)};
    std::sort(lam.begin(), lam.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
    Curvatures c;
    c.h0 = w.trace();
    c.mean = c.h0 / 2.0;
    c.gauss = lam[0] * lam[1];
    return c;
}

Vec3 proper_extension(const SurfaceMesh& mesh, const ChartCoords& u, double t) {
    const double limit = mesh.eps_max();
    if (!(std::abs(t) < limit)) throw LayerTooThick(std::abs(t), limit);
    return normal(mesh.chart(), u);
}

}  // namespace thinlayer
