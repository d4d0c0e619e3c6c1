#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace thinlayer {

using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Chart coordinates (u1, u2).
using ChartCoords = std::array<double, 2>;

/// Axis-aligned parameter rectangle [lower[0], upper[0]] x [lower[1], upper[1]].
struct ChartDomain {
    std::array<double, 2> lower{0.0, 0.0};
    std::array<double, 2> upper{1.0, 1.0};
};

/// A parametrized patch theta: omega -> R^3 with analytic first partials and a
/// uniform structured grid. A periodic direction wraps: its upper edge is
/// identified with the lower one and carries no grid nodes of its own.
class Chart {
public:
    using Map = std::function<Vec3(const ChartCoords&)>;

    struct Definition {
        std::string name;
        ChartDomain domain;
        std::array<int, 2> intervals{8, 8};
        std::array<bool, 2> periodic{false, false};
        Map map;
        std::array<Map, 2> partials;
    };

    explicit Chart(Definition def);

    const std::string& name() const noexcept { return def_.name; }
    const ChartDomain& domain() const noexcept { return def_.domain; }
    int intervals(int alpha) const { return def_.intervals.at(alpha); }
    bool periodic(int alpha) const { return def_.periodic.at(alpha); }
    /// Grid nodes along direction alpha (intervals, or intervals + 1 when not periodic).
    int nodes(int alpha) const { return intervals(alpha) + (periodic(alpha) ? 0 : 1); }
    double spacing(int alpha) const;

    Vec3 point(const ChartCoords& u) const { return def_.map(u); }
    Vec3 partial(int alpha, const ChartCoords& u) const { return def_.partials.at(alpha)(u); }

    double rank_tol() const noexcept { return rank_tol_; }
    void set_rank_tol(double tol) { rank_tol_ = tol; }

    /// Same surface, same parametrization, different grid.
    Chart refined(std::array<int, 2> intervals) const;

private:
    Definition def_;
    double rank_tol_ = 1e-8;
};

// Catalog. `shear` reparametrizes u1 -> u1 + shear * u2 to produce
// non-orthogonal coordinates on the same surface.
Chart make_plane(ChartDomain domain, std::array<int, 2> intervals, double shear = 0.0);
/// Spherical coordinates (polar angle, azimuth); normal points outward.
Chart make_sphere_cap(double radius, ChartDomain domain, std::array<int, 2> intervals,
                      double shear = 0.0);
/// Coordinates (azimuth, height); normal points outward.
Chart make_cylinder(double radius, ChartDomain domain, std::array<int, 2> intervals,
                    double shear = 0.0);
/// Closed torus, periodic in both angles; tube radius `minor` < `major`.
Chart make_torus(double major, double minor, std::array<int, 2> intervals);

/// Unit normal +(d1 theta x d2 theta)/|.|. Throws RankDeficientChart.
Vec3 normal(const Chart& chart, const ChartCoords& u);

/// Bit flags naming the four edges of the parameter rectangle.
enum EdgeFlag : std::uint8_t {
    kEdgeU1Min = 1,
    kEdgeU1Max = 2,
    kEdgeU2Min = 4,
    kEdgeU2Max = 8,
    kAllEdges = 15,
};

struct GeometryCache {
    Vec3 position = Vec3::Zero();
    std::array<Vec3, 2> covariant{Vec3::Zero(), Vec3::Zero()};
    Vec3 normal = Vec3::Zero();
    Mat2 gram = Mat2::Zero();
    std::array<Vec3, 2> contravariant{Vec3::Zero(), Vec3::Zero()};
    double area_density = 0.0;
    Mat3 weingarten = Mat3::Zero();
    double h0 = 0.0;
    double mean_curvature = 0.0;
    double gauss_curvature = 0.0;
};

struct Curvatures {
    double h0 = 0.0;     ///< trace of the Weingarten matrix
    double mean = 0.0;   ///< h0 / 2
    double gauss = 0.0;  ///< product of the two eigenvalues largest in magnitude
};

/// Immutable per-node geometry over a chart grid.
class SurfaceMesh {
public:
    const Chart& chart() const noexcept { return chart_; }
    std::size_t node_count() const noexcept { return geometry_.size(); }
    int nodes(int alpha) const { return chart_.nodes(alpha); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(nodes(0)) * j;
    }
    std::array<int, 2> grid_position(std::size_t node) const;
    ChartCoords coords(std::size_t node) const;

    const GeometryCache& geometry(std::size_t node) const { return geometry_.at(node); }
    std::span<const GeometryCache> geometry() const noexcept { return geometry_; }

    std::uint8_t boundary_edges(std::size_t node) const { return edges_.at(node); }
    bool on_boundary(std::size_t node) const { return edges_.at(node) != 0; }
    /// Grid distance to the nearest boundary edge (large for closed charts).
    int boundary_distance(std::size_t node) const;
    bool closed() const { return chart_.periodic(0) && chart_.periodic(1); }

    /// Area weights: sqrt(det G) h1 h2 with trapezoid factors on edges.
    std::span<const double> quadrature_weights() const noexcept { return weights_; }

    double max_abs_principal_curvature() const noexcept { return max_curvature_; }
    /// Largest admissible layer half-thickness, 0.9 / max |lambda(W)|.
    double eps_max() const;

    /// d f / d u_alpha at every node: central differences inside, second-order
    /// one-sided stencils on non-periodic edges.
    std::vector<double> chart_partial(std::span<const double> values, int alpha) const;

private:
    friend SurfaceMesh build_surface_mesh(const Chart& chart);
    explicit SurfaceMesh(Chart chart) : chart_(std::move(chart)) {}

    Chart chart_;
    std::vector<GeometryCache> geometry_;
    std::vector<std::uint8_t> edges_;
    std::vector<double> weights_;
    double max_curvature_ = 0.0;
};

/// Populates the geometry cache at every grid node. Throws RankDeficientChart.
SurfaceMesh build_surface_mesh(const Chart& chart);

/// The cached Weingarten matrix [D_j nu_k] at a node.
const Mat3& weingarten(const SurfaceMesh& mesh, std::size_t node);

Curvatures curvatures(const Mat3& weingarten);

/// Properly extended normal at distance t along the fiber through the surface
/// point u: constant along the fiber. Throws LayerTooThick when |t| >= eps_max.
Vec3 proper_extension(const SurfaceMesh& mesh, const ChartCoords& u, double t);

}  // namespace thinlayer
