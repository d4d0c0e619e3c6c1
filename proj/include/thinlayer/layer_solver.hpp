#pragma once

#include "thinlayer/fields.hpp"
#include "thinlayer/geometry.hpp"
#include "thinlayer/sparse.hpp"
#include "thinlayer/surface_solver.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

namespace thinlayer {

/// Tensor product of a surface mesh with a uniform transverse grid. The
/// transverse coordinate is the scaled tau in [-1, 1]; the physical distance
/// along the fiber is t = eps * tau. The base mesh must outlive the layer.
class LayerMesh {
public:
    /// Throws LayerTooThick when eps >= base.eps_max(), std::invalid_argument
    /// unless n_t >= 4 is even and eps > 0.
    LayerMesh(const SurfaceMesh& base, double eps, int n_t);

    const SurfaceMesh& base() const noexcept { return *base_; }
    double eps() const noexcept { return eps_; }
    int transverse_intervals() const noexcept { return n_t_; }
    int transverse_nodes() const noexcept { return n_t_ + 1; }
    double tau(int m) const { return -1.0 + 2.0 * m / n_t_; }
    double t(int m) const { return eps_ * tau(m); }
    int mid_plane() const noexcept { return n_t_ / 2; }

    std::size_t surface_nodes() const noexcept { return base_->node_count(); }
    std::size_t node_count() const noexcept { return surface_nodes() * static_cast<std::size_t>(n_t_ + 1); }
    /// Slice-major layout: all surface nodes of tau_0, then tau_1, ...
    std::size_t index(std::size_t surface_node, int m) const {
        return static_cast<std::size_t>(m) * surface_nodes() + surface_node;
    }
    /// Physical point x + t nu(x).
    Vec3 point(std::size_t surface_node, int m) const;

    LayerMesh with_eps(double eps) const { return LayerMesh(*base_, eps, n_t_); }

private:
    const SurfaceMesh* base_;
    double eps_;
    int n_t_;
};

/// One value per layer node, slice-major.
struct LayerField {
    std::vector<double> values;

    static LayerField zeros(const LayerMesh& mesh) { return {std::vector<double>(mesh.node_count(), 0.0)}; }
    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    ScalarField slice(const LayerMesh& mesh, int m) const;
    void set_slice(const LayerMesh& mesh, int m, const ScalarField& s);
};

/// Extruded copy: the same surface field on every slice.
LayerField extrude(const LayerMesh& mesh, const ScalarField& s);

/// Evaluates fn(base point, physical t) at every layer node.
using LayerFunction = std::function<double(const Vec3& base_point, double t)>;
LayerField sample(const LayerMesh& mesh, const LayerFunction& fn);
/// Evaluates fn at the physical layer points x + t nu.
LayerField sample_ambient(const LayerMesh& mesh, const AmbientFunction& fn);

/// Four components per layer node: D_1, D_2, D_3 on the parallel surface, then d/dt.
struct LayerGradient {
    std::vector<Eigen::Vector4d> values;
};

/// Three ambient components per layer node.
struct LayerVectorField {
    std::vector<Vec3> values;
};

/// Extended gradient. The tangential part uses the contravariant basis of the
/// parallel surface, (I + t W)^{-1} g^alpha, so its norm matches the Cartesian
/// gradient; d/dt uses second-order differences (one-sided on the faces).
LayerGradient extended_gradient(const LayerMesh& mesh, const LayerField& f);

/// sum_j D_j U0_j + d/dt <N, U> + H0(t) <N, U> with U0 = U - <N, U> N and H0(t)
/// the trace of the parallel-surface Weingarten matrix (I + t W)^{-1} W.
ScalarField extended_divergence_slice(const LayerMesh& mesh, const LayerVectorField& u, int m);
LayerField extended_divergence(const LayerMesh& mesh, const LayerVectorField& u);

/// Laplace-Beltrami of the base surface on every slice plus d^2/dt^2.
LayerField layer_laplacian(const LayerMesh& mesh, const LayerField& f);

/// Linear finite elements on the uniform grid of `intervals` cells over [a, b].
struct TransverseMatrices {
    Eigen::MatrixXd mass;
    Eigen::MatrixXd stiffness;
};
TransverseMatrices transverse_matrices(int intervals, double a, double b);

/// Data of the layer problem: Laplace T = f inside, T = 0 on the lateral
/// boundary, face fluxes q+ on tau = 1 and q- on tau = -1.
struct LayerData {
    LayerField source;
    ScalarField q_plus;
    ScalarField q_minus;

    static LayerData zeros(const LayerMesh& mesh);
};

/// Quadratic pieces of the scaled energy for a layer field.
struct LayerForms {
    double surface_gradient = 0.0;  ///< T^T (K_s x M_tau) T
    double transverse = 0.0;        ///< T^T (M_s x K_tau) T
    double mass = 0.0;              ///< T^T (M_s x M_tau) T
};

/// The scaled layer problem on one mesh: bilinear surface elements times
/// linear transverse elements, conductivity I, metric of the product C x (-1, 1).
class LayerProblem {
public:
    LayerProblem(const LayerMesh& mesh, LayerData data);

    const LayerMesh& mesh() const noexcept { return *mesh_; }
    const FemMatrices& surface_matrices() const noexcept { return surface_; }
    const TransverseMatrices& transverse() const noexcept { return transverse_; }
    const CsrMatrix& matrix() const noexcept { return matrix_; }
    const std::vector<double>& rhs() const noexcept { return rhs_; }
    const std::vector<std::size_t>& free_nodes() const noexcept { return free_nodes_; }

    struct Solution {
        LayerField field;
        int iterations = 0;
        double relative_residual = 0.0;
    };
    Solution solve(int max_iterations = -1) const;

    /// E_eps(T) = 1/2 <grad_C T, grad_C T> + 1/(2 eps^2) <d_tau T, d_tau T> + <f, T>
    ///           + (1/eps) (<q+, T(1)>_C - <q-, T(-1)>_C), integrals over C x (-1, 1).
    double scaled_energy(const LayerField& t) const;
    LayerForms forms(const LayerField& t) const;

private:
    const LayerMesh* mesh_;
    LayerData data_;
    FemMatrices surface_;
    TransverseMatrices transverse_;
    std::vector<bool> lateral_;
    std::vector<std::size_t> free_nodes_;
    CsrMatrix matrix_;
    std::vector<double> rhs_;
};

LayerField solve_layer_bvp(const LayerMesh& mesh, const LayerData& data);

double scaled_energy(const LayerMesh& mesh, const LayerField& t, const LayerData& data);

/// Energy of the unscaled problem on C x (-eps, eps) for a field given at the
/// physical nodes t_m = eps tau_m, with source values f(x, t_m) and face data
/// q(x, +-eps). Transverse integrals use two-point Gauss quadrature per cell.
double unscaled_energy(const LayerMesh& mesh, const LayerField& t, const LayerData& data);

/// 2 (1/2 <grad_C T, grad_C T> + <f0 + q0, T>) on the base surface.
double limit_energy(const SurfaceMesh& mesh, const ScalarField& t, const ScalarField& f0, const ScalarField& q0);

/// int |d_tau T|^2 / int |T|^2 over C x (-1, 1); 0 for T = 0.
double t_independence_ratio(const LayerMesh& mesh, const LayerField& t);

/// (1/2) int_{-1}^{1} T dtau by the trapezoid rule on the transverse grid.
ScalarField tau_average(const LayerMesh& mesh, const LayerField& t);

/// Lower bound for min a_1(v, v) / ||v||^2_{H^1(C x (-1,1))} over fields vanishing
/// on the lateral boundary, a_1 being the eps = 1 energy form. Uses lumped masses.
double layer_poincare_constant(const LayerMesh& mesh);

/// H^1(C x (-1, 1)) norm with the eps-independent form |grad_C|^2 + |d_tau|^2 + |.|^2.
double layer_h1_norm(const LayerProblem& problem, const LayerField& t);
double layer_l2_norm(const LayerProblem& problem, const LayerField& t);

/// CSV with columns node,tau,value.
void write_layer_csv(std::ostream& os, const LayerMesh& mesh, const LayerField& t);

}  // namespace thinlayer
