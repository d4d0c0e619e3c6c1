#pragma once

#include "thinlayer/fields.hpp"
#include "thinlayer/geometry.hpp"
#include "thinlayer/sparse.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace thinlayer {

/// Symmetric positive definite conductivity A(x) per node.
struct AnisotropyField {
    std::vector<Mat3> values;

    static AnisotropyField identity(std::size_t nodes) { return scaled_identity(nodes, 1.0); }
    static AnisotropyField scaled_identity(std::size_t nodes, double c) {
        return AnisotropyField{std::vector<Mat3>(nodes, c * Mat3::Identity())};
    }
};

/// Throws NotPositiveDefinite when a node's matrix is not symmetric (to 1e-12,
/// relative) or its smallest eigenvalue is below pd_floor.
void validate_anisotropy(const AnisotropyField& a, double pd_floor = 1e-8);

/// Data of div(A grad T) = f on C, T = g on Gamma_D, -<nu_Gamma, A grad T> = h on Gamma_N.
/// g and h are nodal fields; only their values on the respective edges matter.
struct MixedBVPSpec {
    ScalarField source;
    ScalarField dirichlet;
    ScalarField neumann;
    std::uint8_t dirichlet_edges = kAllEdges;

    /// Homogeneous data with full Dirichlet boundary.
    static MixedBVPSpec homogeneous(std::size_t nodes) {
        return {ScalarField::zeros(nodes), ScalarField::zeros(nodes), ScalarField::zeros(nodes), kAllEdges};
    }
};

/// Full (unreduced) bilinear finite-element matrices on the chart grid.
struct FemMatrices {
    CsrMatrix stiffness;  ///< <A grad_C phi_i, grad_C phi_j>_S
    CsrMatrix mass;       ///< <phi_i, phi_j>_S
};

/// Bilinear elements on the chart cells, exact geometry at 2x2 Gauss points.
/// Cells are processed in parallel and merged in cell order.
FemMatrices assemble_fem(const SurfaceMesh& mesh, const AnisotropyField& a);

/// Neumann load vector int_{Gamma_N} h phi_i ds over the edges not in dirichlet_edges.
std::vector<double> neumann_load(const SurfaceMesh& mesh, const ScalarField& h,
                                 std::uint8_t dirichlet_edges);

/// Nodes lying on any of the given edges.
std::vector<bool> dirichlet_mask(const SurfaceMesh& mesh, std::uint8_t dirichlet_edges);

/// Reduced system on the free (non-Dirichlet) nodes with the Dirichlet data lifted.
struct LinearSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
    std::vector<std::size_t> free_nodes;
    std::vector<std::size_t> dirichlet_nodes;
    ScalarField lifted;  ///< g on Dirichlet nodes, 0 elsewhere

    ScalarField expand(std::span<const double> free_values) const;
};

/// Reduces K T = -(M f + n) by eliminating Dirichlet rows and columns.
LinearSystem reduce_system(const FemMatrices& fem, std::span<const double> load,
                           const std::vector<bool>& is_dirichlet, const ScalarField& dirichlet_values);

/// Everything needed to solve and evaluate one mixed problem on a fixed mesh.
class SurfaceProblem {
public:
    SurfaceProblem(const SurfaceMesh& mesh, AnisotropyField a, MixedBVPSpec spec);

    const SurfaceMesh& mesh() const noexcept { return *mesh_; }
    const FemMatrices& matrices() const noexcept { return fem_; }
    const LinearSystem& system() const noexcept { return system_; }
    const std::vector<bool>& is_dirichlet() const noexcept { return is_dirichlet_; }

    struct Solution {
        ScalarField field;
        int iterations = 0;
        double relative_residual = 0.0;
    };
    Solution solve() const;

    /// Phi(T) = 1/2 <A grad T, grad T> + <f, T> + int_{Gamma_N} h T.
    double energy(const ScalarField& t) const;
    /// <A grad a, grad b>
    double stiffness_form(const ScalarField& a, const ScalarField& b) const;
    /// min x^T K x / x^T M_lumped x over fields vanishing on Gamma_D.
    double min_rayleigh_quotient() const;

private:
    const SurfaceMesh* mesh_;
    AnisotropyField a_;
    MixedBVPSpec spec_;
    FemMatrices fem_;
    std::vector<double> neumann_;
    std::vector<bool> is_dirichlet_;
    LinearSystem system_;
};

LinearSystem assemble(const SurfaceMesh& mesh, const AnisotropyField& a, const MixedBVPSpec& spec);

/// Unique discrete minimizer of the energy; Dirichlet nodes carry g exactly.
ScalarField solve_mixed_bvp(const SurfaceMesh& mesh, const AnisotropyField& a, const MixedBVPSpec& spec);

double energy(const SurfaceMesh& mesh, const AnisotropyField& a, const MixedBVPSpec& spec,
              const ScalarField& t);

}  // namespace thinlayer
