#pragma once

#include "thinlayer/fields.hpp"
#include "thinlayer/geometry.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace thinlayer {

// Cartesian indices j, k are 0-based (0, 1, 2 for x1, x2, x3).

/// Gunter derivative D_j f = sum_alpha (d_alpha f) (g^alpha)_j.
ScalarField gunter_derivative(const SurfaceMesh& mesh, const ScalarField& f, int j);

/// Stokes derivative M_jk f = nu_j D_k f - nu_k D_j f.
ScalarField stokes_derivative(const SurfaceMesh& mesh, const ScalarField& f, int j, int k);

/// {D_1 f, D_2 f, D_3 f}; tangent by construction.
VectorField surface_gradient(const SurfaceMesh& mesh, const ScalarField& f);

/// sum_j D_j V_j. Rejects fields whose normal component exceeds
/// tang_tol * max|V| with NonTangentInput.
ScalarField surface_divergence(const SurfaceMesh& mesh, const VectorField& v,
                               double tang_tol = 1e-8);

/// sum_j D_j^2 f. Composed first-derivative stencils: second order only on
/// nodes at grid distance >= 2 from a boundary edge.
ScalarField laplace_beltrami(const SurfaceMesh& mesh, const ScalarField& f);

/// 1/2 sum_{j,k} M_jk^2 f.
ScalarField laplace_beltrami_stokes(const SurfaceMesh& mesh, const ScalarField& f);

/// Surface adjoint of D_j: -D_j f + nu_j H0 f.
ScalarField gunter_adjoint(const SurfaceMesh& mesh, const ScalarField& f, int j);

/// -D_j f - nu_j H0 f, the sign as commonly printed; kept for comparison only.
ScalarField gunter_adjoint_literal(const SurfaceMesh& mesh, const ScalarField& f, int j);

/// <f, g>_S by area-weighted node sums.
double surface_inner(const SurfaceMesh& mesh, const ScalarField& f, const ScalarField& g);

/// <f, g>_Gamma along the non-periodic chart edges (trapezoid rule); diagnostics only.
double boundary_inner(const SurfaceMesh& mesh, const ScalarField& f, const ScalarField& g);

struct IdentityResult {
    std::string identity_name;
    double max_residual = 0.0;
    std::size_t nodes_checked = 0;
    bool pass = false;
};

struct IdentityReport {
    std::vector<IdentityResult> results;
    bool all_pass() const;
    const IdentityResult& find(const std::string& name) const;
};

struct IdentityOptions {
    unsigned long long seed = 42;
    int field_count = 3;
    /// Also compare the discrete D_j and M_jk with their ambient definitions
    /// d_j - nu_j d_nu and nu_j d_k - nu_k d_j evaluated from the exact
    /// polynomial gradient. These carry the O(h^2) stencil error even on a plane.
    bool ambient_routes = false;
};

/// Checks the operator identities on seeded cubic polynomials. Residuals are
/// relative to max(1, magnitude of the terms compared). Laplacian forms are
/// compared on nodes at grid distance >= 2 from the boundary. Integral
/// identities (Stokes skew-symmetry, Gunter adjoint) are only reported on
/// closed meshes.
IdentityReport verify_identities(const SurfaceMesh& mesh, double tol, const IdentityOptions& options = {});

}  // namespace thinlayer
