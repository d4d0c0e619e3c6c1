#include "thinlayer/surface_solver.hpp"

#include "thinlayer/errors.hpp"
#include "thinlayer/parallel.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace thinlayer {

void validate_anisotropy(const AnisotropyField& a, double pd_floor) {
    for (std::size_t n = 0; n < a.values.size(); ++n) {
        const Mat3& m = a.values[n];
        if (!m.allFinite()) throw NotPositiveDefinite(n, "non-finite entries");
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw NotPositiveDefinite(n, "not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Mat3> eig(m, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues()(0) < pd_floor) {
            throw NotPositiveDefinite(n, "smallest eigenvalue " + std::to_string(eig.eigenvalues()(0)) +
                                             " below floor");
        }
    }
}

namespace {

constexpr std::array<double, 2> kGauss{0.5 - 0.5 / 1.7320508075688772, 0.5 + 0.5 / 1.7320508075688772};

struct ElementData {
    std::array<std::size_t, 4> nodes{};
    Eigen::Matrix4d stiffness = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d mass = Eigen::Matrix4d::Zero();
};

int cell_count(const Chart& chart, int alpha) { return chart.intervals(alpha); }

}  // namespace

FemMatrices assemble_fem(const SurfaceMesh& mesh, const AnisotropyField& a) {
    if (a.values.size() != mesh.node_count()) throw std::invalid_argument("anisotropy size mismatch");
    const Chart& chart = mesh.chart();
    const int c1 = cell_count(chart, 0);
    const int c2 = cell_count(chart, 1);
    const double h1 = chart.spacing(0);
    const double h2 = chart.spacing(1);
    const auto& dom = chart.domain();

    std::vector<ElementData> elements(static_cast<std::size_t>(c1) * c2);
    parallel_for(elements.size(), [&](std::size_t e) {
        const int i = static_cast<int>(e % static_cast<std::size_t>(c1));
        const int j = static_cast<int>(e / static_cast<std::size_t>(c1));
        const int ip = (i + 1) % mesh.nodes(0);
        const int jp = (j + 1) % mesh.nodes(1);
        ElementData& el = elements[e];
        el.nodes = {mesh.index(i, j), mesh.index(ip, j), mesh.index(i, jp), mesh.index(ip, jp)};
        for (double xi : kGauss) {
            for (double eta : kGauss) {
                const ChartCoords u{dom.lower[0] + (i + xi) * h1, dom.lower[1] + (j + eta) * h2};
                const Vec3 d1 = chart.partial(0, u);
                const Vec3 d2 = chart.partial(1, u);
                Mat2 gram;
                gram << d1.dot(d1), d1.dot(d2), d2.dot(d1), d2.dot(d2);
                const Mat2 inv = gram.inverse();
                const Vec3 c1v = inv(0, 0) * d1 + inv(0, 1) * d2;
                const Vec3 c2v = inv(1, 0) * d1 + inv(1, 1) * d2;
                const double jac = std::sqrt(gram.determinant()) * h1 * h2 * 0.25;

                const std::array<double, 4> shape{(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
                const std::array<double, 4> dxi{-(1 - eta), (1 - eta), -eta, eta};
                const std::array<double, 4> deta{-(1 - xi), -xi, (1 - xi), xi};
                Mat3 cond = Mat3::Zero();
                for (int p = 0; p < 4; ++p) cond += shape[p] * a.values[el.nodes[p]];
                std::array<Vec3, 4> grad;
                for (int p = 0; p < 4; ++p) grad[p] = (dxi[p] / h1) * c1v + (deta[p] / h2) * c2v;
                for (int p = 0; p < 4; ++p) {
                    const Vec3 ag = cond * grad[p];
                    for (int q = 0; q < 4; ++q) {
                        el.stiffness(p, q) += jac * ag.dot(grad[q]);
                        el.mass(p, q) += jac * shape[p] * shape[q];
                    }
                }
            }
        }
        // Exact symmetry regardless of how A was interpolated.
        el.stiffness = 0.5 * (el.stiffness + el.stiffness.transpose()).eval();
    });

    std::vector<Triplet> kt, mt;
    kt.reserve(elements.size() * 16);
    mt.reserve(elements.size() * 16);
    for (const auto& el : elements) {
        for (int p = 0; p < 4; ++p) {
            for (int q = 0; q < 4; ++q) {
                kt.push_back({el.nodes[p], el.nodes[q], el.stiffness(p, q)});
                mt.push_back({el.nodes[p], el.nodes[q], el.mass(p, q)});
            }
        }
    }
    const std::size_t n = mesh.node_count();
    return {CsrMatrix::from_triplets(n, n, std::move(kt)), CsrMatrix::from_triplets(n, n, std::move(mt))};
}

std::vector<bool> dirichlet_mask(const SurfaceMesh& mesh, std::uint8_t dirichlet_edges) {
    std::vector<bool> mask(mesh.node_count(), false);
    for (std::size_t n = 0; n < mask.size(); ++n) mask[n] = (mesh.boundary_edges(n) & dirichlet_edges) != 0;
    return mask;
}

std::vector<double> neumann_load(const SurfaceMesh& mesh, const ScalarField& h, std::uint8_t dirichlet_edges) {
    if (h.size() != mesh.node_count()) throw std::invalid_argument("Neumann data size mismatch");
    const Chart& chart = mesh.chart();
    const auto& dom = chart.domain();
    std::vector<double> load(mesh.node_count(), 0.0);
    struct EdgeDef {
        EdgeFlag flag;
        int alpha;  // fixed direction
        bool upper;
    };
    const std::array<EdgeDef, 4> edges{{{kEdgeU1Min, 0, false},
                                         {kEdgeU1Max, 0, true},
                                         {kEdgeU2Min, 1, false},
                                         {kEdgeU2Max, 1, true}}};
    for (const auto& edge : edges) {
        if (chart.periodic(edge.alpha) || (dirichlet_edges & edge.flag)) continue;
        const int beta = 1 - edge.alpha;
        const int fixed = edge.upper ? mesh.nodes(edge.alpha) - 1 : 0;
        const double hb = chart.spacing(beta);
        for (int s = 0; s < chart.intervals(beta); ++s) {
            const int sp = (s + 1) % mesh.nodes(beta);
            const std::size_t n0 = edge.alpha == 0 ? mesh.index(fixed, s) : mesh.index(s, fixed);
            const std::size_t n1 = edge.alpha == 0 ? mesh.index(fixed, sp) : mesh.index(sp, fixed);
            for (double xi : kGauss) {
                ChartCoords u{};
                u[edge.alpha] = edge.upper ? dom.upper[edge.alpha] : dom.lower[edge.alpha];
                u[beta] = dom.lower[beta] + (s + xi) * hb;
                const double ds = chart.partial(beta, u).norm() * hb * 0.5;
                const double hv = (1 - xi) * h[n0] + xi * h[n1];
                load[n0] += ds * (1 - xi) * hv;
                load[n1] += ds * xi * hv;
            }
        }
    }
    return load;
}

ScalarField LinearSystem::expand(std::span<const double> free_values) const {
    ScalarField out = lifted;
    for (std::size_t i = 0; i < free_nodes.size(); ++i) out[free_nodes[i]] = free_values[i];
    return out;
}

LinearSystem reduce_system(const FemMatrices& fem, std::span<const double> load,
                           const std::vector<bool>& is_dirichlet, const ScalarField& dirichlet_values) {
    const std::size_t n = fem.stiffness.rows();
    LinearSystem sys;
    sys.lifted = ScalarField::zeros(n);
    std::vector<std::ptrdiff_t> to_free(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (is_dirichlet[i]) {
            sys.dirichlet_nodes.push_back(i);
            sys.lifted[i] = dirichlet_values[i];
        } else {
            to_free[i] = static_cast<std::ptrdiff_t>(sys.free_nodes.size());
            sys.free_nodes.push_back(i);
        }
    }
    if (sys.dirichlet_nodes.empty()) throw EmptyDirichletBoundary();

    const auto k_lift = fem.stiffness * std::span<const double>(sys.lifted.values);
    sys.rhs.resize(sys.free_nodes.size());
    for (std::size_t r = 0; r < sys.free_nodes.size(); ++r) {
        const std::size_t i = sys.free_nodes[r];
        sys.rhs[r] = -load[i] - k_lift[i];
    }
    std::vector<Triplet> trip;
    const auto rp = fem.stiffness.row_ptr();
    const auto ci = fem.stiffness.col_index();
    const auto va = fem.stiffness.values();
    for (std::size_t r = 0; r < sys.free_nodes.size(); ++r) {
        const std::size_t i = sys.free_nodes[r];
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) {
            const auto c = to_free[ci[p]];
            if (c >= 0) trip.push_back({r, static_cast<std::size_t>(c), va[p]});
        }
    }
    sys.matrix = CsrMatrix::from_triplets(sys.free_nodes.size(), sys.free_nodes.size(), std::move(trip));
    return sys;
}

SurfaceProblem::SurfaceProblem(const SurfaceMesh& mesh, AnisotropyField a, MixedBVPSpec spec)
    : mesh_(&mesh), a_(std::move(a)), spec_(std::move(spec)) {
    const std::size_t n = mesh.node_count();
    if (spec_.source.size() != n || spec_.dirichlet.size() != n || spec_.neumann.size() != n) {
        throw std::invalid_argument("boundary value data size does not match the mesh");
    }
    validate_anisotropy(a_);
    is_dirichlet_ = dirichlet_mask(mesh, spec_.dirichlet_edges);
    fem_ = assemble_fem(mesh, a_);
    neumann_ = neumann_load(mesh, spec_.neumann, spec_.dirichlet_edges);
    auto load = fem_.mass * std::span<const double>(spec_.source.values);
    for (std::size_t i = 0; i < n; ++i) load[i] += neumann_[i];
    system_ = reduce_system(fem_, load, is_dirichlet_, spec_.dirichlet);
}

SurfaceProblem::Solution SurfaceProblem::solve() const {
    const CgResult cg = solve_pcg_jacobi(system_.matrix, system_.rhs, 1e-10);
    return {system_.expand(cg.x), cg.iterations, cg.relative_residual};
}

double SurfaceProblem::stiffness_form(const ScalarField& a, const ScalarField& b) const {
    return fem_.stiffness.bilinear(a.values, b.values);
}

double SurfaceProblem::energy(const ScalarField& t) const {
    if (t.size() != mesh_->node_count()) throw std::invalid_argument("field size mismatch");
    double linear = 0.0;
    const auto mf = fem_.mass * std::span<const double>(spec_.source.values);
    for (std::size_t i = 0; i < t.size(); ++i) linear += (mf[i] + neumann_[i]) * t[i];
    return 0.5 * stiffness_form(t, t) + linear;
}

double SurfaceProblem::min_rayleigh_quotient() const {
    const auto lumped = fem_.mass.row_sums();
    std::vector<double> diag(system_.free_nodes.size());
    for (std::size_t r = 0; r < diag.size(); ++r) diag[r] = lumped[system_.free_nodes[r]];
    return smallest_generalized_eigenvalue(system_.matrix, diag);
}

LinearSystem assemble(const SurfaceMesh& mesh, const AnisotropyField& a, const MixedBVPSpec& spec) {
    return SurfaceProblem(mesh, a, spec).system();
}

ScalarField solve_mixed_bvp(const SurfaceMesh& mesh, const AnisotropyField& a, const MixedBVPSpec& spec) {
    return SurfaceProblem(mesh, a, spec).solve().field;
}

double energy(const SurfaceMesh& mesh, const AnisotropyField& a, const MixedBVPSpec& spec,
              const ScalarField& t) {
    return SurfaceProblem(mesh, a, spec).energy(t);
}

}  // namespace thinlayer
