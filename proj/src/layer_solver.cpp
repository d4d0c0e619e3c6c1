#include "thinlayer/layer_solver.hpp"

#include "thinlayer/errors.hpp"
#include "thinlayer/io.hpp"
#include "thinlayer/parallel.hpp"
#include "thinlayer/tangential_ops.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace thinlayer {

LayerMesh::LayerMesh(const SurfaceMesh& base, double eps, int n_t) : base_(&base), eps_(eps), n_t_(n_t) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("layer half-thickness must be positive");
    if (n_t < 4 || n_t % 2 != 0) throw std::invalid_argument("transverse intervals must be even and at least 4");
    if (eps >= base.eps_max()) throw LayerTooThick(eps, base.eps_max());
}

Vec3 LayerMesh::point(std::size_t surface_node, int m) const {
    const GeometryCache& g = base_->geometry(surface_node);
    return g.position + t(m) * g.normal;
}

ScalarField LayerField::slice(const LayerMesh& mesh, int m) const {
    const std::size_t ns = mesh.surface_nodes();
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(mesh.index(0, m));
    return ScalarField(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(ns)));
}

void LayerField::set_slice(const LayerMesh& mesh, int m, const ScalarField& s) {
    for (std::size_t n = 0; n < mesh.surface_nodes(); ++n) values[mesh.index(n, m)] = s[n];
}

LayerField extrude(const LayerMesh& mesh, const ScalarField& s) {
    if (s.size() != mesh.surface_nodes()) throw std::invalid_argument("surface field size mismatch");
    LayerField out = LayerField::zeros(mesh);
    for (int m = 0; m < mesh.transverse_nodes(); ++m) out.set_slice(mesh, m, s);
    return out;
}

LayerField sample(const LayerMesh& mesh, const LayerFunction& fn) {
    LayerField out = LayerField::zeros(mesh);
    for (int m = 0; m < mesh.transverse_nodes(); ++m) {
        for (std::size_t n = 0; n < mesh.surface_nodes(); ++n) {
            out[mesh.index(n, m)] = fn(mesh.base().geometry(n).position, mesh.t(m));
        }
    }
    return out;
}

LayerField sample_ambient(const LayerMesh& mesh, const AmbientFunction& fn) {
    LayerField out = LayerField::zeros(mesh);
    for (int m = 0; m < mesh.transverse_nodes(); ++m) {
        for (std::size_t n = 0; n < mesh.surface_nodes(); ++n) out[mesh.index(n, m)] = fn(mesh.point(n, m));
    }
    return out;
}

namespace {

void check_size(const LayerMesh& mesh, std::size_t size) {
    if (size != mesh.node_count()) throw std::invalid_argument("layer field size mismatch");
}

double spacing_t(const LayerMesh& mesh) { return 2.0 * mesh.eps() / mesh.transverse_intervals(); }

// d/dt at slice m: central inside, second-order one-sided on the faces.
double d_t(const LayerMesh& mesh, const std::vector<double>& v, std::size_t n, int m) {
    const int last = mesh.transverse_intervals();
    const double h = spacing_t(mesh);
    auto at = [&](int k) { return v[mesh.index(n, k)]; };
    if (m == 0) return (-3 * at(0) + 4 * at(1) - at(2)) / (2 * h);
    if (m == last) return (3 * at(last) - 4 * at(last - 1) + at(last - 2)) / (2 * h);
    return (at(m + 1) - at(m - 1)) / (2 * h);
}

double d_tt(const LayerMesh& mesh, const std::vector<double>& v, std::size_t n, int m) {
    const int last = mesh.transverse_intervals();
    const double h = spacing_t(mesh);
    auto at = [&](int k) { return v[mesh.index(n, k)]; };
    if (m == 0) return (2 * at(0) - 5 * at(1) + 4 * at(2) - at(3)) / (h * h);
    if (m == last) return (2 * at(last) - 5 * at(last - 1) + 4 * at(last - 2) - at(last - 3)) / (h * h);
    return (at(m + 1) - 2 * at(m) + at(m - 1)) / (h * h);
}

// Contravariant basis of the parallel surface at distance t.
std::array<Vec3, 2> parallel_contravariant(const GeometryCache& g, double t) {
    const auto lu = (Mat3::Identity() + t * g.weingarten).partialPivLu();
    return {lu.solve(g.contravariant[0]), lu.solve(g.contravariant[1])};
}

double parallel_h0(const GeometryCache& g, double t) {
    return (Mat3::Identity() + t * g.weingarten).partialPivLu().solve(g.weingarten).trace();
}

}  // namespace

LayerGradient extended_gradient(const LayerMesh& mesh, const LayerField& f) {
    check_size(mesh, f.size());
    const SurfaceMesh& base = mesh.base();
    LayerGradient out;
    out.values.resize(mesh.node_count());
    parallel_for(static_cast<std::size_t>(mesh.transverse_nodes()), [&](std::size_t mi) {
        const int m = static_cast<int>(mi);
        const ScalarField s = f.slice(mesh, m);
        const auto d1 = base.chart_partial(s.values, 0);
        const auto d2 = base.chart_partial(s.values, 1);
        for (std::size_t n = 0; n < base.node_count(); ++n) {
            const auto c = parallel_contravariant(base.geometry(n), mesh.t(m));
            const Vec3 tangential = d1[n] * c[0] + d2[n] * c[1];
            out.values[mesh.index(n, m)] << tangential, d_t(mesh, f.values, n, m);
        }
    });
    return out;
}

ScalarField extended_divergence_slice(const LayerMesh& mesh, const LayerVectorField& u, int m) {
    check_size(mesh, u.values.size());
    const SurfaceMesh& base = mesh.base();
    const std::size_t ns = base.node_count();
    std::vector<double> normal_part(mesh.node_count());
    for (int k = 0; k < mesh.transverse_nodes(); ++k) {
        for (std::size_t n = 0; n < ns; ++n) {
            normal_part[mesh.index(n, k)] = base.geometry(n).normal.dot(u.values[mesh.index(n, k)]);
        }
    }
    std::array<std::vector<double>, 3> tangential;
    for (int j = 0; j < 3; ++j) {
        tangential[j].resize(ns);
        for (std::size_t n = 0; n < ns; ++n) {
            const std::size_t k = mesh.index(n, m);
            tangential[j][n] = u.values[k](j) - normal_part[k] * base.geometry(n).normal(j);
        }
    }
    std::array<std::array<std::vector<double>, 2>, 3> partials;
    for (int j = 0; j < 3; ++j) {
        for (int a = 0; a < 2; ++a) partials[j][a] = base.chart_partial(tangential[j], a);
    }
    ScalarField out = ScalarField::zeros(ns);
    for (std::size_t n = 0; n < ns; ++n) {
        const GeometryCache& g = base.geometry(n);
        const auto c = parallel_contravariant(g, mesh.t(m));
        double div = 0.0;
        for (int j = 0; j < 3; ++j) div += partials[j][0][n] * c[0](j) + partials[j][1][n] * c[1](j);
        const double un = normal_part[mesh.index(n, m)];
        out[n] = div + d_t(mesh, normal_part, n, m) + parallel_h0(g, mesh.t(m)) * un;
    }
    return out;
}

LayerField extended_divergence(const LayerMesh& mesh, const LayerVectorField& u) {
    LayerField out = LayerField::zeros(mesh);
    for (int m = 0; m < mesh.transverse_nodes(); ++m) out.set_slice(mesh, m, extended_divergence_slice(mesh, u, m));
    return out;
}

LayerField layer_laplacian(const LayerMesh& mesh, const LayerField& f) {
    check_size(mesh, f.size());
    LayerField out = LayerField::zeros(mesh);
    for (int m = 0; m < mesh.transverse_nodes(); ++m) {
        const ScalarField lap = laplace_beltrami(mesh.base(), f.slice(mesh, m));
        for (std::size_t n = 0; n < mesh.surface_nodes(); ++n) {
            out[mesh.index(n, m)] = lap[n] + d_tt(mesh, f.values, n, m);
        }
    }
    return out;
}

TransverseMatrices transverse_matrices(int intervals, double a, double b) {
    if (intervals < 1 || !(b > a)) throw std::invalid_argument("bad transverse interval");
    const int n = intervals + 1;
    const double h = (b - a) / intervals;
    TransverseMatrices tm{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    for (int e = 0; e < intervals; ++e) {
        tm.mass(e, e) += h / 3;
        tm.mass(e + 1, e + 1) += h / 3;
        tm.mass(e, e + 1) += h / 6;
        tm.mass(e + 1, e) += h / 6;
        tm.stiffness(e, e) += 1 / h;
        tm.stiffness(e + 1, e + 1) += 1 / h;
        tm.stiffness(e, e + 1) -= 1 / h;
        tm.stiffness(e + 1, e) -= 1 / h;
    }
    return tm;
}

LayerData LayerData::zeros(const LayerMesh& mesh) {
    return {LayerField::zeros(mesh), ScalarField::zeros(mesh.surface_nodes()), ScalarField::zeros(mesh.surface_nodes())};
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] * b[i];
    return pairwise_sum(p);
}

// y = (S x T) x for a surface matrix S and a tridiagonal transverse matrix T.
std::vector<double> apply_kron(const LayerMesh& mesh, const CsrMatrix& s, const Eigen::MatrixXd& t,
                               std::span<const double> x) {
    const std::size_t ns = mesh.surface_nodes();
    const int nt = mesh.transverse_nodes();
    std::vector<std::vector<double>> sx(static_cast<std::size_t>(nt));
    for (int m = 0; m < nt; ++m) sx[m] = s * x.subspan(mesh.index(0, m), ns);
    std::vector<double> y(x.size(), 0.0);
    for (int m = 0; m < nt; ++m) {
        for (int k = std::max(0, m - 1); k <= std::min(nt - 1, m + 1); ++k) {
            const double c = t(m, k);
            if (c == 0.0) continue;
            for (std::size_t n = 0; n < ns; ++n) y[mesh.index(n, m)] += c * sx[k][n];
        }
    }
    return y;
}

double kron_form(const LayerMesh& mesh, const CsrMatrix& s, const Eigen::MatrixXd& t, std::span<const double> x,
                 std::span<const double> y) {
    return dot(x, apply_kron(mesh, s, t, y));
}

double face_term(const LayerMesh& mesh, const CsrMatrix& ms, const LayerField& t, const LayerData& d) {
    const std::size_t ns = mesh.surface_nodes();
    const std::span<const double> all(t.values);
    const auto top = all.subspan(mesh.index(0, mesh.transverse_intervals()), ns);
    const auto bottom = all.subspan(mesh.index(0, 0), ns);
    return ms.bilinear(d.q_plus.values, top) - ms.bilinear(d.q_minus.values, bottom);
}

void check_data(const LayerMesh& mesh, const LayerData& d) {
    check_size(mesh, d.source.size());
    if (d.q_plus.size() != mesh.surface_nodes() || d.q_minus.size() != mesh.surface_nodes()) {
        throw std::invalid_argument("face data size mismatch");
    }
}

struct FreeSet {
    std::vector<bool> lateral;
    std::vector<std::size_t> nodes;
};

FreeSet free_surface_nodes(const SurfaceMesh& base) {
    FreeSet fs{dirichlet_mask(base, kAllEdges), {}};
    for (std::size_t n = 0; n < fs.lateral.size(); ++n) {
        if (!fs.lateral[n]) fs.nodes.push_back(n);
    }
    if (fs.nodes.size() == fs.lateral.size()) throw EmptyDirichletBoundary();
    return fs;
}

// K_s x M_tau + w M_s x K_tau on free nodes; free index m * nf + r.
CsrMatrix layer_operator(const FemMatrices& fem, const TransverseMatrices& tm, const FreeSet& fs, double w) {
    const CsrMatrix& k = fem.stiffness;
    const CsrMatrix& m = fem.mass;
    if (k.nnz() != m.nnz() || !std::equal(k.col_index().begin(), k.col_index().end(), m.col_index().begin())) {
        throw std::logic_error("surface stiffness and mass patterns differ");
    }
    const std::size_t ns = fs.lateral.size();
    const std::size_t nf = fs.nodes.size();
    std::vector<std::ptrdiff_t> to_free(ns, -1);
    for (std::size_t r = 0; r < nf; ++r) to_free[fs.nodes[r]] = static_cast<std::ptrdiff_t>(r);
    const int nt = static_cast<int>(tm.mass.rows());
    const auto rp = k.row_ptr();
    const auto ci = k.col_index();
    const auto kv = k.values();
    const auto mv = m.values();
    std::vector<Triplet> trip;
    trip.reserve(nf * 9 * 3 * static_cast<std::size_t>(nt));
    for (int a = 0; a < nt; ++a) {
        for (std::size_t r = 0; r < nf; ++r) {
            const std::size_t i = fs.nodes[r];
            for (int b = std::max(0, a - 1); b <= std::min(nt - 1, a + 1); ++b) {
                const double tmass = tm.mass(a, b);
                const double tstiff = w * tm.stiffness(a, b);
                for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) {
                    const auto c = to_free[ci[p]];
                    if (c < 0) continue;
                    trip.push_back({static_cast<std::size_t>(a) * nf + r, static_cast<std::size_t>(b) * nf + static_cast<std::size_t>(c),
                                    kv[p] * tmass + mv[p] * tstiff});
                }
            }
        }
    }
    const std::size_t dim = nf * static_cast<std::size_t>(nt);
    return CsrMatrix::from_triplets(dim, dim, std::move(trip));
}

}  // namespace

LayerProblem::LayerProblem(const LayerMesh& mesh, LayerData data) : mesh_(&mesh), data_(std::move(data)) {
    check_data(mesh, data_);
    const SurfaceMesh& base = mesh.base();
    surface_ = assemble_fem(base, AnisotropyField::identity(base.node_count()));
    transverse_ = transverse_matrices(mesh.transverse_intervals(), -1.0, 1.0);
    FreeSet fs = free_surface_nodes(base);
    const double eps = mesh.eps();
    matrix_ = layer_operator(surface_, transverse_, fs, 1.0 / (eps * eps));
    lateral_ = std::move(fs.lateral);
    free_nodes_ = std::move(fs.nodes);

    std::vector<double> load = apply_kron(mesh, surface_.mass, transverse_.mass, data_.source.values);
    const auto mq_plus = surface_.mass * std::span<const double>(data_.q_plus.values);
    const auto mq_minus = surface_.mass * std::span<const double>(data_.q_minus.values);
    for (std::size_t n = 0; n < base.node_count(); ++n) {
        load[mesh.index(n, mesh.transverse_intervals())] += mq_plus[n] / eps;
        load[mesh.index(n, 0)] -= mq_minus[n] / eps;
    }
    const std::size_t nf = free_nodes_.size();
    rhs_.resize(nf * static_cast<std::size_t>(mesh.transverse_nodes()));
    for (int m = 0; m < mesh.transverse_nodes(); ++m) {
        for (std::size_t r = 0; r < nf; ++r) rhs_[static_cast<std::size_t>(m) * nf + r] = -load[mesh.index(free_nodes_[r], m)];
    }
}

LayerProblem::Solution LayerProblem::solve(int max_iterations) const {
    const CgResult cg = solve_pcg_jacobi(matrix_, rhs_, 1e-10, max_iterations);
    Solution sol{LayerField::zeros(*mesh_), cg.iterations, cg.relative_residual};
    const std::size_t nf = free_nodes_.size();
    for (int m = 0; m < mesh_->transverse_nodes(); ++m) {
        for (std::size_t r = 0; r < nf; ++r) {
            sol.field[mesh_->index(free_nodes_[r], m)] = cg.x[static_cast<std::size_t>(m) * nf + r];
        }
    }
    return sol;
}

LayerForms LayerProblem::forms(const LayerField& t) const {
    check_size(*mesh_, t.size());
    return {kron_form(*mesh_, surface_.stiffness, transverse_.mass, t.values, t.values),
            kron_form(*mesh_, surface_.mass, transverse_.stiffness, t.values, t.values),
            kron_form(*mesh_, surface_.mass, transverse_.mass, t.values, t.values)};
}

double LayerProblem::scaled_energy(const LayerField& t) const {
    const LayerForms f = forms(t);
    const double eps = mesh_->eps();
    const double source = kron_form(*mesh_, surface_.mass, transverse_.mass, data_.source.values, t.values);
    return 0.5 * f.surface_gradient + 0.5 * f.transverse / (eps * eps) + source +
           face_term(*mesh_, surface_.mass, t, data_) / eps;
}

LayerField solve_layer_bvp(const LayerMesh& mesh, const LayerData& data) {
    return LayerProblem(mesh, data).solve().field;
}

double scaled_energy(const LayerMesh& mesh, const LayerField& t, const LayerData& data) {
    return LayerProblem(mesh, data).scaled_energy(t);
}

double unscaled_energy(const LayerMesh& mesh, const LayerField& t, const LayerData& data) {
    check_size(mesh, t.size());
    check_data(mesh, data);
    const SurfaceMesh& base = mesh.base();
    const FemMatrices fem = assemble_fem(base, AnisotropyField::identity(base.node_count()));
    // Physical-grid transverse matrices by two-point Gauss quadrature per cell.
    const int nt = mesh.transverse_nodes();
    const double h = spacing_t(mesh);
    Eigen::MatrixXd mt = Eigen::MatrixXd::Zero(nt, nt), kt = Eigen::MatrixXd::Zero(nt, nt);
    const double g = 0.5 / std::sqrt(3.0);
    for (int e = 0; e + 1 < nt; ++e) {
        for (double xi : {0.5 - g, 0.5 + g}) {
            const double phi[2] = {1 - xi, xi};
            const double dphi[2] = {-1 / h, 1 / h};
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    mt(e + a, e + b) += 0.5 * h * phi[a] * phi[b];
                    kt(e + a, e + b) += 0.5 * h * dphi[a] * dphi[b];
                }
            }
        }
    }
    return 0.5 * kron_form(mesh, fem.stiffness, mt, t.values, t.values) +
           0.5 * kron_form(mesh, fem.mass, kt, t.values, t.values) +
           kron_form(mesh, fem.mass, mt, data.source.values, t.values) + face_term(mesh, fem.mass, t, data);
}

double limit_energy(const SurfaceMesh& mesh, const ScalarField& t, const ScalarField& f0, const ScalarField& q0) {
    const std::size_t n = mesh.node_count();
    if (t.size() != n || f0.size() != n || q0.size() != n) throw std::invalid_argument("surface field size mismatch");
    const FemMatrices fem = assemble_fem(mesh, AnisotropyField::identity(n));
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = f0[i] + q0[i];
    return 2.0 * (0.5 * fem.stiffness.bilinear(t.values, t.values) + fem.mass.bilinear(rhs, t.values));
}

double t_independence_ratio(const LayerMesh& mesh, const LayerField& t) {
    check_size(mesh, t.size());
    const FemMatrices fem = assemble_fem(mesh.base(), AnisotropyField::identity(mesh.surface_nodes()));
    const TransverseMatrices tm = transverse_matrices(mesh.transverse_intervals(), -1.0, 1.0);
    const double mass = kron_form(mesh, fem.mass, tm.mass, t.values, t.values);
    if (mass == 0.0) return 0.0;
    return kron_form(mesh, fem.mass, tm.stiffness, t.values, t.values) / mass;
}

ScalarField tau_average(const LayerMesh& mesh, const LayerField& t) {
    check_size(mesh, t.size());
    const double dtau = 2.0 / mesh.transverse_intervals();
    ScalarField out = ScalarField::zeros(mesh.surface_nodes());
    for (int m = 0; m < mesh.transverse_nodes(); ++m) {
        const double w = (m == 0 || m == mesh.transverse_intervals()) ? 0.5 * dtau : dtau;
        for (std::size_t n = 0; n < mesh.surface_nodes(); ++n) out[n] += 0.5 * w * t[mesh.index(n, m)];
    }
    return out;
}

double layer_poincare_constant(const LayerMesh& mesh) {
    const SurfaceMesh& base = mesh.base();
    const FemMatrices fem = assemble_fem(base, AnisotropyField::identity(base.node_count()));
    const TransverseMatrices tm = transverse_matrices(mesh.transverse_intervals(), -1.0, 1.0);
    const FreeSet fs = free_surface_nodes(base);
    const CsrMatrix a1 = layer_operator(fem, tm, fs, 1.0);
    const auto ms = fem.mass.row_sums();
    const Eigen::VectorXd mt = tm.mass.rowwise().sum();
    const std::size_t nf = fs.nodes.size();
    std::vector<double> lumped(a1.rows());
    for (int m = 0; m < mesh.transverse_nodes(); ++m) {
        for (std::size_t r = 0; r < nf; ++r) lumped[static_cast<std::size_t>(m) * nf + r] = ms[fs.nodes[r]] * mt(m);
    }
    const double lambda = smallest_generalized_eigenvalue(a1, lumped);
    return lambda / (1.0 + lambda);
}

double layer_h1_norm(const LayerProblem& problem, const LayerField& t) {
    const LayerForms f = problem.forms(t);
    return std::sqrt(f.surface_gradient + f.transverse + f.mass);
}

double layer_l2_norm(const LayerProblem& problem, const LayerField& t) { return std::sqrt(problem.forms(t).mass); }

void write_layer_csv(std::ostream& os, const LayerMesh& mesh, const LayerField& t) {
    check_size(mesh, t.size());
    os << "node,tau,value\n";
    for (int m = 0; m < mesh.transverse_nodes(); ++m) {
        for (std::size_t n = 0; n < mesh.surface_nodes(); ++n) {
            os << n << ',' << format_double(mesh.tau(m)) << ',' << format_double(t[mesh.index(n, m)]) << '\n';
        }
    }
}

}  // namespace thinlayer
