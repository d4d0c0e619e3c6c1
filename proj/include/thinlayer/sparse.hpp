#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace thinlayer {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Duplicate triplets are summed in insertion
/// order, so assembly in a fixed order yields bitwise reproducible entries.
class CsrMatrix {
public:
    CsrMatrix() = default;
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> operator*(std::span<const double> x) const;
    /// x^T A y
    double bilinear(std::span<const double> x, std::span<const double> y) const;

    double at(std::size_t i, std::size_t j) const;
    std::vector<double> diagonal() const;
    std::vector<double> row_sums() const;
    /// max |A_ij - A_ji|
    double max_asymmetry() const;

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_index() const noexcept { return col_; }
    std::span<const double> values() const noexcept { return values_; }

    void write_matrix_market(std::ostream& os) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_;
    std::vector<double> values_;
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Default iteration cap 20 sqrt(n) + 500.
int default_cg_iteration_cap(std::size_t n);

/// Jacobi-preconditioned conjugate gradients for SPD systems. Stops once the
/// true relative residual ||b - Ax|| / ||b|| is at most rel_tol. Throws
/// SolverDiverged when the cap is reached first.
CgResult solve_pcg_jacobi(const CsrMatrix& a, std::span<const double> b, double rel_tol = 1e-10,
                          int max_iterations = -1);

}  // namespace thinlayer

namespace thinlayer {

/// Smallest eigenvalue of K x = lambda D x for SPD K and a positive diagonal D,
/// by inverse iteration with CG inner solves.
double smallest_generalized_eigenvalue(const CsrMatrix& k, std::span<const double> diag,
                                       double tol = 1e-10, int max_outer = 200);

}  // namespace thinlayer
