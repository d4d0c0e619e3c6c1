#include "thinlayer/sparse.hpp"

#include "thinlayer/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace thinlayer {

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_.assign(rows + 1, 0);
    for (std::size_t i = 0; i < triplets.size();) {
        const Triplet& t = triplets[i];
        if (t.row >= rows || t.col >= cols) throw std::out_of_range("triplet outside matrix");
        double sum = 0.0;
        std::size_t j = i;
        for (; j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col; ++j) {
            sum += triplets[j].value;
        }
        m.col_.push_back(t.col);
        m.values_.push_back(sum);
        ++m.row_ptr_[t.row + 1];
        i = j;
    }
    std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
    return m;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols_ || y.size() != rows_) throw std::invalid_argument("dimension mismatch");
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_[p]];
        y[i] = s;
    }
}

std::vector<double> CsrMatrix::operator*(std::span<const double> x) const {
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
}

double CsrMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
    const auto ay = *this * y;
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += x[i] * ay[i];
    return s;
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    const auto begin = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_.at(i));
    const auto end = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_.at(i + 1));
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_.begin())];
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

std::vector<double> CsrMatrix::row_sums() const {
    std::vector<double> s(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s[i] += values_[p];
    return s;
}

double CsrMatrix::max_asymmetry() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            worst = std::max(worst, std::abs(values_[p] - at(col_[p], i)));
    return worst;
}

void CsrMatrix::write_matrix_market(std::ostream& os) const {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << rows_ << ' ' << cols_ << ' ' << values_.size() << '\n';
    char buf[64];
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            std::snprintf(buf, sizeof buf, "%.17g", values_[p]);
            os << i + 1 << ' ' << col_[p] + 1 << ' ' << buf << '\n';
        }
    }
}

int default_cg_iteration_cap(std::size_t n) {
    return static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))) + 500;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

CgResult solve_pcg_jacobi(const CsrMatrix& a, std::span<const double> b, double rel_tol,
                          int max_iterations) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("CG needs a square system");
    if (max_iterations < 0) max_iterations = default_cg_iteration_cap(n);

    CgResult result;
    result.x.assign(n, 0.0);
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) return result;

    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0.0)) throw std::invalid_argument("CG needs a positive diagonal");
        d = 1.0 / d;
    }

    std::vector<double> r(b.begin(), b.end()), z(n), p(n), ap(n);
    auto precondition = [&] {
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    };
    precondition();
    p = z;
    double rz = dot(r, z);
    int it = 0;
    while (true) {
        double rel = std::sqrt(dot(r, r)) / bnorm;
        if (rel <= rel_tol) {
            // Confirm with the true residual; recursion drift triggers a restart.
            a.multiply(result.x, ap);
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
            rel = std::sqrt(dot(r, r)) / bnorm;
            result.relative_residual = rel;
            if (rel <= rel_tol) break;
            precondition();
            p = z;
            rz = dot(r, z);
        }
        if (it >= max_iterations) throw SolverDiverged(it, rel);
        a.multiply(p, ap);
        const double alpha = rz / dot(p, ap);
        for (std::size_t i = 0; i < n; ++i) {
            result.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precondition();
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        ++it;
    }
    result.iterations = it;
    return result;
}

}  // namespace thinlayer

namespace thinlayer {

double smallest_generalized_eigenvalue(const CsrMatrix& k, std::span<const double> diag, double tol,
                                       int max_outer) {
    const std::size_t n = k.rows();
    if (diag.size() != n) throw std::invalid_argument("mass diagonal size mismatch");
    std::vector<double> x(n);
    // Deterministic, non-symmetric start vector.
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * std::sin(0.37 * static_cast<double>(i));
    auto normalize = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += diag[i] * x[i] * x[i];
        s = std::sqrt(s);
        for (double& v : x) v /= s;
    };
    normalize();
    double lambda = k.bilinear(x, x);
    std::vector<double> rhs(n);
    for (int outer = 0; outer < max_outer; ++outer) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = diag[i] * x[i];
        x = solve_pcg_jacobi(k, rhs, 1e-12).x;
        normalize();
        const double next = k.bilinear(x, x);
        const bool done = std::abs(next - lambda) <= tol * std::abs(next);
        lambda = next;
        if (done) break;
    }
    return lambda;
}

}  // namespace thinlayer
