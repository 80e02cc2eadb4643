#include "proxfwi/linsys.hpp"

#include "proxfwi/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <string>
#include <variant>

namespace proxfwi {

ComplexSparseMatrix::ComplexSparseMatrix(int n_rows, int n_cols, std::vector<int> row_offsets,
                                         std::vector<int> col_indices, std::vector<Complex> values)
{
    if (n_rows < 0 || n_cols < 0) {
        throw DomainError("negative matrix dimension");
    }
    if (row_offsets.size() != static_cast<std::size_t>(n_rows) + 1 || row_offsets.front() != 0) {
        throw DomainError("row offsets must have n_rows + 1 entries starting at 0");
    }
    if (col_indices.size() != values.size() || static_cast<std::size_t>(row_offsets.back()) != values.size()) {
        throw DomainError("last row offset must equal the number of stored entries");
    }
    for (int r = 0; r < n_rows; ++r) {
        if (row_offsets[r + 1] < row_offsets[r]) {
            throw DomainError("row offsets must be nondecreasing (row " + std::to_string(r) + ")");
        }
        for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
            if (col_indices[k] < 0 || col_indices[k] >= n_cols) {
                throw DomainError("column index out of bounds in row " + std::to_string(r));
            }
            if (k > row_offsets[r] && col_indices[k] <= col_indices[k - 1]) {
                throw DomainError("column indices must be strictly increasing in row " + std::to_string(r));
            }
        }
    }
    m_ = Eigen::Map<const Storage>(n_rows, n_cols, static_cast<int>(values.size()), row_offsets.data(),
                                   col_indices.data(), values.data());
}

ComplexSparseMatrix ComplexSparseMatrix::from_triplets(int n_rows, int n_cols,
                                                       const std::vector<ComplexTriplet>& triplets)
{
    std::vector<Eigen::Triplet<Complex, int>> t;
    t.reserve(triplets.size());
    for (const auto& e : triplets) {
        if (e.row < 0 || e.row >= n_rows || e.col < 0 || e.col >= n_cols) {
            throw DomainError("triplet index out of bounds");
        }
        t.emplace_back(e.row, e.col, e.value);
    }
    Storage m(n_rows, n_cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return ComplexSparseMatrix(std::move(m));
}

ComplexSparseMatrix ComplexSparseMatrix::from_eigen(Storage m)
{
    m.makeCompressed();
    return ComplexSparseMatrix(std::move(m));
}

std::vector<int> ComplexSparseMatrix::row_offsets() const
{
    return {m_.outerIndexPtr(), m_.outerIndexPtr() + m_.rows() + 1};
}

std::vector<int> ComplexSparseMatrix::col_indices() const
{
    return {m_.innerIndexPtr(), m_.innerIndexPtr() + m_.nonZeros()};
}

std::vector<Complex> ComplexSparseMatrix::values() const
{
    return {m_.valuePtr(), m_.valuePtr() + m_.nonZeros()};
}

Complex ComplexSparseMatrix::coeff(int row, int col) const { return m_.coeff(row, col); }

Eigen::VectorXcd ComplexSparseMatrix::multiply(const Eigen::VectorXcd& x) const
{
    if (x.size() != m_.cols()) {
        throw DomainError("mat-vec dimension mismatch");
    }
    return m_ * x;
}

Eigen::MatrixXcd ComplexSparseMatrix::multiply(const Eigen::MatrixXcd& x) const
{
    if (x.rows() != m_.cols()) {
        throw DomainError("mat-mat dimension mismatch");
    }
    return m_ * x;
}

Eigen::MatrixXcd ComplexSparseMatrix::adjoint_multiply(const Eigen::MatrixXcd& x) const
{
    if (x.rows() != m_.rows()) {
        throw DomainError("adjoint mat-mat dimension mismatch");
    }
    return m_.adjoint() * x;
}

// --- factorization ----------------------------------------------------------------

namespace {
using ColMajor = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
using LuSolver = Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>>;
using LdltSolver = Eigen::SimplicialLDLT<ColMajor, Eigen::Lower, Eigen::AMDOrdering<int>>;
} // namespace

struct Factorization::Impl {
    ComplexSparseMatrix matrix;
    Method method;
    std::variant<std::unique_ptr<LuSolver>, std::unique_ptr<LdltSolver>> solver;

    [[nodiscard]] Eigen::MatrixXcd raw_solve(const Eigen::MatrixXcd& rhs) const
    {
        if (method == Method::lu) {
            return std::get<0>(solver)->solve(rhs);
        }
        return std::get<1>(solver)->solve(rhs);
    }
};

Factorization factorize(const ComplexSparseMatrix& a)
{
    if (a.rows() != a.cols()) {
        throw DomainError("factorize: matrix must be square");
    }
    auto lu = std::make_unique<LuSolver>();
    const ColMajor cm = a.eigen();
    lu->analyzePattern(cm);
    lu->factorize(cm);
    if (lu->info() != Eigen::Success) {
        throw NumericalError("sparse LU failed: " + lu->lastErrorMessage());
    }
    auto impl = std::make_shared<Factorization::Impl>(
        Factorization::Impl{a, Factorization::Method::lu, std::move(lu)});
    return Factorization(std::move(impl));
}

Factorization factorize_hermitian(const ComplexSparseMatrix& a)
{
    if (a.rows() != a.cols()) {
        throw DomainError("factorize_hermitian: matrix must be square");
    }
    auto ldlt = std::make_unique<LdltSolver>();
    const ColMajor cm = a.eigen();
    ldlt->compute(cm);
    if (ldlt->info() != Eigen::Success) {
        throw NumericalError("sparse LDL^H failed (matrix not Hermitian positive definite?)");
    }
    const auto& d = ldlt->vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!(std::abs(d[i]) > 0.0)) {
            throw NumericalError("sparse LDL^H: zero pivot at permuted row " + std::to_string(i));
        }
    }
    auto impl = std::make_shared<Factorization::Impl>(
        Factorization::Impl{a, Factorization::Method::hermitian_ldlt, std::move(ldlt)});
    return Factorization(std::move(impl));
}

Eigen::MatrixXcd Factorization::solve(const Eigen::MatrixXcd& rhs) const
{
    if (rhs.rows() != impl_->matrix.rows()) {
        throw DomainError("solve: rhs has " + std::to_string(rhs.rows()) + " rows, matrix dimension is " +
                          std::to_string(impl_->matrix.rows()));
    }
    Eigen::MatrixXcd x = impl_->raw_solve(rhs);
    for (int step = 0; step < refine_steps; ++step) {
        const Eigen::MatrixXcd r = rhs - impl_->matrix.multiply(x);
        x += impl_->raw_solve(r);
    }
    if (!x.allFinite()) {
        throw NumericalError("solve produced non-finite values");
    }
    return x;
}

Eigen::VectorXcd Factorization::solve(const Eigen::VectorXcd& rhs) const
{
    return solve(Eigen::MatrixXcd(rhs)).col(0);
}

int Factorization::dimension() const noexcept { return impl_->matrix.rows(); }

Factorization::Method Factorization::method() const noexcept { return impl_->method; }

} // namespace proxfwi
