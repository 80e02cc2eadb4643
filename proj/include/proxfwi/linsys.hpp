#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <cstdint>
#include <type_traits>
#include <functional>
#include <memory>
#include <random>
#include <vector>

namespace proxfwi {

using Complex = std::complex<double>;

struct ComplexTriplet {
    int row;
    int col;
    Complex value;
};

/// Square-or-rectangular complex matrix in compressed-row storage.
///
/// Column indices are strictly increasing within each row (no duplicates);
/// row offsets are nondecreasing and end at the number of stored entries.
class ComplexSparseMatrix {
  public:
    using Storage = Eigen::SparseMatrix<Complex, Eigen::RowMajor, int>;

    ComplexSparseMatrix() = default;

    /// Build from raw CSR arrays; throws on any invariant violation.
    ComplexSparseMatrix(int n_rows, int n_cols, std::vector<int> row_offsets, std::vector<int> col_indices,
                        std::vector<Complex> values);

    /// Build from unordered triplets; duplicate (row, col) entries are summed.
    static ComplexSparseMatrix from_triplets(int n_rows, int n_cols, const std::vector<ComplexTriplet>& triplets);
    static ComplexSparseMatrix from_eigen(Storage m);

    [[nodiscard]] int rows() const noexcept { return static_cast<int>(m_.rows()); }
    [[nodiscard]] int cols() const noexcept { return static_cast<int>(m_.cols()); }
    [[nodiscard]] int nnz() const noexcept { return static_cast<int>(m_.nonZeros()); }

    [[nodiscard]] std::vector<int> row_offsets() const;
    [[nodiscard]] std::vector<int> col_indices() const;
    [[nodiscard]] std::vector<Complex> values() const;

    /// Stored value at (row, col), zero when the entry is not stored.
    [[nodiscard]] Complex coeff(int row, int col) const;

    [[nodiscard]] Eigen::VectorXcd multiply(const Eigen::VectorXcd& x) const;
    [[nodiscard]] Eigen::MatrixXcd multiply(const Eigen::MatrixXcd& x) const;
    /// A^H x.
    [[nodiscard]] Eigen::MatrixXcd adjoint_multiply(const Eigen::MatrixXcd& x) const;

    [[nodiscard]] const Storage& eigen() const noexcept { return m_; }

  private:
    explicit ComplexSparseMatrix(Storage m) : m_(std::move(m)) {}
    Storage m_;
};

/// Reusable direct factorization of one ComplexSparseMatrix.
///
/// The handle is immutable once built; `solve` is const and may be called
/// concurrently. Each solve applies `refine_steps` rounds of iterative
/// refinement against the original matrix.
class Factorization {
  public:
    enum class Method { lu, hermitian_ldlt };

    [[nodiscard]] Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs) const;
    [[nodiscard]] Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;

    [[nodiscard]] int dimension() const noexcept;
    [[nodiscard]] Method method() const noexcept;

    int refine_steps = 1;

  private:
    struct Impl;
    explicit Factorization(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;

    friend Factorization factorize(const ComplexSparseMatrix& a);
    friend Factorization factorize_hermitian(const ComplexSparseMatrix& a);
};

/// Sparse LU with COLAMD fill-reducing ordering. Throws NumericalError when
/// the matrix is singular, reporting the failing pivot.
Factorization factorize(const ComplexSparseMatrix& a);

/// LDL^H factorization with AMD ordering for Hermitian positive definite
/// matrices (the lower triangle is read). Throws NumericalError on failure.
Factorization factorize_hermitian(const ComplexSparseMatrix& a);

// --- spectral norm ------------------------------------------------------------------

struct SpectralEstimate {
    double sigma = 0.0;
    bool converged = false;
    int iterations = 0;
};

template <typename Scalar>
using LinearMap = std::function<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>&)>;

inline constexpr std::uint64_t spectral_seed = 0x5eed5eedULL;

/// Largest singular value of a general linear map by power iteration on the
/// normal map apply_adjoint(apply(.)), from a fixed seeded random start.
///
/// Iteration stops once the relative change of the estimate drops below
/// tol / 10; the result is flagged unconverged after max_iter iterations.
template <typename Scalar>
SpectralEstimate spectral_norm(const LinearMap<Scalar>& apply, const LinearMap<Scalar>& apply_adjoint, int n,
                               double tol = 1e-4, int max_iter = 500)
{
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    std::mt19937_64 rng(spectral_seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec v(n);
    for (int i = 0; i < n; ++i) {
        if constexpr (std::is_same_v<Scalar, double>) {
            v[i] = uni(rng);
        } else {
            const double re = uni(rng);
            v[i] = Scalar(re, uni(rng));
        }
    }
    v.normalize();

    SpectralEstimate est;
    double previous = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        const Vec av = apply(v);
        const double sigma = av.norm(); // sqrt of the Rayleigh quotient of the normal map
        est.sigma = sigma;
        est.iterations = it;
        if (sigma == 0.0) {
            est.converged = true;
            return est;
        }
        if (it > 1 && std::abs(sigma - previous) <= 0.1 * tol * sigma) {
            est.converged = true;
            return est;
        }
        previous = sigma;
        Vec w = apply_adjoint(av);
        const double wn = w.norm();
        if (wn == 0.0) {
            est.converged = true;
            return est;
        }
        v = w / wn;
    }
    return est;
}

/// Self-adjoint overload: the map is its own adjoint.
template <typename Scalar>
SpectralEstimate spectral_norm(const LinearMap<Scalar>& apply, int n, double tol = 1e-4, int max_iter = 500)
{
    return spectral_norm<Scalar>(apply, apply, n, tol, max_iter);
}

} // namespace proxfwi
