#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sgdlab {

using Vec = std::vector<double>;

/// Dense symmetric matrix, stored in full row-major form. Writes go through
/// set()/add() so entries (i,j) and (j,i) are always bit-identical.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

    static SymMatrix identity(std::size_t dim);
    static SymMatrix diagonal(std::span<const double> diag);
    /// Builds from a row-major buffer; throws InputError unless it is exactly symmetric.
    static SymMatrix from_rows(std::size_t dim, std::span<const double> rows);

    std::size_t dim() const { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        data_[i * dim_ + j] = v;
        data_[j * dim_ + i] = v;
    }
    void add(std::size_t i, std::size_t j, double v) { set(i, j, (*this)(i, j) + v); }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<const double> data() const { return data_; }

    /// Raw access for kernels that fill the upper triangle; callers must
    /// finish with mirror_upper().
    double* raw() { return data_.data(); }
    void mirror_upper();

    /// A += alpha * x x^T (upper triangle only; call mirror_upper() when done).
    void rank1_update_upper(double alpha, std::span<const double> x);

    SymMatrix& operator+=(const SymMatrix& other);
    SymMatrix& operator*=(double s);

    double frobenius() const;
    double trace() const;
    bool all_finite() const;
    Vec multiply(std::span<const double> x) const;

private:
    std::size_t dim_ = 0;
    Vec data_;
};

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double s, const SymMatrix& a);

/// ||A - B||_F / ||B||_F (absolute difference when B is zero).
double relative_frobenius_error(const SymMatrix& a, const SymMatrix& b);

/// Eigenpairs with eigenvalues sorted descending. eigenvectors[k] is the unit
/// vector belonging to eigenvalues[k].
struct Spectrum {
    Vec eigenvalues;
    std::vector<Vec> eigenvectors;

    std::size_t size() const { return eigenvalues.size(); }
    double max() const { return eigenvalues.empty() ? 0.0 : eigenvalues.front(); }
    /// V diag(lambda) V^T; throws when eigenvectors were not computed.
    SymMatrix reconstruct() const;
};

struct EigOptions {
    bool vectors = true;
    /// Matrices larger than this go to the Householder/QR backend.
    std::size_t jacobi_max_dim = 256;
};

/// Symmetric eigendecomposition. Cyclic Jacobi up to jacobi_max_dim,
/// stopping once the off-diagonal Frobenius norm drops below 1e-12 ||M||_F.
Spectrum sym_eig(const SymMatrix& m, const EigOptions& options = {});

/// The Jacobi path regardless of size (exposed for cross-checks).
Spectrum sym_eig_jacobi(const SymMatrix& m, bool vectors = true);

/// Tridiagonalization + implicit QR backend (Eigen).
Spectrum sym_eig_tridiagonal(const SymMatrix& m, bool vectors = true);

/// Symmetric PSD square root. Eigenvalues in [-clamp_tol * lambda_max, 0)
/// are treated as zero; anything more negative throws NotPsdError.
SymMatrix psd_sqrt(const SymMatrix& m, double clamp_tol = 1e-10);

/// Moore-Penrose pseudo-inverse of a PSD matrix, dropping eigenvalues
/// at or below clamp_tol * lambda_max.
SymMatrix psd_pinv(const SymMatrix& m, double clamp_tol = 1e-10);

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

}  // namespace sgdlab
