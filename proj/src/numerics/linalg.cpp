#include "sgdlab/numerics/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sgdlab/errors.hpp"
#include "sgdlab/numerics/kernels.hpp"

namespace sgdlab {

SymMatrix SymMatrix::identity(std::size_t dim) {
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.set(i, i, 1.0);
    return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
    SymMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m.set(i, i, diag[i]);
    return m;
}

SymMatrix SymMatrix::from_rows(std::size_t dim, std::span<const double> rows) {
    if (rows.size() != dim * dim) throw DimensionError("SymMatrix::from_rows: expected dim*dim entries");
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
            if (rows[i * dim + j] != rows[j * dim + i]) {
                throw InputError("SymMatrix::from_rows: entries (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") are not symmetric");
            }
            m.set(i, j, rows[i * dim + j]);
        }
    }
    return m;
}

void SymMatrix::mirror_upper() {
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = i + 1; j < dim_; ++j) data_[j * dim_ + i] = data_[i * dim_ + j];
    }
}

void SymMatrix::rank1_update_upper(double alpha, std::span<const double> x) {
    if (x.size() != dim_) throw DimensionError("rank1_update_upper: vector length mismatch");
    simd::active().syr_upper(alpha, x.data(), data_.data(), dim_);
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
    if (other.dim_ != dim_) throw DimensionError("SymMatrix +=: dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double SymMatrix::frobenius() const {
    return std::sqrt(std::accumulate(data_.begin(), data_.end(), 0.0,
                                     [](double acc, double v) { return acc + v * v; }));
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
}

bool SymMatrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Vec SymMatrix::multiply(std::span<const double> x) const {
    if (x.size() != dim_) throw DimensionError("SymMatrix::multiply: vector length mismatch");
    Vec y(dim_);
    simd::active().gemv(data_.data(), x.data(), y.data(), dim_, dim_);
    return y;
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    SymMatrix out = a;
    out += -1.0 * b;
    return out;
}

SymMatrix operator*(double s, const SymMatrix& a) {
    SymMatrix out = a;
    out *= s;
    return out;
}

double relative_frobenius_error(const SymMatrix& a, const SymMatrix& b) {
    const double diff = (a - b).frobenius();
    const double ref = b.frobenius();
    return ref > 0.0 ? diff / ref : diff;
}

SymMatrix Spectrum::reconstruct() const {
    if (eigenvectors.size() != eigenvalues.size()) {
        throw InputError("Spectrum::reconstruct: eigenvectors were not computed");
    }
    SymMatrix out(eigenvalues.size());
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) out.rank1_update_upper(eigenvalues[k], eigenvectors[k]);
    out.mirror_upper();
    return out;
}

namespace {

void require_finite(const SymMatrix& m, const char* what) {
    if (!m.all_finite()) throw InputError(std::string(what) + ": matrix has non-finite entries");
}

Spectrum sorted_spectrum(Vec values, std::vector<Vec> vectors) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    Spectrum s;
    s.eigenvalues.reserve(values.size());
    for (std::size_t k : order) s.eigenvalues.push_back(values[k]);
    if (!vectors.empty()) {
        s.eigenvectors.reserve(values.size());
        for (std::size_t k : order) s.eigenvectors.push_back(std::move(vectors[k]));
    }
    return s;
}

}  // namespace

Spectrum sym_eig_jacobi(const SymMatrix& m, bool vectors) {
    require_finite(m, "sym_eig");
    const std::size_t n = m.dim();
    Vec a(m.data().begin(), m.data().end());
    Vec vt;  // rows are the eigenvector estimates
    if (vectors) {
        vt.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;
    }
    const auto& k = simd::active();
    const double tol = 1e-12 * m.frobenius();

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
        }
        return std::sqrt(2.0 * s);
    };

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps && off_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) <= 1e-300) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                double* row_p = a.data() + p * n;
                double* row_q = a.data() + q * n;
                k.rot(row_p, row_q, c, s, n);
                row_p[p] = app - t * apq;
                row_q[q] = aqq + t * apq;
                row_p[q] = 0.0;
                row_q[p] = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    a[r * n + p] = row_p[r];
                    a[r * n + q] = row_q[r];
                }
                if (vectors) k.rot(vt.data() + p * n, vt.data() + q * n, c, s, n);
            }
        }
    }
    if (off_norm() > tol) throw Error("sym_eig: Jacobi iteration did not converge");

    Vec values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = a[i * n + i];
    std::vector<Vec> vecs;
    if (vectors) {
        vecs.resize(n);
        for (std::size_t i = 0; i < n; ++i) vecs[i].assign(vt.begin() + i * n, vt.begin() + (i + 1) * n);
    }
    return sorted_spectrum(std::move(values), std::move(vecs));
}

Spectrum sym_eig_tridiagonal(const SymMatrix& m, bool vectors) {
    require_finite(m, "sym_eig");
    const auto n = static_cast<Eigen::Index>(m.dim());
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(m.data().data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(view, vectors ? Eigen::ComputeEigenvectors
                                                                         : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error("sym_eig: tridiagonal QR did not converge");
    Vec values(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    std::vector<Vec> vecs;
    if (vectors) {
        vecs.resize(static_cast<std::size_t>(n));
        for (Eigen::Index c = 0; c < n; ++c) {
            vecs[static_cast<std::size_t>(c)].assign(solver.eigenvectors().col(c).data(),
                                                     solver.eigenvectors().col(c).data() + n);
        }
    }
    return sorted_spectrum(std::move(values), std::move(vecs));
}

Spectrum sym_eig(const SymMatrix& m, const EigOptions& options) {
    if (m.dim() <= options.jacobi_max_dim) return sym_eig_jacobi(m, options.vectors);
    return sym_eig_tridiagonal(m, options.vectors);
}

namespace {

// Eigen-decomposes and validates the lower end of the spectrum.
Spectrum psd_spectrum(const SymMatrix& m, double clamp_tol) {
    Spectrum s = sym_eig(m);
    const double lmax = std::max(0.0, s.max());
    for (double& lambda : s.eigenvalues) {
        if (lambda < 0.0) {
            if (lambda < -clamp_tol * lmax) {
                throw NotPsdError("matrix is not positive semi-definite (eigenvalue " + std::to_string(lambda) +
                                  ", lambda_max " + std::to_string(lmax) + ")");
            }
            lambda = 0.0;
        }
    }
    return s;
}

}  // namespace

SymMatrix psd_sqrt(const SymMatrix& m, double clamp_tol) {
    const Spectrum s = psd_spectrum(m, clamp_tol);
    SymMatrix out(m.dim());
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s.eigenvalues[k] > 0.0) out.rank1_update_upper(std::sqrt(s.eigenvalues[k]), s.eigenvectors[k]);
    }
    out.mirror_upper();
    return out;
}

SymMatrix psd_pinv(const SymMatrix& m, double clamp_tol) {
    const Spectrum s = psd_spectrum(m, clamp_tol);
    const double cutoff = clamp_tol * s.max();
    SymMatrix out(m.dim());
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s.eigenvalues[k] > cutoff) out.rank1_update_upper(1.0 / s.eigenvalues[k], s.eigenvectors[k]);
    }
    out.mirror_upper();
    return out;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace sgdlab
