#include "sgdlab/numerics/kernels.hpp"

namespace sgdlab::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    // Four partial sums so the reduction order matches the AVX2 lane layout
    // closely enough for the equivalence tolerance.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void rot_scalar(double* x, double* y, double c, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        const double yi = y[i];
        x[i] = c * xi - s * yi;
        y[i] = s * xi + c * yi;
    }
}

void gemv_scalar(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void gemv_t_add_scalar(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (x[r] != 0.0) axpy_scalar(x[r], a + r * cols, y, cols);
    }
}

void syr_upper_scalar(double alpha, const double* x, double* a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ax = alpha * x[i];
        if (ax == 0.0) continue;
        double* row = a + i * n;
        for (std::size_t j = i; j < n; ++j) row[j] += ax * x[j];
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar",     dot_scalar,         axpy_scalar,
                                   rot_scalar,   gemv_scalar,        gemv_t_add_scalar,
                                   syr_upper_scalar};
    return table;
}

}  // namespace sgdlab::simd
