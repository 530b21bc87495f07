#pragma once

// Dense double-precision inner loops. Every kernel has a portable scalar
// reference implementation and, on x86-64, an AVX2+FMA variant chosen at
// runtime. Results of the two paths agree up to floating-point
// reassociation; tests/unit/test_kernels.cpp pins that tolerance.

#include <cstddef>
#include <span>
#include <string_view>

namespace sgdlab::simd {

struct KernelTable {
    std::string_view name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // Givens rotation: x' = c*x - s*y, y' = s*x + c*y
    void (*rot)(double* x, double* y, double c, double s, std::size_t n);
    // y = A x, A is rows x cols row-major
    void (*gemv)(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
    // y += A^T x, A is rows x cols row-major
    void (*gemv_t_add)(const double* a, const double* x, double* y, std::size_t rows, std::size_t cols);
    // Upper triangle (j >= i) of the n x n row-major A += alpha * x x^T
    void (*syr_upper)(double alpha, const double* x, double* a, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_kernels();

// Selected once per process: AVX2 when available unless LAB_SIMD=scalar.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sumsq(std::span<const double> a) { return active().dot(a.data(), a.data(), a.size()); }

}  // namespace sgdlab::simd
