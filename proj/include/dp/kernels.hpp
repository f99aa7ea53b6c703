#pragma once

#include <cstddef>
#include <string>

namespace dp::kernels {

// Flat double-precision kernels behind every tensor operation. Each entry has
// a scalar reference implementation and, on x86-64 with AVX2+FMA, a vectorized
// variant. The active table is chosen once at startup; all call sites go
// through active() so a whole process runs on exactly one backend.
//
// Matrix arguments are row-major and contiguous.
struct Table {
    // c[m x n] += a[m x k] * b[k x n]
    void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, const double* b, double* c);
    // c[m x n] += a[m x k] * b[n x k]^T
    void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, const double* b, double* c);
    // c[m x n] += a[k x m]^T * b[k x n]
    void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, const double* b, double* c);

    void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
    void (*scal)(std::size_t n, double alpha, double* x);
    void (*vadd)(std::size_t n, const double* x, const double* y, double* dst);
    void (*vsub)(std::size_t n, const double* x, const double* y, double* dst);
    void (*vmul)(std::size_t n, const double* x, const double* y, double* dst);

    double (*dot)(std::size_t n, const double* x, const double* y);
    double (*nrm2sq)(std::size_t n, const double* x);
    double (*asum)(std::size_t n, const double* x);
    double (*vsum)(std::size_t n, const double* x);
    double (*vmax_abs)(std::size_t n, const double* x);

    // dst = max(x - lam, 0), scalar threshold over a contiguous span.
    void (*shift_relu)(std::size_t n, const double* x, double lam, double* dst);
    // dst_i = max(x_i - lam_i, 0), per-element thresholds.
    void (*shift_relu_v)(std::size_t n, const double* x, const double* lam,
                         double* dst);
    // Signed soft threshold, scalar and per-element variants.
    void (*soft_thr)(std::size_t n, const double* x, double lam, double* dst);
    void (*soft_thr_v)(std::size_t n, const double* x, const double* lam,
                       double* dst);

    // dst += g where x - lam > 0 (subgradient mask of shift_relu); returns the
    // masked sum of g (the threshold's own gradient contribution, unsigned).
    double (*mask_gt_accum)(std::size_t n, const double* x, double lam,
                            const double* g, double* dst);
    double (*mask_gt_accum_v)(std::size_t n, const double* x,
                              const double* lam, const double* g, double* dst);
    // Signed variant: dst += g where |x| > lam; returns sum of g * sign(x)
    // over active coordinates.
    double (*mask_abs_accum)(std::size_t n, const double* x, double lam,
                             const double* g, double* dst);

    // dst = a * x + b with scalar a, b over a span.
    void (*affine)(std::size_t n, double a, double b, const double* x,
                   double* dst);
    // dst = clamp(x + eps * sign(g), 0, 1) with sign(0) = 0.
    void (*fgsm_step)(std::size_t n, const double* x, const double* g,
                      double eps, double* dst);
};

const Table& scalar_table();

// AVX2+FMA table; only valid to call when avx2_supported() is true.
const Table& avx2_table();
bool avx2_supported();

// Dispatched table: AVX2 when supported, scalar otherwise. The environment
// variable DEEP_PURSUIT_KERNELS=scalar|avx2 overrides the choice.
const Table& active();
std::string backend_name();

}  // namespace dp::kernels
