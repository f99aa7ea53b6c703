#include "dp/kernels.hpp"

// AVX2+FMA variants. Compiled with -mavx2 -mfma (see src/CMakeLists.txt) and
// only reachable after the runtime CPU check in kernels_dispatch.cpp.
//
// Elementwise kernels (shift_relu, soft_thr, affine, fgsm_step, vadd/vsub/
// vmul, axpy, scal) round identically to the scalar reference. Reductions and
// gemm use multiple accumulators / FMA, so they agree with the reference only
// up to reassociation rounding; the equivalence tests carry tolerances there.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace dp::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b + p * n;
            __m256d va = _mm256_set1_pd(av);
            std::size_t j = 0;
            for (; j + 8 <= n; j += 8) {
                __m256d c0 = _mm256_loadu_pd(crow + j);
                __m256d c1 = _mm256_loadu_pd(crow + j + 4);
                c0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(brow + j), c0);
                c1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(brow + j + 4), c1);
                _mm256_storeu_pd(crow + j, c0);
                _mm256_storeu_pd(crow + j + 4, c1);
            }
            for (; j + 4 <= n; j += 4) {
                __m256d c0 = _mm256_loadu_pd(crow + j);
                c0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(brow + j), c0);
                _mm256_storeu_pd(crow + j, c0);
            }
            for (; j < n; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
        }
    }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            __m256d acc0 = _mm256_setzero_pd();
            __m256d acc1 = _mm256_setzero_pd();
            std::size_t p = 0;
            for (; p + 8 <= k; p += 8) {
                acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p),
                                       _mm256_loadu_pd(brow + p), acc0);
                acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p + 4),
                                       _mm256_loadu_pd(brow + p + 4), acc1);
            }
            for (; p + 4 <= k; p += 4) {
                acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p),
                                       _mm256_loadu_pd(brow + p), acc0);
            }
            double acc = hsum(_mm256_add_pd(acc0, acc1));
            for (; p < k; ++p) acc = std::fma(arow[p], brow[p], acc);
            crow[j] += acc;
        }
    }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            double av = arow[i];
            if (av == 0.0) continue;
            double* crow = c + i * n;
            __m256d va = _mm256_set1_pd(av);
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d c0 = _mm256_loadu_pd(crow + j);
                c0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(brow + j), c0);
                _mm256_storeu_pd(crow + j, c0);
            }
            for (; j < n; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
        }
    }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal(std::size_t n, double alpha, double* x) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

void vadd(std::size_t n, const double* x, const double* y, double* dst) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(
            dst + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                                   _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) dst[i] = x[i] + y[i];
}

void vsub(std::size_t n, const double* x, const double* y, double* dst) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(
            dst + i, _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                   _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) dst[i] = x[i] - y[i];
}

void vmul(std::size_t n, const double* x, const double* y, double* dst) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(
            dst + i, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                   _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) dst[i] = x[i] * y[i];
}

double dot(std::size_t n, const double* x, const double* y) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                               acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                               _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                               acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc = std::fma(x[i], y[i], acc);
    return acc;
}

double nrm2sq(std::size_t n, const double* x) { return dot(n, x, x); }

double asum(std::size_t n, const double* x) {
    const __m256d absmask =
        _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc,
                            _mm256_and_pd(absmask, _mm256_loadu_pd(x + i)));
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

double vsum(std::size_t n, const double* x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double vmax_abs(std::size_t n, const double* x) {
    const __m256d absmask =
        _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc,
                            _mm256_and_pd(absmask, _mm256_loadu_pd(x + i)));
    double out = 0.0;
    alignas(32) double tmp[4];
    _mm256_store_pd(tmp, acc);
    for (double v : tmp)
        if (v > out) out = v;
    for (; i < n; ++i) {
        double v = std::fabs(x[i]);
        if (v > out) out = v;
    }
    return out;
}

void shift_relu(std::size_t n, const double* x, double lam, double* dst) {
    const __m256d vlam = _mm256_set1_pd(lam);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_sub_pd(_mm256_loadu_pd(x + i), vlam);
        _mm256_storeu_pd(dst + i, _mm256_max_pd(v, zero));
    }
    for (; i < n; ++i) {
        double v = x[i] - lam;
        dst[i] = v > 0.0 ? v : 0.0;
    }
}

void shift_relu_v(std::size_t n, const double* x, const double* lam,
                  double* dst) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v =
            _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(lam + i));
        _mm256_storeu_pd(dst + i, _mm256_max_pd(v, zero));
    }
    for (; i < n; ++i) {
        double v = x[i] - lam[i];
        dst[i] = v > 0.0 ? v : 0.0;
    }
}

inline __m256d soft_thr_vec(__m256d v, __m256d l) {
    __m256d up = _mm256_sub_pd(v, l);
    __m256d dn = _mm256_add_pd(v, l);
    __m256d gt = _mm256_cmp_pd(v, l, _CMP_GT_OQ);
    __m256d lt = _mm256_cmp_pd(v, _mm256_sub_pd(_mm256_setzero_pd(), l),
                               _CMP_LT_OQ);
    return _mm256_or_pd(_mm256_and_pd(gt, up), _mm256_and_pd(lt, dn));
}

void soft_thr(std::size_t n, const double* x, double lam, double* dst) {
    const __m256d vlam = _mm256_set1_pd(lam);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i, soft_thr_vec(_mm256_loadu_pd(x + i), vlam));
    for (; i < n; ++i) {
        double v = x[i];
        dst[i] = v > lam ? v - lam : (v < -lam ? v + lam : 0.0);
    }
}

void soft_thr_v(std::size_t n, const double* x, const double* lam,
                double* dst) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i, soft_thr_vec(_mm256_loadu_pd(x + i),
                                               _mm256_loadu_pd(lam + i)));
    for (; i < n; ++i) {
        double v = x[i];
        double l = lam[i];
        dst[i] = v > l ? v - l : (v < -l ? v + l : 0.0);
    }
}

double mask_gt_accum(std::size_t n, const double* x, double lam,
                     const double* g, double* dst) {
    const __m256d vlam = _mm256_set1_pd(lam);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d mask =
            _mm256_cmp_pd(_mm256_loadu_pd(x + i), vlam, _CMP_GT_OQ);
        __m256d gm = _mm256_and_pd(mask, _mm256_loadu_pd(g + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), gm));
        acc = _mm256_add_pd(acc, gm);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        if (x[i] - lam > 0.0) {
            dst[i] += g[i];
            s += g[i];
        }
    }
    return s;
}

double mask_gt_accum_v(std::size_t n, const double* x, const double* lam,
                       const double* g, double* dst) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i),
                                     _mm256_loadu_pd(lam + i), _CMP_GT_OQ);
        __m256d gm = _mm256_and_pd(mask, _mm256_loadu_pd(g + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), gm));
        acc = _mm256_add_pd(acc, gm);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        if (x[i] - lam[i] > 0.0) {
            dst[i] += g[i];
            s += g[i];
        }
    }
    return s;
}

double mask_abs_accum(std::size_t n, const double* x, double lam,
                      const double* g, double* dst) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > lam) {
            dst[i] += g[i];
            s += g[i];
        } else if (x[i] < -lam) {
            dst[i] += g[i];
            s -= g[i];
        }
    }
    return s;
}

void affine(std::size_t n, double a, double b, const double* x, double* dst) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(
            dst + i,
            _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)), vb));
    for (; i < n; ++i) dst[i] = a * x[i] + b;
}

void fgsm_step(std::size_t n, const double* x, const double* g, double eps,
               double* dst) {
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vg = _mm256_loadu_pd(g + i);
        __m256d pos = _mm256_and_pd(_mm256_cmp_pd(vg, zero, _CMP_GT_OQ), one);
        __m256d neg = _mm256_and_pd(_mm256_cmp_pd(vg, zero, _CMP_LT_OQ), one);
        __m256d sgn = _mm256_sub_pd(pos, neg);
        __m256d v = _mm256_add_pd(_mm256_loadu_pd(x + i),
                                  _mm256_mul_pd(veps, sgn));
        _mm256_storeu_pd(dst + i, _mm256_min_pd(one, _mm256_max_pd(zero, v)));
    }
    for (; i < n; ++i) {
        double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
        double v = x[i] + eps * s;
        dst[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
}

}  // namespace

const Table& avx2_table() {
    static const Table t = {
        gemm_nn,       gemm_nt,       gemm_tn,         axpy,
        scal,          vadd,          vsub,            vmul,
        dot,           nrm2sq,        asum,            vsum,
        vmax_abs,      shift_relu,    shift_relu_v,    soft_thr,
        soft_thr_v,    mask_gt_accum, mask_gt_accum_v, mask_abs_accum,
        affine,        fgsm_step,
    };
    return t;
}

}  // namespace dp::kernels

#else  // non-x86: no AVX2 table, dispatch falls back to scalar

namespace dp::kernels {
const Table& avx2_table() { return scalar_table(); }
}  // namespace dp::kernels

#endif
