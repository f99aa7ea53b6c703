#include <cmath>
#include <cstddef>

#include "dp/kernels.hpp"

// Reference kernels. These are the semantic ground truth the SIMD variants
// are equivalence-tested against.

namespace dp::kernels {
namespace {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
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
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
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
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal(std::size_t n, double alpha, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void vadd(std::size_t n, const double* x, const double* y, double* dst) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = x[i] + y[i];
}

void vsub(std::size_t n, const double* x, const double* y, double* dst) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = x[i] - y[i];
}

void vmul(std::size_t n, const double* x, const double* y, double* dst) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = x[i] * y[i];
}

double dot(std::size_t n, const double* x, const double* y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double nrm2sq(std::size_t n, const double* x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double asum(std::size_t n, const double* x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(x[i]);
    return acc;
}

double vsum(std::size_t n, const double* x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double vmax_abs(std::size_t n, const double* x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = std::fabs(x[i]);
        if (v > acc) acc = v;
    }
    return acc;
}

void shift_relu(std::size_t n, const double* x, double lam, double* dst) {
    for (std::size_t i = 0; i < n; ++i) {
        double v = x[i] - lam;
        dst[i] = v > 0.0 ? v : 0.0;
    }
}

void shift_relu_v(std::size_t n, const double* x, const double* lam,
                  double* dst) {
    for (std::size_t i = 0; i < n; ++i) {
        double v = x[i] - lam[i];
        dst[i] = v > 0.0 ? v : 0.0;
    }
}

void soft_thr(std::size_t n, const double* x, double lam, double* dst) {
    for (std::size_t i = 0; i < n; ++i) {
        double v = x[i];
        if (v > lam)
            dst[i] = v - lam;
        else if (v < -lam)
            dst[i] = v + lam;
        else
            dst[i] = 0.0;
    }
}

void soft_thr_v(std::size_t n, const double* x, const double* lam,
                double* dst) {
    for (std::size_t i = 0; i < n; ++i) {
        double v = x[i];
        double l = lam[i];
        if (v > l)
            dst[i] = v - l;
        else if (v < -l)
            dst[i] = v + l;
        else
            dst[i] = 0.0;
    }
}

double mask_gt_accum(std::size_t n, const double* x, double lam,
                     const double* g, double* dst) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] - lam > 0.0) {
            dst[i] += g[i];
            acc += g[i];
        }
    }
    return acc;
}

double mask_gt_accum_v(std::size_t n, const double* x, const double* lam,
                       const double* g, double* dst) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] - lam[i] > 0.0) {
            dst[i] += g[i];
            acc += g[i];
        }
    }
    return acc;
}

double mask_abs_accum(std::size_t n, const double* x, double lam,
                      const double* g, double* dst) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > lam) {
            dst[i] += g[i];
            acc += g[i];
        } else if (x[i] < -lam) {
            dst[i] += g[i];
            acc -= g[i];
        }
    }
    return acc;
}

void affine(std::size_t n, double a, double b, const double* x, double* dst) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a * x[i] + b;
}

void fgsm_step(std::size_t n, const double* x, const double* g, double eps,
               double* dst) {
    for (std::size_t i = 0; i < n; ++i) {
        double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
        double v = x[i] + eps * s;
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        dst[i] = v;
    }
}

}  // namespace

const Table& scalar_table() {
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
