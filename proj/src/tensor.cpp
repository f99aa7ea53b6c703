#include "dp/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "dp/error.hpp"
#include "dp/kernels.hpp"

namespace dp {

namespace {

std::atomic<bool> g_strict{true};

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a,
                                 const Tensor& b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_numel(shape_))
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str());
    if (g_strict.load(std::memory_order_relaxed) && !all_finite())
        throw NumericError("non-finite value in tensor of shape " +
                           shape_str());
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = v;
    return t;
}

Tensor Tensor::vector(std::initializer_list<double> vals) {
    return Tensor({vals.size()}, std::vector<double>(vals));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<double> vals) {
    return Tensor({rows, cols}, std::vector<double>(vals));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at2(i, i) = 1.0;
    return t;
}

void Tensor::set_strict_finite(bool on) {
    g_strict.store(on, std::memory_order_relaxed);
}

bool Tensor::strict_finite() {
    return g_strict.load(std::memory_order_relaxed);
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << 'x';
        os << shape_[i];
    }
    os << ']';
    return os.str();
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace ops {

using kernels::active;

Tensor matmul_nn(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        shape_mismatch("matmul_nn", a, b);
    Tensor c({a.dim(0), b.dim(1)});
    active().gemm_nn(a.dim(0), b.dim(1), a.dim(1), a.data(), b.data(),
                     c.data());
    return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(1))
        shape_mismatch("matmul_nt", a, b);
    Tensor c({a.dim(0), b.dim(0)});
    active().gemm_nt(a.dim(0), b.dim(0), a.dim(1), a.data(), b.data(),
                     c.data());
    return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0))
        shape_mismatch("matmul_tn", a, b);
    Tensor c({a.dim(1), b.dim(1)});
    active().gemm_tn(a.dim(1), b.dim(1), a.dim(0), a.data(), b.data(),
                     c.data());
    return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) shape_mismatch("add", a, b);
    Tensor c(a.shape());
    active().vadd(a.size(), a.data(), b.data(), c.data());
    return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) shape_mismatch("sub", a, b);
    Tensor c(a.shape());
    active().vsub(a.size(), a.data(), b.data(), c.data());
    return c;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) shape_mismatch("mul", a, b);
    Tensor c(a.shape());
    active().vmul(a.size(), a.data(), b.data(), c.data());
    return c;
}

Tensor scale(const Tensor& a, double c) {
    Tensor out = a;
    active().scal(out.size(), c, out.data());
    return out;
}

void axpy_into(Tensor& y, double alpha, const Tensor& x) {
    if (!y.same_shape(x)) shape_mismatch("axpy", y, x);
    active().axpy(y.size(), alpha, x.data(), y.data());
}

double dot(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) shape_mismatch("dot", a, b);
    return active().dot(a.size(), a.data(), b.data());
}

double norm2sq(const Tensor& a) { return active().nrm2sq(a.size(), a.data()); }

double norm2(const Tensor& a) { return std::sqrt(norm2sq(a)); }

double sum(const Tensor& a) { return active().vsum(a.size(), a.data()); }

double abs_sum(const Tensor& a) { return active().asum(a.size(), a.data()); }

double max_abs(const Tensor& a) {
    return active().vmax_abs(a.size(), a.data());
}

std::size_t channel_count(const Tensor& x) {
    if (x.rank() == 2) return x.dim(1);
    if (x.rank() == 4) return x.dim(1);
    throw ShapeError("batched activation expected ([N,D] or [N,C,H,W]), got " +
                     x.shape_str());
}

std::size_t channel_span(const Tensor& x) {
    if (x.rank() == 2) return 1;
    if (x.rank() == 4) return x.dim(2) * x.dim(3);
    throw ShapeError("batched activation expected ([N,D] or [N,C,H,W]), got " +
                     x.shape_str());
}

namespace {

void check_channels(const char* op, const Tensor& x, const Tensor& lam) {
    if (lam.rank() != 1 || lam.dim(0) != channel_count(x))
        throw ShapeError(std::string(op) + ": per-channel parameter " +
                         lam.shape_str() + " does not match activation " +
                         x.shape_str());
}

template <typename SpanFn, typename RowFn>
void for_channels(const Tensor& x, SpanFn&& per_span, RowFn&& per_row) {
    std::size_t n = x.dim(0);
    std::size_t span = channel_span(x);
    std::size_t c = channel_count(x);
    std::size_t per_sample = span * c;
    if (span == 1) {
        for (std::size_t i = 0; i < n; ++i) per_row(i * per_sample, c);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t ch = 0; ch < c; ++ch)
                per_span(i * per_sample + ch * span, span, ch);
    }
}

}  // namespace

Tensor shift_relu(const Tensor& x, const Tensor& lam) {
    check_channels("shift_relu", x, lam);
    Tensor out(x.shape());
    for_channels(
        x,
        [&](std::size_t off, std::size_t span, std::size_t ch) {
            active().shift_relu(span, x.data() + off, lam[ch],
                                out.data() + off);
        },
        [&](std::size_t off, std::size_t c) {
            active().shift_relu_v(c, x.data() + off, lam.data(),
                                  out.data() + off);
        });
    return out;
}

Tensor soft_threshold(const Tensor& x, const Tensor& lam) {
    check_channels("soft_threshold", x, lam);
    Tensor out(x.shape());
    for_channels(
        x,
        [&](std::size_t off, std::size_t span, std::size_t ch) {
            active().soft_thr(span, x.data() + off, lam[ch],
                              out.data() + off);
        },
        [&](std::size_t off, std::size_t c) {
            active().soft_thr_v(c, x.data() + off, lam.data(),
                                out.data() + off);
        });
    return out;
}

Tensor shift_relu(const Tensor& x, double lam) {
    Tensor out(x.shape());
    active().shift_relu(x.size(), x.data(), lam, out.data());
    return out;
}

Tensor soft_threshold(const Tensor& x, double lam) {
    Tensor out(x.shape());
    active().soft_thr(x.size(), x.data(), lam, out.data());
    return out;
}

Tensor channel_affine(const Tensor& x, const Tensor& a, const Tensor& b) {
    check_channels("channel_affine", x, a);
    check_channels("channel_affine", x, b);
    Tensor out(x.shape());
    std::size_t n = x.dim(0);
    std::size_t span = channel_span(x);
    std::size_t c = channel_count(x);
    std::size_t per_sample = span * c;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) {
            std::size_t off = i * per_sample + ch * span;
            active().affine(span, a[ch], b[ch], x.data() + off,
                            out.data() + off);
        }
    return out;
}

Tensor channel_mean(const Tensor& x) {
    std::size_t c = channel_count(x);
    std::size_t span = channel_span(x);
    std::size_t n = x.dim(0);
    std::size_t per_sample = span * c;
    Tensor m({c});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch)
            m[ch] += active().vsum(span, x.data() + i * per_sample + ch * span);
    double inv = 1.0 / static_cast<double>(n * span);
    for (std::size_t ch = 0; ch < c; ++ch) m[ch] *= inv;
    return m;
}

Tensor channel_var(const Tensor& x, const Tensor& mean) {
    std::size_t c = channel_count(x);
    std::size_t span = channel_span(x);
    std::size_t n = x.dim(0);
    std::size_t per_sample = span * c;
    Tensor v({c});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double* p = x.data() + i * per_sample + ch * span;
            double mu = mean[ch];
            double acc = 0.0;
            for (std::size_t s = 0; s < span; ++s) {
                double d = p[s] - mu;
                acc += d * d;
            }
            v[ch] += acc;
        }
    double inv = 1.0 / static_cast<double>(n * span);
    for (std::size_t ch = 0; ch < c; ++ch) v[ch] *= inv;
    return v;
}

std::size_t conv_out_extent(std::size_t extent, int stride) {
    return (extent + static_cast<std::size_t>(stride) - 1) /
           static_cast<std::size_t>(stride);
}

namespace {

struct ConvDims {
    std::size_t cin, h, w, cout, kh, kw, ho, wo;
    int pad;
};

ConvDims conv_dims(const Tensor& x, const Tensor& k, int stride) {
    if (x.rank() != 4)
        throw ShapeError("conv input must be [N,C,H,W], got " + x.shape_str());
    if (k.rank() != 4)
        throw ShapeError("conv kernel must be [Cout,Cin,kh,kw], got " +
                         k.shape_str());
    ConvDims d;
    d.cin = x.dim(1);
    d.h = x.dim(2);
    d.w = x.dim(3);
    d.cout = k.dim(0);
    d.kh = k.dim(2);
    d.kw = k.dim(3);
    if (k.dim(1) != d.cin)
        throw ShapeError("conv kernel channels " + k.shape_str() +
                         " do not match input " + x.shape_str());
    if (!((d.kh == 3 && d.kw == 3) || (d.kh == 1 && d.kw == 1)))
        throw ShapeError("unsupported kernel size " + k.shape_str() +
                         " (only 3x3 and 1x1 accepted)");
    if (stride != 1 && stride != 2)
        throw ShapeError("conv stride must be 1 or 2");
    d.pad = d.kh == 3 ? 1 : 0;
    d.ho = conv_out_extent(d.h, stride);
    d.wo = conv_out_extent(d.w, stride);
    return d;
}

// Patch matrix for one sample: rows indexed by (cin, ky, kx), columns by
// output position, so analysis is a single gemm with the kernel matrix.
void im2col(const double* x, const ConvDims& d, int stride, double* patch) {
    std::size_t cols = d.ho * d.wo;
    for (std::size_t ci = 0; ci < d.cin; ++ci) {
        const double* plane = x + ci * d.h * d.w;
        for (std::size_t ky = 0; ky < d.kh; ++ky)
            for (std::size_t kx = 0; kx < d.kw; ++kx) {
                double* row =
                    patch + ((ci * d.kh + ky) * d.kw + kx) * cols;
                for (std::size_t oy = 0; oy < d.ho; ++oy) {
                    long iy = static_cast<long>(oy) * stride +
                              static_cast<long>(ky) - d.pad;
                    for (std::size_t ox = 0; ox < d.wo; ++ox) {
                        long ix = static_cast<long>(ox) * stride +
                                  static_cast<long>(kx) - d.pad;
                        double v = 0.0;
                        if (iy >= 0 && iy < static_cast<long>(d.h) &&
                            ix >= 0 && ix < static_cast<long>(d.w))
                            v = plane[iy * static_cast<long>(d.w) + ix];
                        row[oy * d.wo + ox] = v;
                    }
                }
            }
    }
}

void col2im_accum(const double* patch, const ConvDims& d, int stride,
                  double* x) {
    std::size_t cols = d.ho * d.wo;
    for (std::size_t ci = 0; ci < d.cin; ++ci) {
        double* plane = x + ci * d.h * d.w;
        for (std::size_t ky = 0; ky < d.kh; ++ky)
            for (std::size_t kx = 0; kx < d.kw; ++kx) {
                const double* row =
                    patch + ((ci * d.kh + ky) * d.kw + kx) * cols;
                for (std::size_t oy = 0; oy < d.ho; ++oy) {
                    long iy = static_cast<long>(oy) * stride +
                              static_cast<long>(ky) - d.pad;
                    if (iy < 0 || iy >= static_cast<long>(d.h)) continue;
                    for (std::size_t ox = 0; ox < d.wo; ++ox) {
                        long ix = static_cast<long>(ox) * stride +
                                  static_cast<long>(kx) - d.pad;
                        if (ix < 0 || ix >= static_cast<long>(d.w)) continue;
                        plane[iy * static_cast<long>(d.w) + ix] +=
                            row[oy * d.wo + ox];
                    }
                }
            }
    }
}

}  // namespace

Tensor conv_analysis(const Tensor& x, const Tensor& k, int stride) {
    ConvDims d = conv_dims(x, k, stride);
    std::size_t n = x.dim(0);
    std::size_t krows = d.cin * d.kh * d.kw;
    std::size_t cols = d.ho * d.wo;
    Tensor out({n, d.cout, d.ho, d.wo});
    std::vector<double> patch(krows * cols);
    for (std::size_t i = 0; i < n; ++i) {
        im2col(x.data() + i * d.cin * d.h * d.w, d, stride, patch.data());
        // [Cout x krows] * [krows x cols] lands row-major as [Cout x cols],
        // exactly the per-sample output layout.
        kernels::active().gemm_nn(d.cout, cols, krows, k.data(), patch.data(),
                                  out.data() + i * d.cout * cols);
    }
    return out;
}

Tensor conv_synthesis(const Tensor& w, const Tensor& k, int stride,
                      std::size_t h, std::size_t w_out) {
    if (w.rank() != 4)
        throw ShapeError("conv coefficients must be [N,Cout,H',W'], got " +
                         w.shape_str());
    Tensor probe({1, k.dim(1), h, w_out});
    ConvDims d = conv_dims(probe, k, stride);
    if (w.dim(1) != d.cout || w.dim(2) != d.ho || w.dim(3) != d.wo)
        throw ShapeError("conv_synthesis coefficient shape " + w.shape_str() +
                         " inconsistent with kernel " + k.shape_str());
    std::size_t n = w.dim(0);
    std::size_t krows = d.cin * d.kh * d.kw;
    std::size_t cols = d.ho * d.wo;
    Tensor out({n, d.cin, h, w_out});
    std::vector<double> patch(krows * cols);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(patch.begin(), patch.end(), 0.0);
        // patch = K^T * w_i: [krows x cols]
        kernels::active().gemm_tn(krows, cols, d.cout, k.data(),
                                  w.data() + i * d.cout * cols, patch.data());
        col2im_accum(patch.data(), d, stride,
                     out.data() + i * d.cin * h * w_out);
    }
    return out;
}

Tensor conv_kernel_grad(const Tensor& img, const Tensor& coef,
                        const Tensor& k_shape_like, int stride) {
    ConvDims d = conv_dims(img, k_shape_like, stride);
    std::size_t n = img.dim(0);
    std::size_t krows = d.cin * d.kh * d.kw;
    std::size_t cols = d.ho * d.wo;
    if (coef.rank() != 4 || coef.dim(0) != n || coef.dim(1) != d.cout ||
        coef.dim(2) != d.ho || coef.dim(3) != d.wo)
        throw ShapeError("conv_kernel_grad coefficient shape " +
                         coef.shape_str() + " inconsistent with image " +
                         img.shape_str());
    Tensor dk(k_shape_like.shape());
    std::vector<double> patch(krows * cols);
    for (std::size_t i = 0; i < n; ++i) {
        im2col(img.data() + i * d.cin * d.h * d.w, d, stride, patch.data());
        // dK[Cout x krows] += coef_i [Cout x cols] * patch^T [cols x krows]
        kernels::active().gemm_nt(d.cout, krows, cols,
                                  coef.data() + i * d.cout * cols,
                                  patch.data(), dk.data());
    }
    return dk;
}

Tensor global_avg_pool(const Tensor& x) {
    if (x.rank() != 4)
        throw ShapeError("global_avg_pool expects [N,C,H,W], got " +
                         x.shape_str());
    std::size_t n = x.dim(0), c = x.dim(1), span = x.dim(2) * x.dim(3);
    Tensor out({n, c});
    double inv = 1.0 / static_cast<double>(span);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch)
            out.at2(i, ch) =
                kernels::active().vsum(span, x.data() + (i * c + ch) * span) *
                inv;
    return out;
}

Tensor global_avg_pool_grad(const Tensor& gy, std::size_t h, std::size_t w) {
    std::size_t n = gy.dim(0), c = gy.dim(1), span = h * w;
    Tensor out({n, c, h, w});
    double inv = 1.0 / static_cast<double>(span);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) {
            double g = gy.at2(i, ch) * inv;
            double* p = out.data() + (i * c + ch) * span;
            for (std::size_t s = 0; s < span; ++s) p[s] = g;
        }
    return out;
}

}  // namespace ops

}  // namespace dp
