#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace dp {

// Dense row-major tensor of doubles. Immutable by convention once handed to
// the tape; mutation is confined to construction sites and optimizer buffers.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);  // zero-filled
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double v);
    static Tensor vector(std::initializer_list<double> vals);
    static Tensor matrix(std::size_t rows, std::size_t cols,
                         std::initializer_list<double> vals);
    static Tensor identity(std::size_t n);

    // When strict mode is on (the default), construction from data rejects
    // NaN/Inf entries.
    static void set_strict_finite(bool on);
    static bool strict_finite();

    std::size_t size() const { return data_.size(); }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_[i]; }
    const std::vector<std::size_t>& shape() const { return shape_; }
    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    std::string shape_str() const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double at2(std::size_t i, std::size_t j) const {
        return data_[i * shape_[1] + j];
    }
    double& at2(std::size_t i, std::size_t j) {
        return data_[i * shape_[1] + j];
    }

    bool all_finite() const;
    bool operator==(const Tensor& o) const {
        return shape_ == o.shape_ && data_ == o.data_;
    }

  private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Tensor-level operations. Every routine here funnels into dp::kernels, so a
// single backend choice covers the whole library. These are also the forward
// implementations used by the autodiff tape, which keeps tape-built and plain
// computations bit-identical.
namespace ops {

// c = a[m x k] * b[k x n]
Tensor matmul_nn(const Tensor& a, const Tensor& b);
// c = a[m x k] * b[n x k]^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// c = a[k x m]^T * b[k x n]
Tensor matmul_tn(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
void axpy_into(Tensor& y, double alpha, const Tensor& x);

double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);
double norm2sq(const Tensor& a);
double sum(const Tensor& a);
double abs_sum(const Tensor& a);
double max_abs(const Tensor& a);

// Channel-broadcast thresholds over batched activations. Activations are
// [N, D] (channel span 1, lam has D entries) or [N, C, H, W] (span H*W, lam
// has C entries).
Tensor shift_relu(const Tensor& x, const Tensor& lam);
Tensor soft_threshold(const Tensor& x, const Tensor& lam);
// Scalar-threshold variants over the whole tensor.
Tensor shift_relu(const Tensor& x, double lam);
Tensor soft_threshold(const Tensor& x, double lam);

// y = a_c * x + b_c per channel.
Tensor channel_affine(const Tensor& x, const Tensor& a, const Tensor& b);
// Per-channel mean over batch and spatial positions.
Tensor channel_mean(const Tensor& x);
Tensor channel_var(const Tensor& x, const Tensor& mean);

// Number of channels / span of one channel for a batched activation.
std::size_t channel_count(const Tensor& x);
std::size_t channel_span(const Tensor& x);

// Cross-correlation (the analysis direction B^T for conv layers) with 3x3
// (pad 1) or 1x1 (pad 0) kernels and stride 1 or 2, realized as an im2col
// patch-matrix product. x: [N, Cin, H, W], k: [Cout, Cin, kh, kw].
Tensor conv_analysis(const Tensor& x, const Tensor& k, int stride);
// Exact adjoint (transposed convolution; the synthesis direction B):
// w: [N, Cout, H', W'] -> [N, Cin, H, W].
Tensor conv_synthesis(const Tensor& w, const Tensor& k, int stride,
                      std::size_t h, std::size_t w_out);
// dK accumulation shared by the backward rules of both conv directions.
Tensor conv_kernel_grad(const Tensor& img, const Tensor& coef,
                        const Tensor& k_shape_like, int stride);

// Spatial output extent: ceil(extent / stride).
std::size_t conv_out_extent(std::size_t extent, int stride);

Tensor global_avg_pool(const Tensor& x);          // [N,C,H,W] -> [N,C]
Tensor global_avg_pool_grad(const Tensor& gy, std::size_t h, std::size_t w);

}  // namespace ops

}  // namespace dp
