#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "dp/tensor.hpp"

namespace dp::autodiff {

enum class OpKind : std::uint8_t {
    Leaf,
    Const,
    MatmulNN,   // y = a * b
    MatmulNT,   // y = a * b^T
    ConvA,      // y = conv_analysis(x, k, stride)
    ConvS,      // y = conv_synthesis(w, k, stride, h, w)
    Add,
    Sub,
    ScaleC,     // y = c * x
    VScale,     // y = s * x, s a [1] variable
    SRecip,     // y = 1 / (c * s), s a [1] variable
    ShiftRelu,  // y = max(x - lam_c, 0), lam a per-channel variable
    SoftThr,    // signed soft threshold
    ChanNorm,   // y = s_c * (x - mu_c) * isig_c + o_c; mu, isig constants
    ColScale,   // y[r][c] = b[r][c] * a[c]
    KernScale,  // y[co][...] = k[co][...] * a[co]
    Gap,        // global average pool [N,C,H,W] -> [N,C]
    MeanAll,    // scalar mean of all entries
    SumAll,
    SumSq,      // sum of squares
    CrossEntropy,  // mean softmax cross-entropy, labels constant
    VMulC,      // y = v .* cvec (cvec constant)
    Reshape,
};

struct Var {
    std::int32_t id = -1;
    bool valid() const { return id >= 0; }
};

// Append-only computation tape. Forward values are computed eagerly through
// dp::ops, so tape-built math is bit-identical to plain tensor math. Nodes
// only reference earlier nodes, which makes the graph acyclic by
// construction; backward() is a single reverse sweep in insertion order, so
// gradient accumulation is deterministic.
class Tape {
  public:
    Var leaf(Tensor v, bool requires_grad = true);
    Var constant(Tensor v);

    Var matmul_nn(Var a, Var b);
    Var matmul_nt(Var a, Var b);
    Var conv_analysis(Var x, Var k, int stride);
    Var conv_synthesis(Var w, Var k, int stride, std::size_t h, std::size_t wd);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var x, double c);
    Var vscale(Var x, Var s);
    Var srecip(Var s, double c);
    Var shift_relu(Var x, Var lam);
    Var soft_threshold(Var x, Var lam);
    Var channel_norm(Var x, Var s, Var o, const Tensor& mu,
                     const Tensor& inv_sigma);
    Var col_scale(Var b, Var a);
    Var kernel_scale(Var k, Var a);
    Var global_avg_pool(Var x);
    Var mean_all(Var x);
    Var sum_all(Var x);
    Var sum_sq(Var x);
    Var cross_entropy(Var logits, const std::vector<int>& labels);
    Var vmulc(Var v, const Tensor& c);
    Var reshape(Var x, std::vector<std::size_t> shape);

    const Tensor& value(Var v) const;
    // Gradient of the last backward() root with respect to v.
    const Tensor& grad(Var v) const;

    // Reverse sweep from a scalar root. Rebuilds zeroed accumulators each
    // call, so repeated invocations are bit-identical.
    void backward(Var root);

    // Smallest distance of any threshold pre-activation from its kink seen
    // since the last reset; used by grad_check to avoid differentiating
    // across the soft-threshold corner.
    double kink_margin() const { return kink_margin_; }
    void reset_kink_margin() {
        kink_margin_ = std::numeric_limits<double>::infinity();
    }

    // Structural hash of the op sequence and per-sample shapes (the batch
    // extent is ignored). Used for the white-box attack/eval consistency
    // assertion.
    std::uint64_t fingerprint() const;

    std::size_t node_count() const { return nodes_.size(); }

  private:
    struct Node {
        OpKind op;
        std::array<std::int32_t, 3> in{-1, -1, -1};
        Tensor value;
        Tensor aux;   // mu / labels / cvec
        Tensor aux2;  // inv_sigma
        double c = 0.0;
        int i0 = 0;
        int i1 = 0;
        bool requires_grad = true;
    };

    Var push(Node n);
    const Node& node(Var v) const;
    void backward_node(std::size_t i, std::vector<Tensor>& grads,
                       const std::vector<char>& reach);
    void accumulate(std::vector<Tensor>& grads, const std::vector<char>& reach,
                    std::int32_t target, const Tensor& contribution);

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
    double kink_margin_ = std::numeric_limits<double>::infinity();
};

// Max over coordinates of |analytic - central difference| / max(1,
// |analytic|). Coordinates whose +-h evaluations land within 10h of a
// threshold kink are skipped and reported.
struct GradCheckResult {
    double max_rel_err = 0.0;
    std::vector<std::size_t> skipped;
};

GradCheckResult grad_check(
    const std::function<Var(Tape&, Var)>& build_scalar_graph,
    const Tensor& theta, double h);

}  // namespace dp::autodiff
