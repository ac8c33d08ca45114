#pragma once

#include <string>
#include <vector>

#include "cass/rng.hpp"
#include "cass/tensor.hpp"

namespace cass {

// A trainable tensor plus its gradient accumulator. Gradients are summed into
// `grad` by the backward passes; optimizers consume and the caller zeroes.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;

    explicit Param(std::string n = {}) : name(std::move(n)) {}
    void init_shape(std::vector<int> shape) {
        value = Tensor(std::move(shape));
        grad = zeros_like(value);
    }
    void zero_grad() { grad.fill(0.0); }
    size_t size() const { return value.v.size(); }
};

// 3x3 convolution, padding 1, stride 1 or 2, on [C,H,W] tensors.
struct Conv2d {
    int in_ch = 0, out_ch = 0, stride = 1;
    Param weight; // [out_ch, in_ch, 3, 3]
    Param bias;   // [out_ch]

    Conv2d() = default;
    Conv2d(int in_c, int out_c, int s, const std::string& name);

    void init(Rng& rng); // normal(0, sqrt(2/fan_in)) weights, zero bias
    static int out_side(int n, int stride) { return (n - 1) / stride + 1; }

    Tensor forward(const Tensor& x) const;
    // Accumulates weight/bias gradients when accumulate is true; writes the
    // input gradient into *dx when dx is non-null.
    void backward(const Tensor& x, const Tensor& dy, Tensor* dx, bool accumulate);
};

// Fully connected layer on flattened input.
struct Dense {
    int in_dim = 0, out_dim = 0;
    Param weight; // [out_dim, in_dim]
    Param bias;   // [out_dim]

    Dense() = default;
    Dense(int in_d, int out_d, const std::string& name);

    void init(Rng& rng);
    Tensor forward(const Tensor& x) const;
    void backward(const Tensor& x, const Tensor& dy, Tensor* dx, bool accumulate);
};

// Elementwise activations. Backward passes take the forward *output* so the
// caller need not keep the pre-activation around.
Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& y, const Tensor& dy);
Tensor softplus(const Tensor& x);
Tensor softplus_backward(const Tensor& y, const Tensor& dy);
double sigmoid(double z);

// Probabilities are clamped away from {0, 1} so log terms stay finite.
inline constexpr double kProbEps = 1e-7;
inline double clamp_prob(double p) {
    if (p < kProbEps) return kProbEps;
    if (p > 1.0 - kProbEps) return 1.0 - kProbEps;
    return p;
}

// Nearest-neighbour resize of [C,H,W] to an explicit [C,out_h,out_w].
Tensor upsample_nearest(const Tensor& x, int out_h, int out_w);
Tensor upsample_nearest_backward(const Tensor& dy, int in_h, int in_w);

// Parameter-free shortcut: spatial subsampling by `stride` with channel
// zero-padding or truncation to out_ch.
Tensor shortcut_project(const Tensor& x, int out_ch, int stride);
Tensor shortcut_project_backward(const Tensor& dy, const std::vector<int>& in_shape, int stride);

// Residual block: out = relu(conv2(relu(conv1(x))) + shortcut(x)).
// conv1 carries the stride (and any channel change); conv2 is stride 1.
struct ResBlockActs {
    Tensor x;   // block input
    Tensor h;   // relu(conv1(x))
    Tensor out; // block output
};

struct ResBlock {
    Conv2d conv1, conv2;

    ResBlock() = default;
    ResBlock(int in_c, int out_c, int stride, const std::string& name);

    void init(Rng& rng);
    Tensor forward(const Tensor& x, ResBlockActs* acts) const;
    // Returns the input gradient.
    Tensor backward(const ResBlockActs& acts, const Tensor& d_out, bool accumulate);
};

} // namespace cass
