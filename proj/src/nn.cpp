#include "cass/nn.hpp"

#include <cmath>

#include "cass/errors.hpp"

namespace cass {

Conv2d::Conv2d(int in_c, int out_c, int s, const std::string& name)
    : in_ch(in_c), out_ch(out_c), stride(s), weight(name + ".weight"), bias(name + ".bias") {
    if (in_c <= 0 || out_c <= 0) throw ArgumentError("conv: channel counts must be positive");
    if (s != 1 && s != 2) throw ArgumentError("conv: stride must be 1 or 2");
    weight.init_shape({out_ch, in_ch, 3, 3});
    bias.init_shape({out_ch});
}

void Conv2d::init(Rng& rng) {
    const double scale = std::sqrt(2.0 / (in_ch * 9.0));
    for (double& w : weight.value.v) w = scale * rng.normal();
    bias.value.fill(0.0);
}

Tensor Conv2d::forward(const Tensor& x) const {
    if (x.shape.size() != 3 || x.shape[0] != in_ch)
        throw ArgumentError("conv: input must be [in_ch, h, w]");
    const int h = x.shape[1], w = x.shape[2];
    const int oh = out_side(h, stride), ow = out_side(w, stride);
    Tensor y;
    y.shape = {out_ch, oh, ow};
    y.v.assign(static_cast<size_t>(out_ch) * oh * ow, 0.0);
    for (int oc = 0; oc < out_ch; ++oc) {
        double* yp = &y.v[static_cast<size_t>(oc) * oh * ow];
        const double b = bias.value.v[oc];
        for (int i = 0; i < oh; ++i) {
            for (int j = 0; j < ow; ++j) {
                double acc = b;
                for (int ic = 0; ic < in_ch; ++ic) {
                    const double* xc = &x.v[static_cast<size_t>(ic) * h * w];
                    const double* wk = &weight.value.v[((static_cast<size_t>(oc) * in_ch + ic) * 9)];
                    for (int kh = 0; kh < 3; ++kh) {
                        const int ih = i * stride - 1 + kh;
                        if (ih < 0 || ih >= h) continue;
                        const double* xrow = xc + static_cast<size_t>(ih) * w;
                        for (int kw = 0; kw < 3; ++kw) {
                            const int iw = j * stride - 1 + kw;
                            if (iw < 0 || iw >= w) continue;
                            acc += wk[kh * 3 + kw] * xrow[iw];
                        }
                    }
                }
                yp[static_cast<size_t>(i) * ow + j] = acc;
            }
        }
    }
    return y;
}

void Conv2d::backward(const Tensor& x, const Tensor& dy, Tensor* dx, bool accumulate) {
    const int h = x.shape[1], w = x.shape[2];
    const int oh = out_side(h, stride), ow = out_side(w, stride);
    if (dy.shape != std::vector<int>{out_ch, oh, ow})
        throw ArgumentError("conv backward: gradient shape mismatch");
    if (dx) {
        dx->shape = x.shape;
        dx->v.assign(x.v.size(), 0.0);
    }
    for (int oc = 0; oc < out_ch; ++oc) {
        const double* dyp = &dy.v[static_cast<size_t>(oc) * oh * ow];
        double bacc = 0.0;
        for (int i = 0; i < oh; ++i) {
            for (int j = 0; j < ow; ++j) {
                const double g = dyp[static_cast<size_t>(i) * ow + j];
                if (g == 0.0) continue;
                bacc += g;
                for (int ic = 0; ic < in_ch; ++ic) {
                    const double* xc = &x.v[static_cast<size_t>(ic) * h * w];
                    const size_t wbase = (static_cast<size_t>(oc) * in_ch + ic) * 9;
                    for (int kh = 0; kh < 3; ++kh) {
                        const int ih = i * stride - 1 + kh;
                        if (ih < 0 || ih >= h) continue;
                        for (int kw = 0; kw < 3; ++kw) {
                            const int iw = j * stride - 1 + kw;
                            if (iw < 0 || iw >= w) continue;
                            const size_t xi = static_cast<size_t>(ih) * w + iw;
                            if (accumulate) weight.grad.v[wbase + kh * 3 + kw] += g * xc[xi];
                            if (dx)
                                dx->v[static_cast<size_t>(ic) * h * w + xi] +=
                                    g * weight.value.v[wbase + kh * 3 + kw];
                        }
                    }
                }
            }
        }
        if (accumulate) bias.grad.v[oc] += bacc;
    }
}

Dense::Dense(int in_d, int out_d, const std::string& name)
    : in_dim(in_d), out_dim(out_d), weight(name + ".weight"), bias(name + ".bias") {
    if (in_d <= 0 || out_d <= 0) throw ArgumentError("dense: dimensions must be positive");
    weight.init_shape({out_dim, in_dim});
    bias.init_shape({out_dim});
}

void Dense::init(Rng& rng) {
    const double scale = std::sqrt(2.0 / in_dim);
    for (double& w : weight.value.v) w = scale * rng.normal();
    bias.value.fill(0.0);
}

Tensor Dense::forward(const Tensor& x) const {
    if (static_cast<int>(x.v.size()) != in_dim)
        throw ArgumentError("dense: input size mismatch");
    Tensor y;
    y.shape = {out_dim};
    y.v.resize(out_dim);
    for (int o = 0; o < out_dim; ++o) {
        const double* wr = &weight.value.v[static_cast<size_t>(o) * in_dim];
        double acc = bias.value.v[o];
        for (int i = 0; i < in_dim; ++i) acc += wr[i] * x.v[i];
        y.v[o] = acc;
    }
    return y;
}

void Dense::backward(const Tensor& x, const Tensor& dy, Tensor* dx, bool accumulate) {
    if (static_cast<int>(dy.v.size()) != out_dim)
        throw ArgumentError("dense backward: gradient size mismatch");
    if (dx) {
        dx->shape = x.shape;
        dx->v.assign(x.v.size(), 0.0);
    }
    for (int o = 0; o < out_dim; ++o) {
        const double g = dy.v[o];
        if (g == 0.0) continue;
        if (accumulate) {
            bias.grad.v[o] += g;
            double* wg = &weight.grad.v[static_cast<size_t>(o) * in_dim];
            for (int i = 0; i < in_dim; ++i) wg[i] += g * x.v[i];
        }
        if (dx) {
            const double* wr = &weight.value.v[static_cast<size_t>(o) * in_dim];
            for (int i = 0; i < in_dim; ++i) dx->v[i] += g * wr[i];
        }
    }
}

Tensor relu(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.v)
        if (v < 0.0) v = 0.0;
    return y;
}

Tensor relu_backward(const Tensor& y, const Tensor& dy) {
    Tensor dx = dy;
    for (size_t i = 0; i < dx.v.size(); ++i)
        if (y.v[i] <= 0.0) dx.v[i] = 0.0;
    return dx;
}

Tensor softplus(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.v) v = v > 30.0 ? v : std::log1p(std::exp(v));
    return y;
}

Tensor softplus_backward(const Tensor& y, const Tensor& dy) {
    Tensor dx = dy;
    // d softplus/dx = sigmoid(x) = 1 - exp(-y) since y = log(1 + exp(x)).
    for (size_t i = 0; i < dx.v.size(); ++i) dx.v[i] *= 1.0 - std::exp(-y.v[i]);
    return dx;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Tensor upsample_nearest(const Tensor& x, int out_h, int out_w) {
    if (x.shape.size() != 3) throw ArgumentError("upsample: input must be [c, h, w]");
    const int c = x.shape[0], h = x.shape[1], w = x.shape[2];
    if (out_h < h || out_w < w) throw ArgumentError("upsample: target smaller than input");
    Tensor y;
    y.shape = {c, out_h, out_w};
    y.v.resize(static_cast<size_t>(c) * out_h * out_w);
    for (int ch = 0; ch < c; ++ch) {
        const double* xc = &x.v[static_cast<size_t>(ch) * h * w];
        double* yc = &y.v[static_cast<size_t>(ch) * out_h * out_w];
        for (int i = 0; i < out_h; ++i) {
            const int si = static_cast<int>(static_cast<long>(i) * h / out_h);
            for (int j = 0; j < out_w; ++j) {
                const int sj = static_cast<int>(static_cast<long>(j) * w / out_w);
                yc[static_cast<size_t>(i) * out_w + j] = xc[static_cast<size_t>(si) * w + sj];
            }
        }
    }
    return y;
}

Tensor upsample_nearest_backward(const Tensor& dy, int in_h, int in_w) {
    const int c = dy.shape[0], out_h = dy.shape[1], out_w = dy.shape[2];
    Tensor dx;
    dx.shape = {c, in_h, in_w};
    dx.v.assign(static_cast<size_t>(c) * in_h * in_w, 0.0);
    for (int ch = 0; ch < c; ++ch) {
        const double* gyc = &dy.v[static_cast<size_t>(ch) * out_h * out_w];
        double* gxc = &dx.v[static_cast<size_t>(ch) * in_h * in_w];
        for (int i = 0; i < out_h; ++i) {
            const int si = static_cast<int>(static_cast<long>(i) * in_h / out_h);
            for (int j = 0; j < out_w; ++j) {
                const int sj = static_cast<int>(static_cast<long>(j) * in_w / out_w);
                gxc[static_cast<size_t>(si) * in_w + sj] += gyc[static_cast<size_t>(i) * out_w + j];
            }
        }
    }
    return dx;
}

Tensor shortcut_project(const Tensor& x, int out_ch, int stride) {
    const int c = x.shape[0], h = x.shape[1], w = x.shape[2];
    const int oh = Conv2d::out_side(h, stride), ow = Conv2d::out_side(w, stride);
    Tensor y;
    y.shape = {out_ch, oh, ow};
    y.v.assign(static_cast<size_t>(out_ch) * oh * ow, 0.0);
    const int copy_ch = std::min(c, out_ch);
    for (int ch = 0; ch < copy_ch; ++ch) {
        const double* xc = &x.v[static_cast<size_t>(ch) * h * w];
        double* yc = &y.v[static_cast<size_t>(ch) * oh * ow];
        for (int i = 0; i < oh; ++i)
            for (int j = 0; j < ow; ++j)
                yc[static_cast<size_t>(i) * ow + j] =
                    xc[static_cast<size_t>(i) * stride * w + static_cast<size_t>(j) * stride];
    }
    return y;
}

Tensor shortcut_project_backward(const Tensor& dy, const std::vector<int>& in_shape, int stride) {
    const int c = in_shape[0], h = in_shape[1], w = in_shape[2];
    const int out_ch = dy.shape[0], oh = dy.shape[1], ow = dy.shape[2];
    Tensor dx(in_shape);
    const int copy_ch = std::min(c, out_ch);
    for (int ch = 0; ch < copy_ch; ++ch) {
        const double* gyc = &dy.v[static_cast<size_t>(ch) * oh * ow];
        double* gxc = &dx.v[static_cast<size_t>(ch) * h * w];
        for (int i = 0; i < oh; ++i)
            for (int j = 0; j < ow; ++j)
                gxc[static_cast<size_t>(i) * stride * w + static_cast<size_t>(j) * stride] +=
                    gyc[static_cast<size_t>(i) * ow + j];
    }
    return dx;
}

ResBlock::ResBlock(int in_c, int out_c, int stride, const std::string& name)
    : conv1(in_c, out_c, stride, name + ".conv1"), conv2(out_c, out_c, 1, name + ".conv2") {}

void ResBlock::init(Rng& rng) {
    conv1.init(rng);
    conv2.init(rng);
}

Tensor ResBlock::forward(const Tensor& x, ResBlockActs* acts) const {
    Tensor h = relu(conv1.forward(x));
    Tensor pre = conv2.forward(h);
    Tensor sc = shortcut_project(x, conv1.out_ch, conv1.stride);
    for (size_t i = 0; i < pre.v.size(); ++i) pre.v[i] += sc.v[i];
    Tensor out = relu(pre);
    if (acts) {
        acts->x = x;
        acts->h = std::move(h);
        acts->out = out;
    }
    return out;
}

Tensor ResBlock::backward(const ResBlockActs& acts, const Tensor& d_out, bool accumulate) {
    Tensor d_pre = relu_backward(acts.out, d_out);
    Tensor dh;
    conv2.backward(acts.h, d_pre, &dh, accumulate);
    dh = relu_backward(acts.h, dh);
    Tensor dx;
    conv1.backward(acts.x, dh, &dx, accumulate);
    Tensor dsc = shortcut_project_backward(d_pre, acts.x.shape, conv1.stride);
    for (size_t i = 0; i < dx.v.size(); ++i) dx.v[i] += dsc.v[i];
    return dx;
}

} // namespace cass
