#pragma once

#include <cstddef>
#include <vector>

#include "core/mat.hpp"

namespace bvoc {

/// Dense NCHW tensor of doubles. All layer ops below run on these.
struct Tensor4 {
    size_t n = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor4() = default;
    Tensor4(size_t n_, size_t c_, size_t h_, size_t w_, double fill = 0.0)
      : n(n_), c(c_), h(h_), w(w_), v(n_ * c_ * h_ * w_, fill)
    {
    }

    size_t size() const { return v.size(); }

    double& at(size_t i, size_t j, size_t y, size_t x)
    {
        return v[((i * c + j) * h + y) * w + x];
    }
    double at(size_t i, size_t j, size_t y, size_t x) const
    {
        return v[((i * c + j) * h + y) * w + x];
    }

    double* row(size_t i, size_t j, size_t y) { return &v[((i * c + j) * h + y) * w]; }
    const double* row(size_t i, size_t j, size_t y) const
    {
        return &v[((i * c + j) * h + y) * w];
    }

    bool same_shape(const Tensor4& o) const
    {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    bool operator==(const Tensor4& o) const = default;
};

/// 2D convolution, stride 1, zero padding kh/2 x kw/2 (spatial dims are
/// preserved for odd kernels). weight is (out_ch, in_ch, kh, kw).
Tensor4 conv2d_forward(const Tensor4& x, const Tensor4& weight,
                       const std::vector<double>& bias);

/// Gradients of conv2d. grad_x/grad_w/grad_bias are resized and overwritten.
void conv2d_backward(const Tensor4& x, const Tensor4& weight, const Tensor4& grad_out,
                     Tensor4& grad_x, Tensor4& grad_w, std::vector<double>& grad_bias);

/// Subgradient at exactly 0 is 0 for both activations.
Tensor4 relu_forward(const Tensor4& x);
Tensor4 relu_backward(const Tensor4& x, const Tensor4& grad_out);

/// PReLU with one learnable slope per channel; slope.size() must equal x.c.
/// Backward accumulates into grad_slope.
Tensor4 prelu_forward(const Tensor4& x, const std::vector<double>& slope);
Tensor4 prelu_backward(const Tensor4& x, const std::vector<double>& slope,
                       const Tensor4& grad_out, std::vector<double>& grad_slope);

/// Rearranges (n, c*r^2, h, w) into (n, c, h*r, w*r); out-channel j reads
/// from in-channel j*r^2 + dy*r + dx. Backward is the inverse permutation.
Tensor4 pixel_shuffle_forward(const Tensor4& x, size_t r);
Tensor4 pixel_shuffle_backward(const Tensor4& grad_out, size_t r);

Tensor4 add(const Tensor4& a, const Tensor4& b);

double mse_loss(const Tensor4& pred, const Tensor4& target);
Tensor4 mse_loss_backward(const Tensor4& pred, const Tensor4& target);

/// Single-sample single-channel bridges to the Mat world.
Tensor4 tensor_from_mats(const std::vector<Mat>& mats);
Mat mat_from_tensor(const Tensor4& t, size_t sample);

} // namespace bvoc
