#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace bvoc {

namespace {

void check_conv_shapes(const Tensor4& x, const Tensor4& weight,
                       const std::vector<double>& bias)
{
    if (x.c != weight.c)
        throw ShapeError("conv2d input channels do not match weight");
    if (bias.size() != weight.n)
        throw ShapeError("conv2d bias length does not match output channels");
    if (weight.h == 0 || weight.w == 0 || weight.h % 2 == 0 || weight.w % 2 == 0)
        throw ShapeError("conv2d kernel dims must be odd");
    if (x.h < 1 || x.w < 1)
        throw ShapeError("conv2d input is empty");
}

// Output index range [lo, hi) for which index + off stays inside [0, extent).
// Empty (lo == hi) when the tap falls entirely outside, as with kernels
// wider than the input.
struct TapRange {
    size_t lo, hi;
    TapRange(ptrdiff_t off, size_t extent)
    {
        lo = off < 0 ? std::min(static_cast<size_t>(-off), extent) : 0;
        hi = off > 0 ? (static_cast<size_t>(off) >= extent ? 0 : extent - static_cast<size_t>(off))
                     : extent;
        hi = std::max(hi, lo);
    }
};

} // namespace

Tensor4 conv2d_forward(const Tensor4& x, const Tensor4& weight,
                       const std::vector<double>& bias)
{
    check_conv_shapes(x, weight, bias);
    const size_t kh = weight.h, kw = weight.w;
    const size_t ph = kh / 2, pw = kw / 2;
    Tensor4 out(x.n, weight.n, x.h, x.w);

    for (size_t n = 0; n < x.n; ++n)
        for (size_t oc = 0; oc < weight.n; ++oc) {
            for (size_t y = 0; y < x.h; ++y) {
                double* orow = out.row(n, oc, y);
                std::fill(orow, orow + x.w, bias[oc]);
            }
            for (size_t ic = 0; ic < x.c; ++ic)
                for (size_t ky = 0; ky < kh; ++ky)
                    for (size_t kx = 0; kx < kw; ++kx) {
                        const double wv = weight.at(oc, ic, ky, kx);
                        if (wv == 0.0)
                            continue;
                        const auto dy = static_cast<ptrdiff_t>(ky) - static_cast<ptrdiff_t>(ph);
                        const auto dx = static_cast<ptrdiff_t>(kx) - static_cast<ptrdiff_t>(pw);
                        const TapRange ry(dy, x.h), rx(dx, x.w);
                        for (size_t y = ry.lo; y < ry.hi; ++y) {
                            double* orow = out.row(n, oc, y) + rx.lo;
                            const double* irow =
                                x.row(n, ic, static_cast<size_t>(static_cast<ptrdiff_t>(y) + dy)) +
                                static_cast<ptrdiff_t>(rx.lo) + dx;
                            const size_t len = rx.hi - rx.lo;
                            for (size_t t = 0; t < len; ++t)
                                orow[t] += wv * irow[t];
                        }
                    }
        }
    return out;
}

void conv2d_backward(const Tensor4& x, const Tensor4& weight, const Tensor4& grad_out,
                     Tensor4& grad_x, Tensor4& grad_w, std::vector<double>& grad_bias)
{
    if (grad_out.n != x.n || grad_out.c != weight.n || grad_out.h != x.h ||
        grad_out.w != x.w)
        throw ShapeError("conv2d grad_out shape does not match forward output");
    const size_t kh = weight.h, kw = weight.w;
    const size_t ph = kh / 2, pw = kw / 2;

    grad_x = Tensor4(x.n, x.c, x.h, x.w);
    grad_w = Tensor4(weight.n, weight.c, weight.h, weight.w);
    grad_bias.assign(weight.n, 0.0);

    for (size_t n = 0; n < x.n; ++n)
        for (size_t oc = 0; oc < weight.n; ++oc) {
            double bacc = 0.0;
            for (size_t y = 0; y < x.h; ++y) {
                const double* grow = grad_out.row(n, oc, y);
                for (size_t t = 0; t < x.w; ++t)
                    bacc += grow[t];
            }
            grad_bias[oc] += bacc;

            for (size_t ic = 0; ic < x.c; ++ic)
                for (size_t ky = 0; ky < kh; ++ky)
                    for (size_t kx = 0; kx < kw; ++kx) {
                        const auto dy = static_cast<ptrdiff_t>(ky) - static_cast<ptrdiff_t>(ph);
                        const auto dx = static_cast<ptrdiff_t>(kx) - static_cast<ptrdiff_t>(pw);
                        const TapRange ry(dy, x.h), rx(dx, x.w);
                        const double wv = weight.at(oc, ic, ky, kx);
                        double wacc = 0.0;
                        for (size_t y = ry.lo; y < ry.hi; ++y) {
                            const double* grow = grad_out.row(n, oc, y) + rx.lo;
                            const size_t iy = static_cast<size_t>(static_cast<ptrdiff_t>(y) + dy);
                            const double* irow = x.row(n, ic, iy) + static_cast<ptrdiff_t>(rx.lo) + dx;
                            double* gxrow = grad_x.row(n, ic, iy) + static_cast<ptrdiff_t>(rx.lo) + dx;
                            const size_t len = rx.hi - rx.lo;
                            for (size_t t = 0; t < len; ++t) {
                                wacc += grow[t] * irow[t];
                                gxrow[t] += wv * grow[t];
                            }
                        }
                        grad_w.at(oc, ic, ky, kx) += wacc;
                    }
        }
}

Tensor4 relu_forward(const Tensor4& x)
{
    Tensor4 out = x;
    for (double& t : out.v)
        t = t > 0.0 ? t : 0.0;
    return out;
}

Tensor4 relu_backward(const Tensor4& x, const Tensor4& grad_out)
{
    if (!x.same_shape(grad_out))
        throw ShapeError("relu grad shape mismatch");
    Tensor4 gx(x.n, x.c, x.h, x.w);
    for (size_t i = 0; i < x.size(); ++i)
        gx.v[i] = x.v[i] > 0.0 ? grad_out.v[i] : 0.0;
    return gx;
}

Tensor4 prelu_forward(const Tensor4& x, const std::vector<double>& slope)
{
    if (slope.size() != x.c)
        throw ShapeError("prelu slope count does not match channels");
    Tensor4 out = x;
    const size_t plane = x.h * x.w;
    for (size_t n = 0; n < x.n; ++n)
        for (size_t c = 0; c < x.c; ++c) {
            const double a = slope[c];
            double* p = &out.v[(n * x.c + c) * plane];
            for (size_t i = 0; i < plane; ++i)
                p[i] = p[i] > 0.0 ? p[i] : a * p[i];
        }
    return out;
}

Tensor4 prelu_backward(const Tensor4& x, const std::vector<double>& slope,
                       const Tensor4& grad_out, std::vector<double>& grad_slope)
{
    if (!x.same_shape(grad_out))
        throw ShapeError("prelu grad shape mismatch");
    if (slope.size() != x.c || grad_slope.size() != x.c)
        throw ShapeError("prelu slope count does not match channels");
    Tensor4 gx(x.n, x.c, x.h, x.w);
    const size_t plane = x.h * x.w;
    for (size_t n = 0; n < x.n; ++n)
        for (size_t c = 0; c < x.c; ++c) {
            const double a = slope[c];
            const size_t base = (n * x.c + c) * plane;
            double sacc = 0.0;
            for (size_t i = 0; i < plane; ++i) {
                const double xv = x.v[base + i];
                const double g = grad_out.v[base + i];
                if (xv > 0.0) {
                    gx.v[base + i] = g;
                } else if (xv < 0.0) {
                    gx.v[base + i] = a * g;
                    sacc += xv * g;
                } else {
                    gx.v[base + i] = 0.0;
                }
            }
            grad_slope[c] += sacc;
        }
    return gx;
}

Tensor4 pixel_shuffle_forward(const Tensor4& x, size_t r)
{
    if (r < 1)
        throw DomainError("pixel shuffle factor must be positive");
    if (x.c % (r * r) != 0)
        throw ShapeError("pixel shuffle input channels not divisible by r^2");
    Tensor4 out(x.n, x.c / (r * r), x.h * r, x.w * r);
    for (size_t n = 0; n < x.n; ++n)
        for (size_t oc = 0; oc < out.c; ++oc)
            for (size_t y = 0; y < x.h; ++y)
                for (size_t dy = 0; dy < r; ++dy)
                    for (size_t dx = 0; dx < r; ++dx) {
                        const size_t ic = (oc * r + dy) * r + dx;
                        const double* irow = x.row(n, ic, y);
                        double* orow = out.row(n, oc, y * r + dy) + dx;
                        for (size_t t = 0; t < x.w; ++t)
                            orow[t * r] = irow[t];
                    }
    return out;
}

Tensor4 pixel_shuffle_backward(const Tensor4& grad_out, size_t r)
{
    if (r < 1)
        throw DomainError("pixel shuffle factor must be positive");
    if (grad_out.h % r != 0 || grad_out.w % r != 0)
        throw ShapeError("pixel shuffle grad dims not divisible by r");
    Tensor4 gx(grad_out.n, grad_out.c * r * r, grad_out.h / r, grad_out.w / r);
    for (size_t n = 0; n < grad_out.n; ++n)
        for (size_t oc = 0; oc < grad_out.c; ++oc)
            for (size_t y = 0; y < gx.h; ++y)
                for (size_t dy = 0; dy < r; ++dy)
                    for (size_t dx = 0; dx < r; ++dx) {
                        const size_t ic = (oc * r + dy) * r + dx;
                        const double* grow = grad_out.row(n, oc, y * r + dy) + dx;
                        double* gxrow = gx.row(n, ic, y);
                        for (size_t t = 0; t < gx.w; ++t)
                            gxrow[t] = grow[t * r];
                    }
    return gx;
}

Tensor4 add(const Tensor4& a, const Tensor4& b)
{
    if (!a.same_shape(b))
        throw ShapeError("add shape mismatch");
    Tensor4 out = a;
    for (size_t i = 0; i < out.size(); ++i)
        out.v[i] += b.v[i];
    return out;
}

double mse_loss(const Tensor4& pred, const Tensor4& target)
{
    if (!pred.same_shape(target))
        throw ShapeError("mse shape mismatch");
    if (pred.size() == 0)
        throw ShapeError("mse inputs are empty");
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.v[i] - target.v[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

Tensor4 mse_loss_backward(const Tensor4& pred, const Tensor4& target)
{
    if (!pred.same_shape(target))
        throw ShapeError("mse shape mismatch");
    Tensor4 g(pred.n, pred.c, pred.h, pred.w);
    const double scale = 2.0 / static_cast<double>(pred.size());
    for (size_t i = 0; i < pred.size(); ++i)
        g.v[i] = scale * (pred.v[i] - target.v[i]);
    return g;
}

Tensor4 tensor_from_mats(const std::vector<Mat>& mats)
{
    if (mats.empty())
        throw ShapeError("no samples");
    const size_t h = mats[0].rows, w = mats[0].cols;
    Tensor4 out(mats.size(), 1, h, w);
    for (size_t i = 0; i < mats.size(); ++i) {
        if (mats[i].rows != h || mats[i].cols != w)
            throw ShapeError("samples have mixed shapes");
        std::copy(mats[i].v.begin(), mats[i].v.end(), out.v.begin() + i * h * w);
    }
    return out;
}

Mat mat_from_tensor(const Tensor4& t, size_t sample)
{
    if (sample >= t.n || t.c != 1)
        throw ShapeError("expected a single-channel tensor sample");
    Mat out(t.h, t.w);
    std::copy(t.v.begin() + sample * t.h * t.w,
              t.v.begin() + (sample + 1) * t.h * t.w, out.v.begin());
    return out;
}

} // namespace bvoc
