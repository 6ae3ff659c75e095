#include "core/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/errors.hpp"

namespace bvoc {

double cubic_kernel(double x, double a)
{
    x = std::abs(x);
    if (x <= 1.0)
        return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0)
        return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
}

namespace {

struct Tap {
    int first = 0;
    std::vector<double> weights;
};

// Taps and weights for one output coordinate along an axis.
// Pixel-center alignment: output center i+0.5 maps to input (i+0.5)/scale.
Tap taps_for(double scale, size_t i, const ResampleSpec& spec)
{
    const double src = (static_cast<double>(i) + 0.5) / scale - 0.5;
    Tap tap;
    if (spec.antialias && scale < 1.0) {
        const double radius = 2.0 / scale;
        const int j0 = static_cast<int>(std::ceil(src - radius));
        const int j1 = static_cast<int>(std::floor(src + radius));
        tap.first = j0;
        tap.weights.resize(static_cast<size_t>(j1 - j0 + 1));
        double sum = 0.0;
        for (int j = j0; j <= j1; ++j) {
            const double w = cubic_kernel((src - j) * scale, spec.kernel_a);
            tap.weights[static_cast<size_t>(j - j0)] = w;
            sum += w;
        }
        for (double& w : tap.weights)
            w /= sum;
    } else {
        const int base = static_cast<int>(std::floor(src));
        tap.first = base - 1;
        tap.weights.resize(4);
        for (int k = 0; k < 4; ++k)
            tap.weights[static_cast<size_t>(k)] =
                cubic_kernel(src - (base - 1 + k), spec.kernel_a);
    }
    return tap;
}

size_t out_extent(size_t n, double factor)
{
    const auto m = std::llround(static_cast<double>(n) * factor);
    if (m < 1)
        throw DomainError("resample output dimension < 1");
    return static_cast<size_t>(m);
}

} // namespace

Mat resample_horizontal(const Mat& in, size_t out_cols, const ResampleSpec& spec)
{
    const double scale = static_cast<double>(out_cols) / static_cast<double>(in.cols);
    std::vector<Tap> taps(out_cols);
    for (size_t x = 0; x < out_cols; ++x)
        taps[x] = taps_for(scale, x, spec);

    Mat out(in.rows, out_cols);
    const int last = static_cast<int>(in.cols) - 1;
    for (size_t y = 0; y < in.rows; ++y) {
        const double* row = &in.v[y * in.cols];
        for (size_t x = 0; x < out_cols; ++x) {
            const Tap& t = taps[x];
            double acc = 0.0;
            for (size_t k = 0; k < t.weights.size(); ++k) {
                const int j = std::clamp(t.first + static_cast<int>(k), 0, last);
                acc += t.weights[k] * row[j];
            }
            out.at(y, x) = acc;
        }
    }
    return out;
}

Mat resample_vertical(const Mat& in, size_t out_rows, const ResampleSpec& spec)
{
    const double scale = static_cast<double>(out_rows) / static_cast<double>(in.rows);
    std::vector<Tap> taps(out_rows);
    for (size_t y = 0; y < out_rows; ++y)
        taps[y] = taps_for(scale, y, spec);

    Mat out(out_rows, in.cols);
    const int last = static_cast<int>(in.rows) - 1;
    for (size_t y = 0; y < out_rows; ++y) {
        const Tap& t = taps[y];
        double* dst = &out.v[y * in.cols];
        for (size_t x = 0; x < in.cols; ++x)
            dst[x] = 0.0;
        for (size_t k = 0; k < t.weights.size(); ++k) {
            const int j = std::clamp(t.first + static_cast<int>(k), 0, last);
            const double w = t.weights[k];
            const double* src = &in.v[static_cast<size_t>(j) * in.cols];
            for (size_t x = 0; x < in.cols; ++x)
                dst[x] += w * src[x];
        }
    }
    return out;
}

Mat bicubic_resample(const Mat& in, const ResampleSpec& spec)
{
    if (in.rows < 1 || in.cols < 1)
        throw DomainError("resample input dimension < 1");
    if (!(spec.factor > 0.0))
        throw DomainError("resample factor must be positive");
    const size_t out_rows = out_extent(in.rows, spec.factor);
    const size_t out_cols = out_extent(in.cols, spec.factor);
    return resample_vertical(resample_horizontal(in, out_cols, spec), out_rows, spec);
}

Mat clamp_non_negative(Mat in)
{
    for (double& x : in.v)
        x = std::max(x, 0.0);
    return in;
}

} // namespace bvoc
