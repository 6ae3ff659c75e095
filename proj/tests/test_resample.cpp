#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/resample.hpp"
#include "core/rng.hpp"

using namespace bvoc;

namespace {

// Independent Keys kernel, written from the piecewise definition rather
// than the production Horner form.
double keys(double x, double a)
{
    const double ax = std::fabs(x);
    if (ax <= 1.0)
        return (a + 2.0) * ax * ax * ax - (a + 3.0) * ax * ax + 1.0;
    if (ax < 2.0)
        return a * ax * ax * ax - 5.0 * a * ax * ax + 8.0 * a * ax - 4.0 * a;
    return 0.0;
}

std::vector<double> axis_weights(double scale, size_t i, bool antialias, double a,
                                 int& first)
{
    const double src = (static_cast<double>(i) + 0.5) / scale - 0.5;
    if (antialias && scale < 1.0) {
        const double radius = 2.0 / scale;
        const int j0 = static_cast<int>(std::ceil(src - radius));
        const int j1 = static_cast<int>(std::floor(src + radius));
        first = j0;
        std::vector<double> w(static_cast<size_t>(j1 - j0 + 1));
        double sum = 0.0;
        for (int j = j0; j <= j1; ++j) {
            w[static_cast<size_t>(j - j0)] = keys((src - j) * scale, a);
            sum += w[static_cast<size_t>(j - j0)];
        }
        for (double& x : w)
            x /= sum;
        return w;
    }
    const int base = static_cast<int>(std::floor(src));
    first = base - 1;
    std::vector<double> w(4);
    for (int k = 0; k < 4; ++k)
        w[k] = keys(src - static_cast<double>(base - 1 + k), a);
    return w;
}

// Direct 2D weighted summation per output pixel; no separable passes.
Mat oracle_resample(const Mat& in, double factor, bool antialias, double a)
{
    const auto oh = static_cast<size_t>(std::llround(static_cast<double>(in.rows) * factor));
    const auto ow = static_cast<size_t>(std::llround(static_cast<double>(in.cols) * factor));
    const double sy = static_cast<double>(oh) / static_cast<double>(in.rows);
    const double sx = static_cast<double>(ow) / static_cast<double>(in.cols);
    Mat out(oh, ow);
    for (size_t y = 0; y < oh; ++y) {
        int fy = 0;
        const std::vector<double> wy = axis_weights(sy, y, antialias, a, fy);
        for (size_t x = 0; x < ow; ++x) {
            int fx = 0;
            const std::vector<double> wx = axis_weights(sx, x, antialias, a, fx);
            double acc = 0.0;
            for (size_t ky = 0; ky < wy.size(); ++ky) {
                const int iy = std::clamp(fy + static_cast<int>(ky), 0,
                                          static_cast<int>(in.rows) - 1);
                for (size_t kx = 0; kx < wx.size(); ++kx) {
                    const int ix = std::clamp(fx + static_cast<int>(kx), 0,
                                              static_cast<int>(in.cols) - 1);
                    acc += wy[ky] * wx[kx] *
                           in.at(static_cast<size_t>(iy), static_cast<size_t>(ix));
                }
            }
            out.at(y, x) = acc;
        }
    }
    return out;
}

Mat random_mat(size_t rows, size_t cols, uint64_t seed)
{
    Rng rng(seed);
    Mat m(rows, cols);
    for (double& x : m.v)
        x = rng.unit();
    return m;
}

double max_abs_diff(const Mat& a, const Mat& b)
{
    REQUIRE(a.same_shape(b));
    double d = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i)
        d = std::max(d, std::fabs(a.v[i] - b.v[i]));
    return d;
}

} // namespace

TEST_CASE("cubic kernel anchor values")
{
    for (const double a : {-0.5, -0.75}) {
        CHECK(cubic_kernel(0.0, a) == 1.0);
        CHECK(cubic_kernel(1.0, a) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(cubic_kernel(-1.0, a) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(cubic_kernel(2.0, a) == 0.0);
        CHECK(cubic_kernel(2.5, a) == 0.0);
        CHECK(cubic_kernel(0.7, a) == cubic_kernel(-0.7, a));
    }
    CHECK(cubic_kernel(0.5, -0.5) == doctest::Approx(0.5625).epsilon(1e-15));
}

TEST_CASE("separable output matches the direct summation oracle")
{
    const std::pair<size_t, size_t> sizes[] = {{5, 7}, {8, 8}, {16, 12}, {32, 32}};
    const double factors[] = {0.25, 0.5, 2.0, 4.0};
    uint64_t seed = 41;
    for (const auto& [rows, cols] : sizes) {
        for (const double f : factors) {
            if (static_cast<double>(rows) * f < 1 || static_cast<double>(cols) * f < 1)
                continue;
            const Mat in = random_mat(rows, cols, ++seed);
            for (const bool aa : {false, true}) {
                ResampleSpec spec;
                spec.factor = f;
                spec.antialias = aa;
                const Mat got = bicubic_resample(in, spec);
                const Mat want = oracle_resample(in, f, aa, spec.kernel_a);
                CHECK(max_abs_diff(got, want) < 1e-12);
            }
        }
    }
}

TEST_CASE("constants are preserved within 1e-12")
{
    const Mat in(9, 13, 3.75);
    for (const double f : {0.25, 0.5, 2.0, 4.0}) {
        for (const bool aa : {false, true}) {
            ResampleSpec spec;
            spec.factor = f;
            spec.antialias = aa;
            const Mat out = bicubic_resample(in, spec);
            for (const double x : out.v)
                CHECK(std::fabs(x - 3.75) < 1e-12);
        }
    }
}

TEST_CASE("linear ramps are reproduced exactly away from the borders")
{
    Mat in(6, 16);
    for (size_t y = 0; y < in.rows; ++y)
        for (size_t x = 0; x < in.cols; ++x)
            in.at(y, x) = static_cast<double>(x);

    ResampleSpec spec;
    spec.factor = 2.0;
    const Mat out = bicubic_resample(in, spec);
    REQUIRE(out.cols == 32);
    // pixel-center alignment maps output x to input coordinate (x+0.5)/2-0.5
    for (size_t x = 4; x < out.cols - 4; ++x) {
        const double want = (static_cast<double>(x) + 0.5) / 2.0 - 0.5;
        CHECK(out.at(3, x) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("axis passes commute")
{
    const Mat in = random_mat(12, 10, 99);
    ResampleSpec spec;
    spec.factor = 2.0;
    const Mat hv = resample_vertical(resample_horizontal(in, 20, spec), 24, spec);
    const Mat vh = resample_horizontal(resample_vertical(in, 24, spec), 20, spec);
    CHECK(max_abs_diff(hv, vh) < 1e-12);
}

TEST_CASE("downsample then upsample keeps an all-zero grid zero")
{
    const Mat zero(16, 16);
    ResampleSpec down;
    down.factor = 0.25;
    ResampleSpec up;
    up.factor = 4.0;
    const Mat out = bicubic_resample(bicubic_resample(zero, down), up);
    for (const double x : out.v)
        CHECK(x == 0.0);
}

TEST_CASE("upsampling can overshoot; clamp_non_negative floors it")
{
    // a sharp step drives the cubic lobes negative next to the edge
    Mat in(1, 8);
    for (size_t x = 4; x < 8; ++x)
        in.at(0, x) = 1.0;
    ResampleSpec spec;
    spec.factor = 4.0;
    const Mat out = bicubic_resample(in, spec);
    const double lowest = *std::min_element(out.v.begin(), out.v.end());
    CHECK(lowest < 0.0);
    const Mat floored = clamp_non_negative(out);
    CHECK(*std::min_element(floored.v.begin(), floored.v.end()) == 0.0);
    for (size_t i = 0; i < out.v.size(); ++i)
        CHECK(floored.v[i] == std::max(out.v[i], 0.0));
}

TEST_CASE("invalid resample arguments")
{
    ResampleSpec spec;
    spec.factor = 0.0;
    CHECK_THROWS_AS(bicubic_resample(Mat(4, 4, 1.0), spec), DomainError);
    spec.factor = -2.0;
    CHECK_THROWS_AS(bicubic_resample(Mat(4, 4, 1.0), spec), DomainError);
    spec.factor = 0.1;
    CHECK_THROWS_AS(bicubic_resample(Mat(4, 4, 1.0), spec), DomainError);
    spec.factor = 2.0;
    CHECK_THROWS_AS(bicubic_resample(Mat(), spec), DomainError);
}
