#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"

using namespace bvoc;

namespace {

// Direct per-window reference: full 2D Gaussian weights, one explicit
// summation pass per window position. No separable filtering.
double ssim_direct(const Mat& a, const Mat& b, size_t win, double sigma)
{
    std::vector<double> w(win * win);
    const double center = 0.5 * static_cast<double>(win - 1);
    double wsum = 0.0;
    for (size_t u = 0; u < win; ++u)
        for (size_t v = 0; v < win; ++v) {
            const double du = static_cast<double>(u) - center;
            const double dv = static_cast<double>(v) - center;
            w[u * win + v] = std::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma));
            wsum += w[u * win + v];
        }
    for (double& x : w)
        x /= wsum;

    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    double total = 0.0;
    size_t count = 0;
    for (size_t r = 0; r + win <= a.rows; ++r)
        for (size_t c = 0; c + win <= a.cols; ++c) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (size_t u = 0; u < win; ++u)
                for (size_t v = 0; v < win; ++v) {
                    const double wa = a.at(r + u, c + v);
                    const double wb = b.at(r + u, c + v);
                    const double ww = w[u * win + v];
                    ma += ww * wa;
                    mb += ww * wb;
                    saa += ww * wa * wa;
                    sbb += ww * wb * wb;
                    sab += ww * wa * wb;
                }
            const double va = saa - ma * ma;
            const double vb = sbb - mb * mb;
            const double cov = sab - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++count;
        }
    return total / static_cast<double>(count);
}

Mat random_mat(size_t rows, size_t cols, uint64_t seed)
{
    Mat m(rows, cols);
    Rng rng(seed);
    for (double& x : m.v)
        x = rng.unit();
    return m;
}

} // namespace

TEST_CASE("gaussian window weights")
{
    const auto g = gaussian_kernel_1d(11, 1.5);
    REQUIRE(g.size() == 11);
    double sum = 0.0;
    for (double x : g)
        sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    for (size_t i = 0; i < 5; ++i)
        CHECK(g[i] == g[10 - i]);
    CHECK(g[5] == *std::max_element(g.begin(), g.end()));
    CHECK(g[5] / g[4] == doctest::Approx(std::exp(0.5 / 2.25)).epsilon(1e-12));

    CHECK_THROWS_AS(gaussian_kernel_1d(0, 1.5), DomainError);
    CHECK_THROWS_AS(gaussian_kernel_1d(11, 0.0), DomainError);
    CHECK_THROWS_AS(gaussian_kernel_1d(11, -1.0), DomainError);
}

TEST_CASE("ssim matches a direct windowed computation")
{
    const Mat a16 = random_mat(16, 16, 1);
    Mat b16 = a16;
    {
        Rng noise(2);
        for (double& x : b16.v)
            x = std::clamp(x + 0.1 * (noise.unit() - 0.5), 0.0, 1.0);
    }
    CHECK(std::fabs(ssim(a16, b16) - ssim_direct(a16, b16, 11, 1.5)) < 1e-9);

    const Mat a = random_mat(20, 13, 3);
    const Mat b = random_mat(20, 13, 4);
    CHECK(std::fabs(ssim(a, b) - ssim_direct(a, b, 11, 1.5)) < 1e-9);

    // non-default window
    CHECK(std::fabs(ssim(a, b, 5, 0.8) - ssim_direct(a, b, 5, 0.8)) < 1e-9);
}

TEST_CASE("ssim fixed points")
{
    const Mat a = random_mat(14, 14, 5);
    CHECK(ssim(a, a) == 1.0); // bit-exact, not approximate

    Mat half(12, 12), quarter(12, 12);
    for (double& x : half.v)
        x = 0.5;
    for (double& x : quarter.v)
        x = 0.25;
    const double expected = (2.0 * 0.5 * 0.25 + 1e-4) / (0.25 + 0.0625 + 1e-4);
    CHECK(ssim(half, quarter) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(ssim(half, quarter) == doctest::Approx(0.8001).epsilon(1e-4));

    // any perturbation drops the score below one
    Mat b = a;
    b.at(7, 7) = std::clamp(b.at(7, 7) + 0.2, 0.0, 1.0);
    CHECK(ssim(a, b) < 1.0);
}

TEST_CASE("ssim shape requirements")
{
    const Mat a = random_mat(16, 16, 6);
    const Mat b = random_mat(16, 15, 7);
    CHECK_THROWS_AS(ssim(a, b), ShapeError);
    const Mat small = random_mat(10, 10, 8);
    CHECK_THROWS_AS(ssim(small, small), ShapeError); // smaller than the window
    CHECK_NOTHROW(ssim(small, small, 5, 1.5));
}

TEST_CASE("nmse reference scalings")
{
    Mat hr(8, 8);
    Rng rng(9);
    for (double& x : hr.v)
        x = rng.log_uniform(1e-20, 1e-9);

    Mat sr = hr;
    for (double& x : sr.v)
        x *= 1.1;
    CHECK(nmse_db(hr, sr) == doctest::Approx(-20.0).epsilon(1e-10));

    // 2x - x is exact, so the error energy equals the reference energy
    for (size_t i = 0; i < sr.v.size(); ++i)
        sr.v[i] = 2.0 * hr.v[i];
    CHECK(nmse_db(hr, sr) == 0.0);

    for (size_t i = 0; i < sr.v.size(); ++i)
        sr.v[i] = 0.9 * hr.v[i];
    CHECK(nmse_db(hr, sr) == doctest::Approx(-20.0).epsilon(1e-10));
}

TEST_CASE("nmse anchors and floor")
{
    Mat hr(6, 6);
    Rng rng(10);
    for (double& x : hr.v)
        x = rng.log_uniform(1e-20, 1e-9);

    const Mat zero(6, 6);
    CHECK(nmse_db(hr, zero) == 0.0); // exactly, by construction

    CHECK(nmse_db(hr, hr) == -300.0); // zero error hits the floor

    Mat nudged = hr;
    const size_t lowest =
        std::min_element(nudged.v.begin(), nudged.v.end()) - nudged.v.begin();
    nudged.v[lowest] = std::nextafter(nudged.v[lowest], 1.0);
    const double db = nmse_db(hr, nudged);
    CHECK(db == -300.0); // a one-ulp nudge of the smallest cell is below the floor

    CHECK_THROWS_AS(nmse_db(zero, hr), DegenerateInputError);
    CHECK_THROWS_AS(nmse_db(hr, Mat(6, 5)), ShapeError);
}

TEST_CASE("nmse argument order matters")
{
    Mat hr(6, 6), sr(6, 6);
    for (size_t i = 0; i < hr.v.size(); ++i) {
        hr.v[i] = 1e-12;
        sr.v[i] = 3e-12;
    }
    // forward: err 2e-12 vs ref 1e-12 -> +6.02 dB; swapped ref changes it
    CHECK(nmse_db(hr, sr) == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-10));
    CHECK(nmse_db(sr, hr) ==
          doctest::Approx(20.0 * std::log10(2.0 / 3.0)).epsilon(1e-10));
}

TEST_CASE("distribution distance against hand-built histograms")
{
    // positives span 1e-4..1, four log bins of one decade each, plus zeros;
    // interior values sit mid-decade so bin assignment is not edge-sensitive
    Mat a(1, 8), b(1, 8);
    a.v = {0, 0, 1e-4, 1e-4, 3e-3, 3e-2, 3e-1, 1.0};
    b.v = {0, 1e-4, 1e-4, 3e-3, 3e-3, 3e-3, 1.0, 1.0};
    // bin index: [1e-4,1e-3) -> 0, [1e-3,1e-2) -> 1, [1e-2,1e-1) -> 2,
    //            [1e-1,1] -> 3, zeros -> 4
    // ha = {2, 1, 1, 2, 2}/8,  hb = {2, 3, 0, 2, 1}/8
    const double expected = (0.0 + 2.0 + 1.0 + 0.0 + 1.0) / 8.0;
    CHECK(distribution_distance(a, b, 4) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("distribution distance extremes")
{
    Mat a(2, 2), b(2, 2);
    a.v = {1e-12, 2e-12, 1.5e-12, 1e-12};
    b.v = a.v;
    CHECK(distribution_distance(a, b) == 0.0);

    // disjoint: all mass in the zero bin vs none
    Mat zeros(2, 2), pos(2, 2);
    pos.v = {1e-12, 1e-12, 1e-12, 1e-12};
    CHECK(distribution_distance(zeros, pos) == doctest::Approx(2.0).epsilon(1e-12));

    // disjoint positive ranges with enough bins to separate them
    Mat lo(2, 2), hi(2, 2);
    lo.v = {1e-20, 1.1e-20, 1e-20, 1.2e-20};
    hi.v = {1e-10, 1.1e-10, 1e-10, 1.2e-10};
    CHECK(distribution_distance(lo, hi, 64) == doctest::Approx(2.0).epsilon(1e-12));

    // a single shared positive value collapses the log range to one bin
    Mat c(1, 3), d(1, 3);
    c.v = {5e-13, 5e-13, 5e-13};
    d.v = {5e-13, 5e-13, 5e-13};
    CHECK(distribution_distance(c, d) == 0.0);
}

TEST_CASE("distribution distance zero bin is separate from small positives")
{
    Mat a(1, 2), b(1, 2);
    a.v = {0.0, 1e-12};
    b.v = {1e-12, 1e-12};
    // half of a's mass sits in the zero bin, all of b's in the value bin
    CHECK(distribution_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distribution distance bounds and validation")
{
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Mat a(8, 8), b(8, 8);
        for (double& x : a.v)
            x = rng.unit() < 0.5 ? 0.0 : rng.log_uniform(1e-25, 1e-9);
        for (double& x : b.v)
            x = rng.unit() < 0.5 ? 0.0 : rng.log_uniform(1e-25, 1e-9);
        const double d = distribution_distance(a, b);
        CHECK(d >= 0.0);
        CHECK(d <= 2.0);
    }

    Mat a(2, 2), bad(2, 2);
    a.v = {0, 0, 1e-12, 0};
    CHECK_THROWS_AS(distribution_distance(a, a, 1), DomainError);
    bad.v = {0, 0, -1e-12, 0};
    CHECK_THROWS_AS(distribution_distance(a, bad), DomainError);
    bad.v = {0, 0, std::nan(""), 0};
    CHECK_THROWS_AS(distribution_distance(a, bad), DomainError);
}
