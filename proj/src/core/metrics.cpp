#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace bvoc {

namespace {

constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;
constexpr double kNmseFloorDb = -300.0;

// Valid-mode horizontal then vertical pass with a normalized 1D kernel.
// The separable product equals the full 2D Gaussian window.
Mat filter_valid_h(const Mat& in, const std::vector<double>& g)
{
    const size_t w = g.size();
    Mat out(in.rows, in.cols - w + 1);
    for (size_t r = 0; r < in.rows; ++r)
        for (size_t c = 0; c < out.cols; ++c) {
            double acc = 0.0;
            for (size_t u = 0; u < w; ++u)
                acc += g[u] * in.at(r, c + u);
            out.at(r, c) = acc;
        }
    return out;
}

Mat filter_valid_v(const Mat& in, const std::vector<double>& g)
{
    const size_t w = g.size();
    Mat out(in.rows - w + 1, in.cols);
    for (size_t r = 0; r < out.rows; ++r)
        for (size_t c = 0; c < out.cols; ++c) {
            double acc = 0.0;
            for (size_t u = 0; u < w; ++u)
                acc += g[u] * in.at(r + u, c);
            out.at(r, c) = acc;
        }
    return out;
}

Mat filter_valid(const Mat& in, const std::vector<double>& g)
{
    return filter_valid_v(filter_valid_h(in, g), g);
}

Mat hadamard(const Mat& a, const Mat& b)
{
    Mat out(a.rows, a.cols);
    for (size_t i = 0; i < a.size(); ++i)
        out.v[i] = a.v[i] * b.v[i];
    return out;
}

} // namespace

std::vector<double> gaussian_kernel_1d(size_t size, double sigma)
{
    if (size < 1)
        throw DomainError("kernel size must be positive");
    if (!(sigma > 0.0))
        throw DomainError("sigma must be positive");
    std::vector<double> g(size);
    const double center = 0.5 * static_cast<double>(size - 1);
    double sum = 0.0;
    for (size_t i = 0; i < size; ++i) {
        const double d = static_cast<double>(i) - center;
        g[i] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += g[i];
    }
    for (double& x : g)
        x /= sum;
    return g;
}

double ssim(const Mat& a, const Mat& b) { return ssim(a, b, 11, 1.5); }

double ssim(const Mat& a, const Mat& b, size_t window, double sigma)
{
    if (!a.same_shape(b))
        throw ShapeError("ssim inputs must have the same shape");
    if (a.rows < window || a.cols < window)
        throw ShapeError("ssim input smaller than the window");

    const auto g = gaussian_kernel_1d(window, sigma);
    const Mat mu_a = filter_valid(a, g);
    const Mat mu_b = filter_valid(b, g);
    const Mat s_aa = filter_valid(hadamard(a, a), g);
    const Mat s_bb = filter_valid(hadamard(b, b), g);
    const Mat s_ab = filter_valid(hadamard(a, b), g);

    const double c1 = kSsimK1 * kSsimK1;
    const double c2 = kSsimK2 * kSsimK2;

    double total = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a.v[i];
        const double mb = mu_b.v[i];
        const double va = s_aa.v[i] - ma * ma;
        const double vb = s_bb.v[i] - mb * mb;
        const double cov = s_ab.v[i] - ma * mb;
        const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        total += num / den;
    }
    return total / static_cast<double>(mu_a.size());
}

double nmse_db(const Mat& hr, const Mat& sr)
{
    if (!sr.same_shape(hr))
        throw ShapeError("nmse inputs must have the same shape");
    if (hr.size() == 0)
        throw ShapeError("nmse inputs are empty");
    // Both sums run in the same index order so sr == 0 yields exactly 0 dB.
    double num = 0.0;
    double den = 0.0;
    for (size_t i = 0; i < hr.size(); ++i) {
        const double d = sr.v[i] - hr.v[i];
        num += d * d;
        den += hr.v[i] * hr.v[i];
    }
    if (den == 0.0)
        throw DegenerateInputError("nmse reference is all zero");
    if (num == 0.0)
        return kNmseFloorDb;
    return std::max(kNmseFloorDb, 10.0 * std::log10(num / den));
}

double nmse_db(const EmissionGrid& hr, const EmissionGrid& sr)
{
    return nmse_db(hr.values(), sr.values());
}

double distribution_distance(const Mat& a, const Mat& b, size_t n_bins)
{
    if (n_bins < 2)
        throw DomainError("need at least two histogram bins");
    if (a.size() == 0 || b.size() == 0)
        throw DomainError("cannot compare empty grids");

    double vmin = 0.0, vmax = 0.0;
    bool any_positive = false;
    for (const Mat* m : {&a, &b})
        for (double x : m->v) {
            if (!std::isfinite(x) || x < 0.0)
                throw DomainError("histogram values must be finite and non-negative");
            if (x > 0.0) {
                if (!any_positive) {
                    vmin = vmax = x;
                    any_positive = true;
                } else {
                    vmin = std::min(vmin, x);
                    vmax = std::max(vmax, x);
                }
            }
        }

    // Bin n_bins is reserved for exact zeros.
    const double lmin = any_positive ? std::log10(vmin) : 0.0;
    const double lspan = any_positive ? std::log10(vmax) - lmin : 0.0;
    auto bin_of = [&](double x) -> size_t {
        if (x == 0.0)
            return n_bins;
        if (lspan == 0.0)
            return 0;
        const double t = (std::log10(x) - lmin) / lspan;
        const auto k = static_cast<size_t>(t * static_cast<double>(n_bins));
        return std::min(k, n_bins - 1);
    };

    std::vector<double> ha(n_bins + 1, 0.0), hb(n_bins + 1, 0.0);
    for (double x : a.v)
        ha[bin_of(x)] += 1.0;
    for (double x : b.v)
        hb[bin_of(x)] += 1.0;
    for (double& x : ha)
        x /= static_cast<double>(a.size());
    for (double& x : hb)
        x /= static_cast<double>(b.size());

    double dist = 0.0;
    for (size_t i = 0; i <= n_bins; ++i)
        dist += std::abs(ha[i] - hb[i]);
    return dist;
}

double distribution_distance(const EmissionGrid& a, const EmissionGrid& b,
                             size_t n_bins)
{
    return distribution_distance(a.values(), b.values(), n_bins);
}

} // namespace bvoc
