#include "core/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <utility>

#include "core/binio.hpp"
#include "core/errors.hpp"

namespace bvoc {

namespace {

constexpr char kMagic[4] = {'Q', 'T', 'X', '1'};

// Quantile at probability p by linear interpolation of the order statistics.
double sorted_quantile(const std::vector<double>& sorted, double p)
{
    const double h = p * static_cast<double>(sorted.size() - 1);
    const size_t i = static_cast<size_t>(h);
    if (i + 1 >= sorted.size())
        return sorted.back();
    const double frac = h - static_cast<double>(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

} // namespace

QuantileTransform::QuantileTransform(std::vector<double> quantile_values)
  : knots_(std::move(quantile_values))
{
    if (knots_.size() < 2)
        throw DomainError("quantile transform needs at least 2 knots");
    double prev = -1.0;
    for (double k : knots_) {
        if (!std::isfinite(k) || k < 0.0)
            throw DomainError("quantile knots must be finite and non-negative");
        if (k < prev)
            throw DomainError("quantile knots must be non-decreasing");
        prev = k;
    }
}

QuantileTransform fit_quantile_transform(std::span<const double> samples,
                                         uint32_t n_quantiles)
{
    if (n_quantiles < 2)
        throw DomainError("n_quantiles must be at least 2");
    if (samples.size() < n_quantiles)
        throw InsufficientDataError("need at least " + std::to_string(n_quantiles) +
                                    " samples, got " + std::to_string(samples.size()));
    std::vector<double> sorted(samples.begin(), samples.end());
    for (double s : sorted) {
        if (!std::isfinite(s))
            throw DomainError("sample is not finite");
        if (s < 0.0)
            throw DomainError("sample is negative");
    }
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> knots(n_quantiles);
    const double denom = static_cast<double>(n_quantiles - 1);
    for (uint32_t k = 0; k < n_quantiles; ++k)
        knots[k] = sorted_quantile(sorted, static_cast<double>(k) / denom);
    return QuantileTransform(std::move(knots));
}

double QuantileTransform::forward(double x) const
{
    if (!fitted())
        throw StateError("quantile transform not fitted");
    if (!std::isfinite(x))
        throw DomainError("input is not finite");
    // Exact boundary values pin the CDF endpoints, even when tied.
    if (x <= knots_.front())
        return 0.0;
    if (x >= knots_.back())
        return 1.0;

    const double denom = static_cast<double>(knots_.size() - 1);
    const auto lo = std::lower_bound(knots_.begin(), knots_.end(), x);
    if (lo != knots_.end() && *lo == x) {
        // Tied knots: midpoint of the flat CDF segment.
        const auto hi = std::upper_bound(lo, knots_.end(), x);
        const double first = static_cast<double>(lo - knots_.begin());
        const double last = static_cast<double>(hi - knots_.begin() - 1);
        return std::clamp(0.5 * (first + last) / denom, 0.0, 1.0);
    }
    const size_t i = static_cast<size_t>(lo - knots_.begin() - 1);
    const double t = (x - knots_[i]) / (knots_[i + 1] - knots_[i]);
    return std::clamp((static_cast<double>(i) + t) / denom, 0.0, 1.0);
}

double QuantileTransform::inverse(double u) const
{
    if (!fitted())
        throw StateError("quantile transform not fitted");
    if (!(u >= 0.0 && u <= 1.0))
        throw DomainError("inverse input outside [0,1]");
    const double h = u * static_cast<double>(knots_.size() - 1);
    const size_t i = static_cast<size_t>(h);
    if (i + 1 >= knots_.size())
        return knots_.back();
    const double frac = h - static_cast<double>(i);
    return knots_[i] + frac * (knots_[i + 1] - knots_[i]);
}

Mat apply_quantile(const QuantileTransform& t, const Mat& values)
{
    Mat out(values.rows, values.cols);
    for (size_t i = 0; i < values.size(); ++i)
        out.v[i] = t.forward(values.v[i]);
    return out;
}

TransformedGrid apply_quantile(const QuantileTransform& t, const EmissionGrid& grid)
{
    return TransformedGrid(apply_quantile(t, grid.values()),
                           "quantile:" + std::to_string(t.n_quantiles()));
}

Mat invert_quantile(const QuantileTransform& t, const Mat& values)
{
    Mat out(values.rows, values.cols);
    for (size_t i = 0; i < values.size(); ++i)
        out.v[i] = t.inverse(values.v[i]);
    return out;
}

EmissionGrid invert_quantile(const QuantileTransform& t, const TransformedGrid& grid,
                             const GridMeta& meta)
{
    return make_grid(invert_quantile(t, grid.values), meta);
}

std::pair<TransformedGrid, ScalingTransform> apply_scaling(const EmissionGrid& grid)
{
    const double m = grid.max_value();
    if (m <= 0.0)
        throw DegenerateInputError("cannot scale an all-zero grid");
    Mat out = grid.values();
    for (double& x : out.v)
        x /= m;
    return {TransformedGrid(std::move(out), "scaling"), ScalingTransform{m}};
}

Mat invert_scaling(const ScalingTransform& t, const Mat& values)
{
    if (!(t.stored_max > 0.0))
        throw DomainError("scaling transform has no stored maximum");
    Mat out = values;
    for (double& x : out.v)
        x *= t.stored_max;
    return out;
}

EmissionGrid invert_scaling(const ScalingTransform& t, const TransformedGrid& grid,
                            const GridMeta& meta)
{
    return make_grid(invert_scaling(t, grid.values), meta);
}

QuantileTransform read_quantile_transform(const std::string& path)
{
    const auto bytes = binio::read_file(path);
    binio::Reader r(bytes.data(), bytes.size());
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic, not a QTX1 file");
    const uint32_t n = r.u32();
    if (r.remaining() != static_cast<size_t>(n) * 8)
        throw FormatError("QTX1 payload size does not match header");
    std::vector<double> knots(n);
    for (double& k : knots)
        k = r.f64();
    return QuantileTransform(std::move(knots));
}

void write_quantile_transform(const QuantileTransform& t, const std::string& path)
{
    if (!t.fitted())
        throw StateError("cannot serialize an unfitted transform");
    std::string out;
    out.reserve(8 + t.n_quantiles() * 8);
    out.append(kMagic, 4);
    binio::put_u32(out, static_cast<uint32_t>(t.n_quantiles()));
    for (double k : t.quantile_values())
        binio::put_f64(out, k);
    binio::write_file(path, out);
}

} // namespace bvoc
