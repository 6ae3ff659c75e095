#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/grid.hpp"
#include "core/mat.hpp"

namespace bvoc {

/// Max-scaling preprocessing: divide a grid by its own maximum. The maximum
/// is captured at apply time; inversion multiplies it back. At deployment
/// only the LR input's maximum is known, so peaks present in the HR truth
/// but absent from the LR input cannot be recovered through this transform.
struct ScalingTransform {
    double stored_max = 0.0;
};

/// Non-parametric map of the empirical emission distribution onto the
/// uniform distribution on [0,1], learnt once from reference data and kept
/// fixed afterwards. quantile_values[k] is the empirical quantile at
/// probability k/(n-1); forward/inverse are piecewise-linear in the knots.
class QuantileTransform {
public:
    QuantileTransform() = default;
    explicit QuantileTransform(std::vector<double> quantile_values);

    bool fitted() const { return !knots_.empty(); }
    size_t n_quantiles() const { return knots_.size(); }
    const std::vector<double>& quantile_values() const { return knots_; }

    /// Empirical CDF value in [0,1]. Values below the first knot map to 0,
    /// above the last to 1; ties map to the midpoint of their flat segment.
    double forward(double x) const;

    /// Piecewise-linear inverse CDF; u must lie in [0,1].
    double inverse(double u) const;

    bool operator==(const QuantileTransform&) const = default;

private:
    std::vector<double> knots_; // non-decreasing
};

/// Fits the quantile map from a sample stream (all HR training cells).
/// Knot k is the empirical quantile at probability k/(n_quantiles-1),
/// computed with linear interpolation of the order statistics.
QuantileTransform fit_quantile_transform(std::span<const double> samples,
                                         uint32_t n_quantiles);

TransformedGrid apply_quantile(const QuantileTransform& t, const EmissionGrid& grid);
Mat apply_quantile(const QuantileTransform& t, const Mat& values);
EmissionGrid invert_quantile(const QuantileTransform& t, const TransformedGrid& grid,
                             const GridMeta& meta);
Mat invert_quantile(const QuantileTransform& t, const Mat& values);

std::pair<TransformedGrid, ScalingTransform> apply_scaling(const EmissionGrid& grid);
EmissionGrid invert_scaling(const ScalingTransform& t, const TransformedGrid& grid,
                            const GridMeta& meta);
Mat invert_scaling(const ScalingTransform& t, const Mat& values);

/// QTX1 binary format: magic "QTX1", u32 n_quantiles, n_quantiles f64
/// knot values, little-endian. Round-trips bit-exactly.
QuantileTransform read_quantile_transform(const std::string& path);
void write_quantile_transform(const QuantileTransform& t, const std::string& path);

} // namespace bvoc
