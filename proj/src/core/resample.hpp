#pragma once

#include "core/mat.hpp"

namespace bvoc {

/// Bicubic resampling parameters. `factor` is the output/input size ratio.
/// `kernel_a` is the cubic sharpness parameter (-0.5 = Catmull-Rom).
/// When `antialias` is set, downscaling widens the kernel by the scale
/// factor and renormalizes the tap weights; plain interpolation otherwise.
struct ResampleSpec {
    double factor = 1.0;
    double kernel_a = -0.5;
    bool antialias = false;
};

/// Keys cubic kernel value at distance x.
double cubic_kernel(double x, double a);

/// Separable bicubic resampling with pixel-center alignment and edge
/// replication. Output dims are round(input dims * factor).
Mat bicubic_resample(const Mat& in, const ResampleSpec& spec);

// Single-axis passes; bicubic_resample is horizontal followed by vertical.
Mat resample_horizontal(const Mat& in, size_t out_cols, const ResampleSpec& spec);
Mat resample_vertical(const Mat& in, size_t out_rows, const ResampleSpec& spec);

/// Elementwise max(x, 0). Bicubic kernels have negative lobes and can emit
/// small negative values on non-negative data.
Mat clamp_non_negative(Mat in);

} // namespace bvoc
