#pragma once

#include <cstddef>
#include <vector>

#include "core/grid.hpp"
#include "core/mat.hpp"

namespace bvoc {

/// Normalized 1D Gaussian taps, length `size`, centered. Weights sum to 1.
std::vector<double> gaussian_kernel_1d(size_t size, double sigma);

/// Mean structural similarity over all fully-contained (valid) window
/// positions. Gaussian-weighted 11x11 window with sigma 1.5, K1 = 0.01,
/// K2 = 0.03, dynamic range 1. Inputs are expected in the transformed
/// [0,1] domain. Identical inputs score exactly 1.0.
double ssim(const Mat& a, const Mat& b);
double ssim(const Mat& a, const Mat& b, size_t window, double sigma);

/// Normalized mean squared error in decibels:
/// 10*log10(mean((sr-hr)^2) / mean(hr^2)), floored at -300 dB.
/// An all-zero prediction scores exactly 0 dB. Physical-domain metric;
/// the reference comes first.
double nmse_db(const Mat& hr, const Mat& sr);
double nmse_db(const EmissionGrid& hr, const EmissionGrid& sr);

/// L1 distance between the normalized value histograms of two grids.
/// Bins are log-spaced over the union of both positive ranges, with one
/// dedicated bin for exact zeros; exact zeros carry the sparsity mass.
/// Range [0,2]: 0 for identical histograms, 2 for disjoint supports.
double distribution_distance(const Mat& a, const Mat& b, size_t n_bins = 64);
double distribution_distance(const EmissionGrid& a, const EmissionGrid& b,
                             size_t n_bins = 64);

} // namespace bvoc
