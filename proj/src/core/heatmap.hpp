#pragma once

#include <string>
#include <vector>

#include "core/grid.hpp"

namespace bvoc {

/// Renders an emission grid as a binary PPM (P6) image, one pixel per cell.
/// The color scale is log10 over the nonzero values; zero cells use a
/// reserved background color since log(0) is undefined.
void render_heatmap(const EmissionGrid& grid, const std::string& path);

/// Pixel buffer form of render_heatmap, 3 bytes per cell (RGB).
std::vector<uint8_t> heatmap_pixels(const Mat& values);

/// Side-by-side HR | LR | SR panel image, as produced by the evaluation
/// harness. The LR panel is pixel-replicated to the HR cell count.
void render_triptych(const EmissionGrid& hr,
                     const EmissionGrid& lr,
                     const EmissionGrid& sr,
                     const std::string& path);

} // namespace bvoc
