#pragma once

#include <cstddef>
#include <vector>

namespace bvoc {

// Plain row-major 2D array of doubles. The numeric workhorse shared by the
// resampler, transforms and metrics; EmissionGrid wraps one with geography.
struct Mat {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

    double& at(size_t r, size_t c) { return v[r * cols + c]; }
    double at(size_t r, size_t c) const { return v[r * cols + c]; }
    size_t size() const { return v.size(); }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Mat& o) const = default;
};

} // namespace bvoc
