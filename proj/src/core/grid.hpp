#pragma once

#include <cstdint>
#include <string>

#include "core/mat.hpp"

namespace bvoc {

enum class Compound : uint8_t {
    isoprene = 0,
    monoterpenes = 1,
    methanol = 2,
    sesquiterpenes = 3,
};

Compound compound_from_name(const std::string& name);
Compound compound_from_code(uint8_t code);
const char* compound_name(Compound c);

struct Timestamp {
    uint16_t year = 2000;
    uint8_t month = 1;

    bool operator==(const Timestamp&) const = default;
};

/// A 2D non-negative emission raster with geographic bounds and timestamp.
/// Immutable after construction; the constructor rejects anything that
/// violates the data model (negative or non-finite cells, inconsistent
/// bounds), so a live EmissionGrid is always valid.
///
/// Row 0 is the northernmost row (lat_max edge); column 0 is the
/// westernmost column (lon_min edge). Cells are square in degrees.
class EmissionGrid {
public:
    // Documented dynamic-range envelope of emission values [kg/m2s].
    static constexpr double kMaxEmission = 1e-9;
    static constexpr double kMinPositive = 1e-30;

    EmissionGrid(Mat values,
                 double lat_min,
                 double lat_max,
                 double lon_min,
                 double lon_max,
                 Timestamp ts,
                 Compound compound);

    size_t height() const { return values_.rows; }
    size_t width() const { return values_.cols; }
    const Mat& values() const { return values_; }
    double at(size_t r, size_t c) const { return values_.at(r, c); }

    double lat_min() const { return lat_min_; }
    double lat_max() const { return lat_max_; }
    double lon_min() const { return lon_min_; }
    double lon_max() const { return lon_max_; }
    double cell_size_deg() const { return cell_size_deg_; }
    Timestamp timestamp() const { return ts_; }
    Compound compound() const { return compound_; }

    double max_value() const;
    size_t count_positive() const;

    /// True when every value lies in [0, kMaxEmission] and every nonzero
    /// value is at least kMinPositive. Not enforced by the constructor;
    /// generated and super-resolved grids satisfy it by construction.
    bool satisfies_envelope() const;

    bool operator==(const EmissionGrid&) const = default;

private:
    Mat values_;
    double lat_min_, lat_max_, lon_min_, lon_max_;
    double cell_size_deg_;
    Timestamp ts_;
    Compound compound_;
};

/// EMG1 little-endian binary format:
///   bytes 0-3  magic "EMG1"
///   u32 height, u32 width
///   f64 lat_min, lat_max, lon_min, lon_max
///   u16 year, u8 month, u8 compound code
///   height*width f64 values, row-major
EmissionGrid read_grid(const std::string& path);
void write_grid(const EmissionGrid& grid, const std::string& path);

std::string encode_grid(const EmissionGrid& grid);
EmissionGrid decode_grid(const uint8_t* data, size_t size);

/// Transformed counterpart of an EmissionGrid: values in [0,1], tagged with
/// the transform that produced it.
struct TransformedGrid {
    Mat values;
    std::string transform_id;

    TransformedGrid(Mat v, std::string id);
};

/// Geographic/temporal identity of a grid, without the raster. Used to
/// rebuild an EmissionGrid after an inverse transform or a resample.
struct GridMeta {
    double lat_min, lat_max, lon_min, lon_max;
    Timestamp ts;
    Compound compound;
};

GridMeta meta_of(const EmissionGrid& g);
EmissionGrid make_grid(Mat values, const GridMeta& meta);

} // namespace bvoc
