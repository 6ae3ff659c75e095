#include "core/grid.hpp"

#include <cmath>
#include <utility>

#include "core/binio.hpp"
#include "core/errors.hpp"

namespace bvoc {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'G', '1'};
constexpr double kCellTolerance = 1e-9; // relative, bounds/dims consistency

} // namespace

Compound compound_from_name(const std::string& name)
{
    if (name == "isoprene")
        return Compound::isoprene;
    if (name == "monoterpenes")
        return Compound::monoterpenes;
    if (name == "methanol")
        return Compound::methanol;
    if (name == "sesquiterpenes")
        return Compound::sesquiterpenes;
    throw DomainError("unknown compound: " + name);
}

Compound compound_from_code(uint8_t code)
{
    if (code > static_cast<uint8_t>(Compound::sesquiterpenes))
        throw FormatError("unknown compound code: " + std::to_string(code));
    return static_cast<Compound>(code);
}

const char* compound_name(Compound c)
{
    switch (c) {
    case Compound::isoprene: return "isoprene";
    case Compound::monoterpenes: return "monoterpenes";
    case Compound::methanol: return "methanol";
    case Compound::sesquiterpenes: return "sesquiterpenes";
    }
    return "unknown";
}

EmissionGrid::EmissionGrid(Mat values,
                           double lat_min,
                           double lat_max,
                           double lon_min,
                           double lon_max,
                           Timestamp ts,
                           Compound compound)
  : values_(std::move(values)),
    lat_min_(lat_min),
    lat_max_(lat_max),
    lon_min_(lon_min),
    lon_max_(lon_max),
    ts_(ts),
    compound_(compound)
{
    if (values_.rows < 1 || values_.cols < 1)
        throw DomainError("grid dimensions must be positive");
    for (double x : values_.v) {
        if (!std::isfinite(x))
            throw DomainError("grid value is not finite");
        if (x < 0.0)
            throw DomainError("grid value is negative");
    }
    if (ts_.month < 1 || ts_.month > 12)
        throw DomainError("month out of range: " + std::to_string(ts_.month));
    if (!(lat_max_ > lat_min_) || !(lon_max_ > lon_min_))
        throw DomainError("degenerate geographic bounds");
    const double cell_lat = (lat_max_ - lat_min_) / static_cast<double>(values_.rows);
    const double cell_lon = (lon_max_ - lon_min_) / static_cast<double>(values_.cols);
    if (std::abs(cell_lat - cell_lon) > kCellTolerance * std::max(cell_lat, cell_lon))
        throw DomainError("cells are not square: lat step " + std::to_string(cell_lat) +
                          " vs lon step " + std::to_string(cell_lon));
    cell_size_deg_ = cell_lat;
}

double EmissionGrid::max_value() const
{
    double m = 0.0;
    for (double x : values_.v)
        if (x > m)
            m = x;
    return m;
}

size_t EmissionGrid::count_positive() const
{
    size_t n = 0;
    for (double x : values_.v)
        if (x > 0.0)
            ++n;
    return n;
}

bool EmissionGrid::satisfies_envelope() const
{
    for (double x : values_.v) {
        if (x > kMaxEmission)
            return false;
        if (x > 0.0 && x < kMinPositive)
            return false;
    }
    return true;
}

std::string encode_grid(const EmissionGrid& grid)
{
    std::string out;
    out.reserve(48 + grid.values().size() * 8);
    out.append(kMagic, 4);
    binio::put_u32(out, static_cast<uint32_t>(grid.height()));
    binio::put_u32(out, static_cast<uint32_t>(grid.width()));
    binio::put_f64(out, grid.lat_min());
    binio::put_f64(out, grid.lat_max());
    binio::put_f64(out, grid.lon_min());
    binio::put_f64(out, grid.lon_max());
    binio::put_u16(out, grid.timestamp().year);
    binio::put_u8(out, grid.timestamp().month);
    binio::put_u8(out, static_cast<uint8_t>(grid.compound()));
    for (double x : grid.values().v)
        binio::put_f64(out, x);
    return out;
}

EmissionGrid decode_grid(const uint8_t* data, size_t size)
{
    binio::Reader r(data, size);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic, not an EMG1 file");
    const uint32_t h = r.u32();
    const uint32_t w = r.u32();
    if (h == 0 || w == 0)
        throw FormatError("zero grid dimension in header");
    const double lat_min = r.f64();
    const double lat_max = r.f64();
    const double lon_min = r.f64();
    const double lon_max = r.f64();
    Timestamp ts;
    ts.year = r.u16();
    ts.month = r.u8();
    const Compound compound = compound_from_code(r.u8());
    if (r.remaining() != static_cast<size_t>(h) * w * 8)
        throw FormatError("payload size does not match header dimensions");
    Mat values(h, w);
    for (double& x : values.v)
        x = r.f64();
    return EmissionGrid(std::move(values), lat_min, lat_max, lon_min, lon_max, ts, compound);
}

EmissionGrid read_grid(const std::string& path)
{
    const auto bytes = binio::read_file(path);
    return decode_grid(bytes.data(), bytes.size());
}

void write_grid(const EmissionGrid& grid, const std::string& path)
{
    binio::write_file(path, encode_grid(grid));
}

TransformedGrid::TransformedGrid(Mat v, std::string id)
  : values(std::move(v)), transform_id(std::move(id))
{
    for (double x : values.v) {
        if (!(x >= 0.0 && x <= 1.0))
            throw DomainError("transformed value outside [0,1]");
    }
}

GridMeta meta_of(const EmissionGrid& g)
{
    return {g.lat_min(), g.lat_max(), g.lon_min(), g.lon_max(), g.timestamp(), g.compound()};
}

EmissionGrid make_grid(Mat values, const GridMeta& meta)
{
    return EmissionGrid(std::move(values), meta.lat_min, meta.lat_max, meta.lon_min,
                        meta.lon_max, meta.ts, meta.compound);
}

} // namespace bvoc
