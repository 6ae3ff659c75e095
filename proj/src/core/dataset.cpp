#include "core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "core/errors.hpp"
#include "core/resample.hpp"
#include "core/rng.hpp"

namespace bvoc {

namespace {

namespace fs = std::filesystem;

struct CompoundProfile {
    double density;    // blob count multiplier
    double amp_hi;     // kg/m2s, upper end of peak amplitudes
    double sigma_lo;   // blob radius range, cells
    double sigma_hi;
    int peak_month;    // seasonal maximum
    double amp_tilt;   // decades of west-to-east amplitude slope
};

CompoundProfile profile_of(Compound c)
{
    switch (c) {
    case Compound::isoprene:       return {1.0, 4e-10, 2.0, 10.0, 7, 2.0};
    case Compound::monoterpenes:   return {0.8, 1e-10, 1.5, 8.0, 6, -2.0};
    case Compound::methanol:       return {1.3, 8e-11, 3.0, 12.0, 5, 1.0};
    case Compound::sesquiterpenes: return {0.5, 2e-11, 1.5, 6.0, 8, -1.0};
    }
    throw DomainError("unknown compound profile");
}

constexpr double kAmpLo = 1e-16;
constexpr double kMapScaleLo = 1e-10; // per-map decades, keeps corpora wide
constexpr double kSynthCellDeg = 0.25;

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

void require_plain_field(const std::string& field)
{
    if (field.empty() || field.find_first_of(",\n") != std::string::npos)
        throw DomainError("manifest field empty or contains a separator: " + field);
}

} // namespace

Protocol protocol_from_name(const std::string& name)
{
    if (name == "random")
        return Protocol::random_70_20_10;
    if (name == "time")
        return Protocol::time;
    if (name == "time_area")
        return Protocol::time_and_area;
    throw ConfigError("unknown protocol: " + name);
}

std::string protocol_name(Protocol p)
{
    switch (p) {
    case Protocol::random_70_20_10: return "random";
    case Protocol::time:            return "time";
    case Protocol::time_and_area:   return "time_area";
    }
    throw DomainError("unknown protocol code");
}

std::vector<Patch> slice_patches(const EmissionGrid& grid, size_t patch_size)
{
    if (patch_size < 1)
        throw DomainError("patch size must be positive");
    if (patch_size > grid.height() || patch_size > grid.width())
        throw DomainError("patch size exceeds grid dims");

    const size_t n_rows = grid.height() / patch_size;
    const size_t n_cols = grid.width() / patch_size;
    const double cell = grid.cell_size_deg();

    std::vector<Patch> out;
    out.reserve(n_rows * n_cols);
    for (size_t pr = 0; pr < n_rows; ++pr)
        for (size_t pc = 0; pc < n_cols; ++pc) {
            const size_t r0 = pr * patch_size;
            const size_t c0 = pc * patch_size;
            Mat m(patch_size, patch_size);
            for (size_t r = 0; r < patch_size; ++r)
                for (size_t c = 0; c < patch_size; ++c)
                    m.at(r, c) = grid.at(r0 + r, c0 + c);

            const double lat_max = grid.lat_max() - static_cast<double>(r0) * cell;
            const double lat_min =
                grid.lat_max() - static_cast<double>(r0 + patch_size) * cell;
            const double lon_min = grid.lon_min() + static_cast<double>(c0) * cell;
            const double lon_max =
                grid.lon_min() + static_cast<double>(c0 + patch_size) * cell;
            out.push_back({EmissionGrid(std::move(m), lat_min, lat_max, lon_min,
                                        lon_max, grid.timestamp(), grid.compound()),
                           static_cast<uint32_t>(r0), static_cast<uint32_t>(c0)});
        }
    return out;
}

bool sparsity_filter(const EmissionGrid& patch, double min_nonzero_fraction)
{
    if (!(min_nonzero_fraction >= 0.0 && min_nonzero_fraction <= 1.0))
        throw DomainError("nonzero fraction threshold must be in [0,1]");
    const double fraction = static_cast<double>(patch.count_positive()) /
                            static_cast<double>(patch.height() * patch.width());
    return fraction >= min_nonzero_fraction;
}

std::vector<PatchPair> make_pairs(const std::string& source_id,
                                  const std::vector<Patch>& hr_patches,
                                  uint32_t alpha, bool antialias)
{
    if (alpha < 1)
        throw DomainError("alpha must be positive");

    std::vector<PatchPair> out;
    out.reserve(hr_patches.size());
    for (const Patch& p : hr_patches) {
        const EmissionGrid& hr = p.grid;
        if (hr.height() % alpha != 0 || hr.width() % alpha != 0)
            throw DomainError("patch dims not divisible by alpha");

        ResampleSpec spec;
        spec.factor = 1.0 / static_cast<double>(alpha);
        spec.antialias = antialias;
        Mat lr_m = clamp_non_negative(bicubic_resample(hr.values(), spec));

        char id[96];
        std::snprintf(id, sizeof id, "%s_r%04u_c%04u_a%u", source_id.c_str(),
                      p.row_off, p.col_off, alpha);
        out.push_back({id,
                       EmissionGrid(std::move(lr_m), hr.lat_min(), hr.lat_max(),
                                    hr.lon_min(), hr.lon_max(), hr.timestamp(),
                                    hr.compound()),
                       hr, alpha});
    }
    return out;
}

DatasetSplit split_random(std::vector<PatchPair> pairs, uint64_t seed)
{
    const size_t n = pairs.size();
    if (n < 10)
        throw DomainError("random split needs at least 10 pairs");

    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i)
        idx[i] = i;
    Rng rng(seed);
    for (size_t i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.below(i + 1)]);

    const size_t n_train = 7 * n / 10;
    const size_t n_val = 2 * n / 10;

    DatasetSplit out;
    out.protocol = Protocol::random_70_20_10;
    for (size_t i = 0; i < n; ++i) {
        PatchPair& p = pairs[idx[i]];
        if (i < n_train)
            out.train.push_back(std::move(p));
        else if (i < n_train + n_val)
            out.validation.push_back(std::move(p));
        else
            out.test.push_back(std::move(p));
    }
    return out;
}

DatasetSplit split_time(std::vector<PatchPair> pairs)
{
    DatasetSplit out;
    out.protocol = Protocol::time;
    for (PatchPair& p : pairs) {
        const uint16_t year = p.hr.timestamp().year;
        if (year <= 2014)
            out.train.push_back(std::move(p));
        else if (year <= 2018)
            out.validation.push_back(std::move(p));
        else
            out.test.push_back(std::move(p));
    }
    return out;
}

namespace {

bool fully_inside(const EmissionGrid& g, const Region& r)
{
    return g.lat_min() >= r.lat_min && g.lat_max() <= r.lat_max &&
           g.lon_min() >= r.lon_min && g.lon_max() <= r.lon_max;
}

bool fully_outside(const EmissionGrid& g, const Region& r)
{
    return g.lat_max() <= r.lat_min || g.lat_min() >= r.lat_max ||
           g.lon_max() <= r.lon_min || g.lon_min() >= r.lon_max;
}

} // namespace

DatasetSplit split_time_area(std::vector<PatchPair> pairs, const Region& train_region)
{
    if (!(train_region.lat_min < train_region.lat_max) ||
        !(train_region.lon_min < train_region.lon_max))
        throw DomainError("degenerate train region");

    DatasetSplit by_time = split_time(std::move(pairs));
    DatasetSplit out;
    out.protocol = Protocol::time_and_area;
    for (auto* src : {&by_time.train, &by_time.validation})
        for (PatchPair& p : *src)
            if (fully_inside(p.hr, train_region))
                (src == &by_time.train ? out.train : out.validation)
                    .push_back(std::move(p));
    for (PatchPair& p : by_time.test)
        if (fully_outside(p.hr, train_region))
            out.test.push_back(std::move(p));

    if (out.train.empty() || out.test.empty())
        throw DegenerateSplitError("train region leaves an empty train or test set");
    return out;
}

DatasetSplit subsample_to_cardinality(DatasetSplit split, size_t target, uint64_t seed)
{
    const size_t n = split.train.size();
    if (target > n)
        throw DomainError("subsample target exceeds training set size");
    if (target == n)
        return split;

    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i)
        idx[i] = i;
    Rng rng(seed);
    for (size_t i = 0; i < target; ++i)
        std::swap(idx[i], idx[i + rng.below(n - i)]);
    idx.resize(target);
    std::sort(idx.begin(), idx.end()); // keep the original training order

    std::vector<PatchPair> kept;
    kept.reserve(target);
    for (size_t i : idx)
        kept.push_back(std::move(split.train[i]));
    split.train = std::move(kept);
    return split;
}

std::vector<EmissionGrid> synth_emissions(uint64_t seed, size_t n_maps, size_t height,
                                          size_t width, Compound profile)
{
    if (height < 64 || width < 64)
        throw DomainError("synthetic maps must be at least 64x64");
    const CompoundProfile pf = profile_of(profile);

    const double lat_half = static_cast<double>(height) * kSynthCellDeg / 2.0;
    const double lon_half = static_cast<double>(width) * kSynthCellDeg / 2.0;
    const double total = static_cast<double>(height * width);

    std::vector<EmissionGrid> out;
    out.reserve(n_maps);
    for (size_t map = 0; map < n_maps; ++map) {
        Rng rng(Rng::mix(seed, map));
        const uint16_t year = static_cast<uint16_t>(2000 + (map / 12) % 21);
        const uint8_t month = static_cast<uint8_t>(1 + map % 12);

        const double target_fraction = rng.uniform(0.02, 0.6);
        const double map_scale = rng.log_uniform(kMapScaleLo, 1.0);
        const size_t n_blobs = std::max<size_t>(
            3, static_cast<size_t>(
                   std::llround(pf.density * 1.5 * target_fraction * total / 150.0)));

        Mat field(height, width, 0.0);
        for (size_t b = 0; b < n_blobs; ++b) {
            const double cx = rng.uniform(0.0, static_cast<double>(width));
            const double cy = rng.uniform(0.0, static_cast<double>(height));
            const double amp_decades =
                rng.uniform(std::log10(kAmpLo), std::log10(pf.amp_hi)) +
                pf.amp_tilt * (cx / static_cast<double>(width) - 0.5);
            const double amp = map_scale * std::pow(10.0, amp_decades);
            const double sx = rng.log_uniform(pf.sigma_lo, pf.sigma_hi);
            const double sy = rng.log_uniform(pf.sigma_lo, pf.sigma_hi);
            const double theta = rng.uniform(0.0, M_PI);
            const double ct = std::cos(theta), st = std::sin(theta);

            const double radius = 5.0 * std::max(sx, sy);
            const auto r0 = static_cast<size_t>(std::max(0.0, std::floor(cy - radius)));
            const auto r1 = static_cast<size_t>(
                std::min<double>(static_cast<double>(height), std::ceil(cy + radius) + 1));
            const auto c0 = static_cast<size_t>(std::max(0.0, std::floor(cx - radius)));
            const auto c1 = static_cast<size_t>(
                std::min<double>(static_cast<double>(width), std::ceil(cx + radius) + 1));

            for (size_t r = r0; r < r1; ++r)
                for (size_t c = c0; c < c1; ++c) {
                    const double dx = static_cast<double>(c) + 0.5 - cx;
                    const double dy = static_cast<double>(r) + 0.5 - cy;
                    const double u = ct * dx + st * dy;
                    const double v = -st * dx + ct * dy;
                    const double q =
                        u * u / (2.0 * sx * sx) + v * v / (2.0 * sy * sy);
                    if (q < 40.0)
                        field.at(r, c) += amp * std::exp(-q);
                }
        }

        // Seasonal modulation in [0.25, 1], peaking at the profile's month.
        const double season =
            0.625 + 0.375 * std::cos(2.0 * M_PI *
                                     (static_cast<double>(month) - pf.peak_month) / 12.0);
        for (double& x : field.v)
            x *= season;

        // Realize the target sparsity by zeroing everything below the
        // matching quantile, then re-impose the physical envelope.
        std::vector<double> sorted = field.v;
        const size_t k = static_cast<size_t>((1.0 - target_fraction) * total);
        std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
        const double tau = sorted[k];
        for (double& x : field.v) {
            if (x < tau || x < EmissionGrid::kMinPositive)
                x = 0.0;
            else if (x > EmissionGrid::kMaxEmission)
                x = EmissionGrid::kMaxEmission;
        }

        out.emplace_back(std::move(field), -lat_half, lat_half, -lon_half, lon_half,
                         Timestamp{year, month}, profile);
    }
    return out;
}

EmissionGrid coarsen(const EmissionGrid& grid, uint32_t factor, bool antialias)
{
    if (factor < 1)
        throw DomainError("coarsen factor must be positive");
    if (grid.height() % factor != 0 || grid.width() % factor != 0)
        throw DomainError("grid dims not divisible by coarsen factor");

    ResampleSpec spec;
    spec.factor = 1.0 / static_cast<double>(factor);
    spec.antialias = antialias;
    Mat m = clamp_non_negative(bicubic_resample(grid.values(), spec));
    for (double& x : m.v) {
        if (x < EmissionGrid::kMinPositive)
            x = 0.0;
        else if (x > EmissionGrid::kMaxEmission)
            x = EmissionGrid::kMaxEmission;
    }
    return make_grid(std::move(m), meta_of(grid));
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path)
{
    std::string out;
    for (const ManifestEntry& e : entries) {
        for (const std::string* f : {&e.pair_id, &e.lr_path, &e.hr_path, &e.split})
            require_plain_field(*f);
        if (e.split != "train" && e.split != "validation" && e.split != "test")
            throw DomainError("bad split label: " + e.split);
        out += e.pair_id + ',' + e.lr_path + ',' + e.hr_path + ',' +
               std::to_string(e.alpha) + ',' + std::to_string(e.ts.year) + ',' +
               std::to_string(e.ts.month) + ',' + compound_name(e.compound) + ',' +
               e.split + '\n';
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw IoError("cannot open manifest for writing: " + path);
    f << out;
    if (!f)
        throw IoError("manifest write failed: " + path);
}

std::vector<ManifestEntry> read_manifest(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw IoError("cannot open manifest: " + path);

    std::vector<ManifestEntry> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(trim(field));
        const std::string where = path + ":" + std::to_string(line_no);
        if (fields.size() != 8)
            throw FormatError("manifest line needs 8 fields at " + where);
        try {
            ManifestEntry e;
            e.pair_id = fields[0];
            e.lr_path = fields[1];
            e.hr_path = fields[2];
            e.alpha = static_cast<uint32_t>(std::stoul(fields[3]));
            e.ts.year = static_cast<uint16_t>(std::stoul(fields[4]));
            e.ts.month = static_cast<uint8_t>(std::stoul(fields[5]));
            e.compound = compound_from_name(fields[6]);
            e.split = fields[7];
            if (e.ts.month < 1 || e.ts.month > 12)
                throw FormatError("month out of range");
            if (e.split != "train" && e.split != "validation" && e.split != "test")
                throw FormatError("bad split label: " + e.split);
            out.push_back(std::move(e));
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception& ex) {
            throw FormatError("bad manifest line at " + where + ": " + ex.what());
        }
    }
    return out;
}

DatasetSplit load_split(const std::string& manifest_path, Protocol protocol)
{
    const auto entries = read_manifest(manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();
    auto resolve = [&](const std::string& p) {
        const fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    DatasetSplit out;
    out.protocol = protocol;
    for (const ManifestEntry& e : entries) {
        PatchPair pair{e.pair_id, read_grid(resolve(e.lr_path)),
                       read_grid(resolve(e.hr_path)), e.alpha};
        if (pair.hr.height() != pair.lr.height() * e.alpha ||
            pair.hr.width() != pair.lr.width() * e.alpha)
            throw FormatError("pair dims inconsistent with alpha: " + e.pair_id);
        if (pair.hr.compound() != pair.lr.compound() ||
            !(pair.hr.timestamp() == pair.lr.timestamp()))
            throw FormatError("pair metadata mismatch: " + e.pair_id);
        if (e.split == "train")
            out.train.push_back(std::move(pair));
        else if (e.split == "validation")
            out.validation.push_back(std::move(pair));
        else
            out.test.push_back(std::move(pair));
    }
    return out;
}

} // namespace bvoc
