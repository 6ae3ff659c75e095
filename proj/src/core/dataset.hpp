#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/grid.hpp"

namespace bvoc {

/// One (LR, HR) training example. hr dims are alpha x lr dims; both grids
/// share bounds, timestamp and compound. id encodes the patch origin
/// (source map, row/col offset, alpha).
struct PatchPair {
    std::string id;
    EmissionGrid lr;
    EmissionGrid hr;
    uint32_t alpha;
};

enum class Protocol : uint8_t { random_70_20_10 = 0, time = 1, time_and_area = 2 };

Protocol protocol_from_name(const std::string& name);
std::string protocol_name(Protocol p);

struct DatasetSplit {
    Protocol protocol = Protocol::random_70_20_10;
    std::vector<PatchPair> train, validation, test;
};

struct Patch {
    EmissionGrid grid;
    uint32_t row_off, col_off;
};

/// Non-overlapping row-major tiling; trailing partial tiles are discarded.
/// Patch bounds are carved out of the parent's bounds.
std::vector<Patch> slice_patches(const EmissionGrid& grid, size_t patch_size);

/// True iff the strictly-positive cell fraction is >= min_nonzero_fraction
/// (the boundary is kept).
bool sparsity_filter(const EmissionGrid& patch, double min_nonzero_fraction);

/// LR synthesis: lr = clamp_non_negative(bicubic(hr, 1/alpha)).
std::vector<PatchPair> make_pairs(const std::string& source_id,
                                  const std::vector<Patch>& hr_patches,
                                  uint32_t alpha, bool antialias = false);

/// 70/20/10 by floor arithmetic over a seeded Fisher-Yates shuffle.
DatasetSplit split_random(std::vector<PatchPair> pairs, uint64_t seed);

/// Train <= 2014, validation 2015-2018, test >= 2019 (boundary years go to
/// the earlier set).
DatasetSplit split_time(std::vector<PatchPair> pairs);

struct Region {
    double lat_min, lat_max, lon_min, lon_max;
};

/// Time split first; then train/validation keep only patches fully inside
/// train_region, test keeps only patches fully outside, and straddling
/// patches are dropped. An empty train or test set is a DegenerateSplitError.
DatasetSplit split_time_area(std::vector<PatchPair> pairs, const Region& train_region);

/// Deterministic uniform subsample of the training list, original order
/// preserved; validation/test untouched.
DatasetSplit subsample_to_cardinality(DatasetSplit split, size_t target, uint64_t seed);

/// Synthetic monthly emission maps: anisotropic Gaussian bumps with
/// log-uniform amplitudes, a west-east intensity gradient (so area-disjoint
/// splits are genuinely out-of-distribution), seasonal modulation over a
/// 2000-2020 calendar, and per-map nonzero fraction targeted in [0.02, 0.6].
/// Values are clamped to the [1e-30, 1e-9] envelope (tiny positives flush
/// to zero). Deterministic for a fixed seed.
std::vector<EmissionGrid> synth_emissions(uint64_t seed, size_t n_maps, size_t height,
                                          size_t width, Compound profile);

/// Halves resolution metadata-consistently: same bounds, dims / factor,
/// cell size x factor. Envelope is re-imposed after resampling.
EmissionGrid coarsen(const EmissionGrid& grid, uint32_t factor, bool antialias = false);

struct ManifestEntry {
    std::string pair_id, lr_path, hr_path;
    uint32_t alpha;
    Timestamp ts;
    Compound compound;
    std::string split; // train | validation | test

    bool operator==(const ManifestEntry&) const = default;
};

/// Text manifest, one `pair-id,lr-path,hr-path,alpha,year,month,compound,split`
/// line per pair. Paths are stored relative to the manifest's directory.
void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);
std::vector<ManifestEntry> read_manifest(const std::string& path);

/// Loads the referenced EMG1 grids and regroups them by split label.
DatasetSplit load_split(const std::string& manifest_path, Protocol protocol);

} // namespace bvoc
