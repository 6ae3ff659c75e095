#include "bvocsr.h"

#include <cstring>
#include <string>

#include "core/commands.hpp"
#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/grid.hpp"
#include "core/metrics.hpp"

namespace {

thread_local std::string g_last_error;

bvocsr_status fail(bvocsr_status code, const char* what)
{
    g_last_error = what;
    return code;
}

template <typename Fn>
bvocsr_status guarded(Fn&& fn)
{
    try {
        fn();
        g_last_error.clear();
        return BVOCSR_OK;
    } catch (const bvoc::DomainError& e) {
        return fail(BVOCSR_E_DOMAIN, e.what());
    } catch (const bvoc::FormatError& e) {
        return fail(BVOCSR_E_FORMAT, e.what());
    } catch (const bvoc::IoError& e) {
        return fail(BVOCSR_E_IO, e.what());
    } catch (const bvoc::ShapeError& e) {
        return fail(BVOCSR_E_SHAPE, e.what());
    } catch (const bvoc::ConfigError& e) {
        return fail(BVOCSR_E_CONFIG, e.what());
    } catch (const bvoc::StateError& e) {
        return fail(BVOCSR_E_STATE, e.what());
    } catch (const bvoc::InsufficientDataError& e) {
        return fail(BVOCSR_E_INSUFFICIENT_DATA, e.what());
    } catch (const bvoc::DegenerateInputError& e) {
        return fail(BVOCSR_E_DEGENERATE_INPUT, e.what());
    } catch (const bvoc::DegenerateSplitError& e) {
        return fail(BVOCSR_E_DEGENERATE_SPLIT, e.what());
    } catch (const bvoc::NumericsError& e) {
        return fail(BVOCSR_E_NUMERICS, e.what());
    } catch (const std::exception& e) {
        return fail(BVOCSR_E_UNKNOWN, e.what());
    } catch (...) {
        return fail(BVOCSR_E_UNKNOWN, "unknown failure");
    }
}

bvoc::Mat mat_from(const double* data, size_t height, size_t width)
{
    if (data == nullptr)
        throw bvoc::DomainError("null buffer");
    bvoc::Mat m(height, width);
    std::memcpy(m.v.data(), data, height * width * sizeof(double));
    return m;
}

} // namespace

struct bvocsr_grid {
    bvoc::EmissionGrid g;
};

extern "C" {

const char* bvocsr_version(void)
{
    return bvoc::kVersion;
}

const char* bvocsr_last_error(void)
{
    return g_last_error.c_str();
}

bvocsr_status bvocsr_run(const char* command, const char* const* keys,
                         const char* const* values, size_t n)
{
    return guarded([&] {
        if (command == nullptr)
            throw bvoc::ConfigError("null command");
        if (n > 0 && (keys == nullptr || values == nullptr))
            throw bvoc::ConfigError("null key/value arrays");
        bvoc::RunConfig cfg;
        for (size_t i = 0; i < n; ++i) {
            if (keys[i] == nullptr || values[i] == nullptr)
                throw bvoc::ConfigError("null key or value");
            cfg.set(keys[i], values[i]);
        }
        bvoc::run_command(command, cfg);
    });
}

bvocsr_status bvocsr_run_with_file(const char* command, const char* config_path,
                                   const char* const* keys, const char* const* values,
                                   size_t n)
{
    return guarded([&] {
        if (command == nullptr)
            throw bvoc::ConfigError("null command");
        if (n > 0 && (keys == nullptr || values == nullptr))
            throw bvoc::ConfigError("null key/value arrays");
        bvoc::RunConfig cfg;
        if (config_path != nullptr && config_path[0] != '\0')
            cfg = bvoc::read_config(config_path);
        for (size_t i = 0; i < n; ++i) {
            if (keys[i] == nullptr || values[i] == nullptr)
                throw bvoc::ConfigError("null key or value");
            cfg.set(keys[i], values[i]);
        }
        bvoc::run_command(command, cfg);
    });
}

bvocsr_status bvocsr_grid_read(const char* path, bvocsr_grid** out)
{
    return guarded([&] {
        if (path == nullptr || out == nullptr)
            throw bvoc::DomainError("null argument");
        *out = new bvocsr_grid{bvoc::read_grid(path)};
    });
}

bvocsr_status bvocsr_grid_write(const bvocsr_grid* grid, const char* path)
{
    return guarded([&] {
        if (grid == nullptr || path == nullptr)
            throw bvoc::DomainError("null argument");
        bvoc::write_grid(grid->g, path);
    });
}

void bvocsr_grid_free(bvocsr_grid* grid)
{
    delete grid;
}

bvocsr_status bvocsr_grid_dims(const bvocsr_grid* grid, size_t* height, size_t* width)
{
    return guarded([&] {
        if (grid == nullptr || height == nullptr || width == nullptr)
            throw bvoc::DomainError("null argument");
        *height = grid->g.height();
        *width = grid->g.width();
    });
}

bvocsr_status bvocsr_grid_values(const bvocsr_grid* grid, double* out, size_t capacity)
{
    return guarded([&] {
        if (grid == nullptr || out == nullptr)
            throw bvoc::DomainError("null argument");
        const std::vector<double>& v = grid->g.values().v;
        if (capacity < v.size())
            throw bvoc::ShapeError("buffer holds " + std::to_string(capacity) +
                                   " values, grid has " + std::to_string(v.size()));
        std::memcpy(out, v.data(), v.size() * sizeof(double));
    });
}

bvocsr_status bvocsr_ssim(const double* a, const double* b, size_t height,
                          size_t width, double* out)
{
    return guarded([&] {
        if (out == nullptr)
            throw bvoc::DomainError("null output");
        *out = bvoc::ssim(mat_from(a, height, width), mat_from(b, height, width));
    });
}

bvocsr_status bvocsr_nmse_db(const double* hr, const double* sr, size_t height,
                             size_t width, double* out)
{
    return guarded([&] {
        if (out == nullptr)
            throw bvoc::DomainError("null output");
        *out = bvoc::nmse_db(mat_from(hr, height, width), mat_from(sr, height, width));
    });
}

bvocsr_status bvocsr_distribution_distance(const double* a, const double* b,
                                           size_t height, size_t width,
                                           uint32_t n_bins, double* out)
{
    return guarded([&] {
        if (out == nullptr)
            throw bvoc::DomainError("null output");
        *out = bvoc::distribution_distance(mat_from(a, height, width),
                                           mat_from(b, height, width), n_bins);
    });
}

} // extern "C"
