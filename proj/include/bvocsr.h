/* C interface to the BVOC super-resolution library. All functions return a
 * status code; on failure bvocsr_last_error() carries the message for the
 * calling thread. No function writes partial output on failure. */

#ifndef BVOCSR_H
#define BVOCSR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BVOCSR_API __declspec(dllexport)
#else
#define BVOCSR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bvocsr_status {
    BVOCSR_OK = 0,
    BVOCSR_E_DOMAIN = 1,
    BVOCSR_E_FORMAT = 2,
    BVOCSR_E_IO = 3,
    BVOCSR_E_SHAPE = 4,
    BVOCSR_E_CONFIG = 5,
    BVOCSR_E_STATE = 6,
    BVOCSR_E_INSUFFICIENT_DATA = 7,
    BVOCSR_E_DEGENERATE_INPUT = 8,
    BVOCSR_E_DEGENERATE_SPLIT = 9,
    BVOCSR_E_NUMERICS = 10,
    BVOCSR_E_UNKNOWN = 11
} bvocsr_status;

BVOCSR_API const char* bvocsr_version(void);

/* Message of the most recent failing call on this thread ("" if none). The
 * pointer stays valid until the thread's next library call. */
BVOCSR_API const char* bvocsr_last_error(void);

/* Runs one batch command: "synth", "prepare", "fit-transform", "train",
 * "evaluate", "super-resolve" or "report", configured by n key=value
 * settings. Deterministic for a fixed configuration. */
BVOCSR_API bvocsr_status bvocsr_run(const char* command, const char* const* keys,
                                    const char* const* values, size_t n);

/* Like bvocsr_run, but settings are first loaded from a key=value config
 * file (blank lines and '#' comments ignored); the explicit pairs are then
 * applied on top as overrides. config_path may be NULL for none. */
BVOCSR_API bvocsr_status bvocsr_run_with_file(const char* command,
                                              const char* config_path,
                                              const char* const* keys,
                                              const char* const* values, size_t n);

/* ---- emission grids (EMG1 files) ---- */

typedef struct bvocsr_grid bvocsr_grid;

BVOCSR_API bvocsr_status bvocsr_grid_read(const char* path, bvocsr_grid** out);
BVOCSR_API bvocsr_status bvocsr_grid_write(const bvocsr_grid* grid, const char* path);
BVOCSR_API void bvocsr_grid_free(bvocsr_grid* grid);

BVOCSR_API bvocsr_status bvocsr_grid_dims(const bvocsr_grid* grid, size_t* height,
                                          size_t* width);
/* Copies height*width row-major values; capacity is the buffer length. */
BVOCSR_API bvocsr_status bvocsr_grid_values(const bvocsr_grid* grid, double* out,
                                            size_t capacity);

/* ---- metrics on row-major height x width buffers ---- */

BVOCSR_API bvocsr_status bvocsr_ssim(const double* a, const double* b, size_t height,
                                     size_t width, double* out);
BVOCSR_API bvocsr_status bvocsr_nmse_db(const double* hr, const double* sr,
                                        size_t height, size_t width, double* out);
BVOCSR_API bvocsr_status bvocsr_distribution_distance(const double* a, const double* b,
                                                      size_t height, size_t width,
                                                      uint32_t n_bins, double* out);

#ifdef __cplusplus
}
#endif

#endif /* BVOCSR_H */
