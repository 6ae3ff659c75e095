#include "core/heatmap.hpp"

#include <cmath>
#include <cstdio>

#include "core/binio.hpp"
#include "core/errors.hpp"

namespace bvoc {

namespace {

struct Rgb {
    uint8_t r, g, b;
};

constexpr Rgb kBackground = {24, 24, 32}; // zero cells

// Dark-blue to red ramp, linearly interpolated between fixed stops.
constexpr Rgb kStops[] = {
    {13, 8, 135},
    {84, 2, 163},
    {156, 23, 158},
    {205, 62, 78},
    {246, 147, 34},
    {252, 225, 56},
};
constexpr int kNumStops = 6;

Rgb color_at(double u)
{
    if (u <= 0.0)
        return kStops[0];
    if (u >= 1.0)
        return kStops[kNumStops - 1];
    const double x = u * (kNumStops - 1);
    const int i = static_cast<int>(x);
    const double t = x - i;
    const Rgb a = kStops[i];
    const Rgb b = kStops[i + 1];
    auto lerp = [t](uint8_t p, uint8_t q) {
        return static_cast<uint8_t>(std::lround(p + t * (q - p)));
    };
    return {lerp(a.r, b.r), lerp(a.g, b.g), lerp(a.b, b.b)};
}

void write_ppm(const std::string& path, size_t w, size_t h, const std::vector<uint8_t>& rgb)
{
    char header[64];
    const int n = std::snprintf(header, sizeof(header), "P6\n%zu %zu\n255\n", w, h);
    std::string bytes(header, static_cast<size_t>(n));
    bytes.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
    binio::write_file(path, bytes);
}

} // namespace

std::vector<uint8_t> heatmap_pixels(const Mat& values)
{
    double vmin = 0.0, vmax = 0.0;
    bool any = false;
    for (double x : values.v) {
        if (x > 0.0) {
            if (!any || x < vmin)
                vmin = x;
            if (!any || x > vmax)
                vmax = x;
            any = true;
        }
    }
    const double lmin = any ? std::log10(vmin) : 0.0;
    const double lmax = any ? std::log10(vmax) : 0.0;
    const double span = lmax - lmin;

    std::vector<uint8_t> rgb;
    rgb.reserve(values.size() * 3);
    for (double x : values.v) {
        Rgb c = kBackground;
        if (x > 0.0)
            c = color_at(span > 0.0 ? (std::log10(x) - lmin) / span : 0.5);
        rgb.push_back(c.r);
        rgb.push_back(c.g);
        rgb.push_back(c.b);
    }
    return rgb;
}

void render_heatmap(const EmissionGrid& grid, const std::string& path)
{
    write_ppm(path, grid.width(), grid.height(), heatmap_pixels(grid.values()));
}

void render_triptych(const EmissionGrid& hr,
                     const EmissionGrid& lr,
                     const EmissionGrid& sr,
                     const std::string& path)
{
    if (hr.height() != sr.height() || hr.width() != sr.width())
        throw ShapeError("triptych: HR and SR dimensions differ");
    if (hr.height() % lr.height() != 0 || hr.width() % lr.width() != 0)
        throw ShapeError("triptych: HR dimensions are not a multiple of LR");
    const size_t rep_r = hr.height() / lr.height();
    const size_t rep_c = hr.width() / lr.width();

    const auto px_hr = heatmap_pixels(hr.values());
    const auto px_lr = heatmap_pixels(lr.values());
    const auto px_sr = heatmap_pixels(sr.values());

    const size_t h = hr.height();
    const size_t w = hr.width();
    const size_t sep = 2;
    const size_t out_w = 3 * w + 2 * sep;
    std::vector<uint8_t> out(out_w * h * 3, 255);

    auto blit = [&](const std::vector<uint8_t>& src, size_t src_w, size_t x0, size_t rr, size_t rc) {
        for (size_t y = 0; y < h; ++y) {
            for (size_t x = 0; x < w; ++x) {
                const size_t si = ((y / rr) * src_w + (x / rc)) * 3;
                const size_t di = (y * out_w + x0 + x) * 3;
                out[di] = src[si];
                out[di + 1] = src[si + 1];
                out[di + 2] = src[si + 2];
            }
        }
    };
    blit(px_hr, w, 0, 1, 1);
    blit(px_lr, lr.width(), w + sep, rep_r, rep_c);
    blit(px_sr, w, 2 * (w + sep), 1, 1);

    write_ppm(path, out_w, h, out);
}

} // namespace bvoc
