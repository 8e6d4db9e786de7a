#pragma once

#include "lafb/tensor.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace lafb {

/// Maps [0,1] to the nearest 8-bit level.
inline std::uint8_t to_byte(double v)
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline double from_byte(std::uint8_t b)
{
    return static_cast<double>(b) / 255.0;
}

/// Rounds every entry to the 8-bit grid, matching a PNG save/load cycle.
inline Tensor quantize8(Tensor t)
{
    for (double& v : t.data()) v = from_byte(to_byte(v));
    return t;
}

namespace detail {

inline void write_png(const std::string& path, const Tensor& chw, std::uint32_t format, std::size_t channels)
{
    if (chw.rank() != 3 || chw.dim(0) != channels)
        throw DimensionError("png: expected [" + std::to_string(channels) + ",H,W] for " + path + ", got " +
                             shape_str(chw.shape()));
    const std::size_t h = chw.dim(1), w = chw.dim(2);
    std::vector<std::uint8_t> buf(h * w * channels);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < channels; ++c) buf[(y * w + x) * channels + c] = to_byte(chw[(c * h + y) * w + x]);
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = format;
    if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
        throw IoError("png: cannot write " + path + ": " + img.message);
}

inline Tensor read_png(const std::string& path, std::uint32_t format, std::size_t channels)
{
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) throw IoError("png: cannot read " + path + ": " + img.message);
    img.format = format;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&img);
        throw IoError("png: cannot decode " + path + ": " + img.message);
    }
    const std::size_t h = img.height, w = img.width;
    Tensor out(Shape{channels, h, w});
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < channels; ++c) out[(c * h + y) * w + x] = from_byte(buf[(y * w + x) * channels + c]);
    return out;
}

}  // namespace detail

inline void write_png_rgb(const std::string& path, const Tensor& chw)
{
    detail::write_png(path, chw, PNG_FORMAT_RGB, 3);
}

inline void write_png_gray(const std::string& path, const Tensor& chw)
{
    detail::write_png(path, chw, PNG_FORMAT_GRAY, 1);
}

/// Any PNG as [3,H,W] in [0,1]; gray files are replicated.
inline Tensor read_png_rgb(const std::string& path)
{
    return detail::read_png(path, PNG_FORMAT_RGB, 3);
}

/// Any PNG as [1,H,W] in [0,1]; color files are converted to gray by libpng.
inline Tensor read_png_gray(const std::string& path)
{
    return detail::read_png(path, PNG_FORMAT_GRAY, 1);
}

}  // namespace lafb
