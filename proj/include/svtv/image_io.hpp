#pragma once

#include <filesystem>
#include <string_view>

#include "svtv/types.hpp"

namespace svtv {

// raw_f64: 16-byte header (magic "SVTVIMG1", u32 rows, u32 cols, little-endian)
//          followed by rows*cols little-endian doubles.
// pgm16:   binary P5 with maxval 65535; values are clamped to [0, 1] and rounded.
enum class ImageFormat { pgm16, raw_f64 };

ImageFormat parse_image_format(std::string_view name);
/// raw_f64 for ".img"/".raw", pgm16 for ".pgm".
ImageFormat format_from_extension(const std::filesystem::path& path);

void write_image(const Image& img, const std::filesystem::path& path, ImageFormat format);
void write_image(const Image& img, const std::filesystem::path& path);

/// Reads either format; the file's magic decides, `expected_side` (if nonzero)
/// must match both dimensions.
Image read_image(const std::filesystem::path& path, std::size_t expected_side = 0);

/// Sinograms share the raw container with rows = angles, cols = detectors.
void write_sinogram(const Sinogram& s, const std::filesystem::path& path);
Sinogram read_sinogram(const std::filesystem::path& path);

}  // namespace svtv
