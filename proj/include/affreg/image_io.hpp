#pragma once

#include <filesystem>

#include "affreg/image.hpp"

namespace affreg {

// Reads PGM (P5, 8-bit), PPM (P6, 8-bit) or PNG (8-bit gray/RGB/RGBA).
// Color pixels convert to gray with luma weights 0.299/0.587/0.114;
// pixels with r == g == b keep their byte value exactly.
// Throws io_error (missing/unreadable), unsupported_format_error, or
// corrupt_file_error, each with a distinct message.
Image load_image(const std::filesystem::path& path);

// Rounds and clamps intensities to [0, 255].
void save_pgm(const Image& img, const std::filesystem::path& path);
void save_png(const Image& img, const std::filesystem::path& path);

// Dispatches on the extension: .png goes to save_png, anything else to PGM.
void save_image(const Image& img, const std::filesystem::path& path);

bool png_supported();

}  // namespace affreg
