#pragma once

#include <filesystem>

#include "lmoa/core_types.hpp"

namespace lmoa {

// 8-bit PNG. Grayscale loads as 1 channel, everything else as 3 (palette is
// expanded, alpha is dropped, 16-bit samples are reduced to 8).
ImageTensor read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageTensor& image);

// Binary graymap, magic "P5", maxval 255. Comments are accepted in the header.
ImageTensor read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const ImageTensor& image);

} // namespace lmoa
