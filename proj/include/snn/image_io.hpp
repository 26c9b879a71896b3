#pragma once

#include <filesystem>

#include "snn/types.hpp"

namespace snn {

/// Reads an 8-bit grayscale PGM (P5) or PNG. Other bit depths and colour
/// images are rejected with DataError.
Image load_image(const std::filesystem::path& path);

/// Writes pixels rounded and clamped to 0..255 as binary PGM (P5).
void save_pgm(const std::filesystem::path& path, const Matrix& pixels);

}  // namespace snn
