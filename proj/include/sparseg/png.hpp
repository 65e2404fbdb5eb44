#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sparseg {

// Minimal RGB8 PNG writer (zlib-deflated, filter 0 scanlines).
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<std::uint8_t>& rgb);

}  // namespace sparseg
