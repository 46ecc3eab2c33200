#pragma once

#include "sgaudit/common/digest.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace sgaudit {

struct ImageSize {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
};

/// 8-bit RGB, no interlace. `rgb` is row-major, width*height*3 bytes.
Bytes encode_png_rgb(std::uint32_t width, std::uint32_t height, std::span<const std::uint8_t> rgb);

/// Reads the IHDR chunk; nullopt if the bytes are not a PNG.
std::optional<ImageSize> png_dimensions(std::span<const std::uint8_t> bytes);

}  // namespace sgaudit
