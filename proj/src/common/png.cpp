#include "sgaudit/common/png.hpp"

#include "sgaudit/common/error.hpp"

#include <zlib.h>

#include <array>
#include <string_view>

namespace sgaudit {
namespace {

constexpr std::array<std::uint8_t, 8> kSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void put_u32(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
           (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void put_chunk(Bytes& out, std::string_view type, std::span<const std::uint8_t> data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    std::size_t crc_start = out.size();
    out.insert(out.end(), type.begin(), type.end());
    out.insert(out.end(), data.begin(), data.end());
    uLong crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

Bytes encode_png_rgb(std::uint32_t width, std::uint32_t height, std::span<const std::uint8_t> rgb) {
    if (width == 0 || height == 0 || rgb.size() != std::size_t{width} * height * 3) {
        throw ValidationError("pixel buffer does not match image dimensions");
    }
    Bytes out(kSignature.begin(), kSignature.end());

    Bytes ihdr;
    put_u32(ihdr, width);
    put_u32(ihdr, height);
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // depth 8, truecolor, deflate, filter 0, no interlace
    put_chunk(out, "IHDR", ihdr);

    // Each scanline is prefixed with filter type 0.
    Bytes raw;
    raw.reserve((std::size_t{width} * 3 + 1) * height);
    for (std::uint32_t y = 0; y < height; ++y) {
        raw.push_back(0);
        auto row = rgb.subspan(std::size_t{y} * width * 3, std::size_t{width} * 3);
        raw.insert(raw.end(), row.begin(), row.end());
    }
    uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
    Bytes packed(packed_size);
    if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
        throw IoError("zlib compression failed");
    }
    packed.resize(packed_size);
    put_chunk(out, "IDAT", packed);
    put_chunk(out, "IEND", {});
    return out;
}

std::optional<ImageSize> png_dimensions(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 24) return std::nullopt;
    for (std::size_t i = 0; i < kSignature.size(); ++i) {
        if (bytes[i] != kSignature[i]) return std::nullopt;
    }
    if (std::string_view(reinterpret_cast<const char*>(bytes.data() + 12), 4) != "IHDR") return std::nullopt;
    ImageSize size{get_u32(bytes, 16), get_u32(bytes, 20)};
    if (size.width == 0 || size.height == 0) return std::nullopt;
    return size;
}

}  // namespace sgaudit
