#include "sgaudit/common/digest.hpp"

#include "sgaudit/common/error.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <array>

namespace sgaudit {
namespace {

std::array<unsigned char, SHA256_DIGEST_LENGTH> sha256_raw(const void* data, std::size_t size) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> out{};
    SHA256(static_cast<const unsigned char*>(data), size, out.data());
    return out;
}

std::string to_hex(std::span<const unsigned char> raw) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(raw.size() * 2);
    for (unsigned char b : raw) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0f]);
    }
    return out;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> data) {
    return to_hex(sha256_raw(data.data(), data.size()));
}

std::string sha256_hex(std::string_view text) {
    return to_hex(sha256_raw(text.data(), text.size()));
}

std::uint64_t hash64(std::string_view text) {
    auto raw = sha256_raw(text.data(), text.size());
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | raw[i];
    return v;
}

std::string base64_encode(std::span<const std::uint8_t> data) {
    if (data.empty()) return {};
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                            static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

Bytes base64_decode(std::string_view text) {
    if (text.empty()) return {};
    if (text.size() % 4 != 0) throw ValidationError("base64 payload has invalid length");
    Bytes out(3 * text.size() / 4);
    int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                            static_cast<int>(text.size()));
    if (n < 0) throw ValidationError("base64 payload is malformed");
    // EVP_DecodeBlock keeps the padding bytes as zeros.
    std::size_t pad = 0;
    if (text.back() == '=') ++pad;
    if (text.size() >= 2 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

}  // namespace sgaudit
