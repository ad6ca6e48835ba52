#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace legrag::hashing {

/// SHA-256 of the input, as a lowercase hex string.
std::string sha256_hex(std::string_view data);

/// CRC-32 (zlib polynomial) of the input.
std::uint32_t crc32(std::string_view data);

/// FNV-1a 64-bit, used by the deterministic test embedding provider.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace legrag::hashing
