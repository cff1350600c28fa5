#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace salience {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws SchemaError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// splitmix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Seeded 64-bit string hash (FNV-1a followed by a seeded mix).
constexpr std::uint64_t seeded_hash(std::string_view bytes, std::uint64_t seed) noexcept {
    return mix64(fnv1a64(bytes) ^ mix64(seed));
}

}  // namespace salience
