#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace give {

// Canonical name form used for every entity and relation: ASCII-lowercased,
// trimmed, internal whitespace runs (including tabs/newlines) collapsed to
// one space.
std::string normalize_name(std::string_view s);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Uppercase the first ASCII letter; used when rendering statements.
std::string capitalize_first(std::string_view s);

// Split on a single-character delimiter; keeps empty fields.
std::vector<std::string> split(std::string_view s, char delim);

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// SHA-256 digest, 32 raw bytes / lowercase hex.
std::vector<std::uint8_t> sha256_bytes(std::string_view s);
std::string sha256_hex(std::string_view s);

}  // namespace give
