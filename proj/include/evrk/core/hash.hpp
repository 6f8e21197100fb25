// FNV-1a 64-bit hashing for config checksums embedded in artifacts.
#pragma once

#include <cstdint>
#include <string_view>

namespace evrk::core {

[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace evrk::core
