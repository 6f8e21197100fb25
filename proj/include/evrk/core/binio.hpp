// Little-endian primitive readers/writers for model files.
#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace evrk::core {

inline void write_u8(std::ostream& out, std::uint8_t v) {
    out.put(static_cast<char>(v));
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_i32(std::ostream& out, std::int32_t v) {
    write_u32(out, static_cast<std::uint32_t>(v));
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<std::uint64_t>(v));
}

[[nodiscard]] inline std::uint8_t read_u8(std::istream& in) {
    const int c = in.get();
    if (c == std::istream::traits_type::eof()) {
        throw std::invalid_argument("binary read: truncated file");
    }
    return static_cast<std::uint8_t>(c);
}

[[nodiscard]] inline std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(read_u8(in)) << (8 * i);
    return v;
}

[[nodiscard]] inline std::int32_t read_i32(std::istream& in) {
    return static_cast<std::int32_t>(read_u32(in));
}

[[nodiscard]] inline std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(read_u8(in)) << (8 * i);
    return v;
}

[[nodiscard]] inline double read_f64(std::istream& in) {
    return std::bit_cast<double>(read_u64(in));
}

}  // namespace evrk::core
