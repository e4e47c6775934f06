#pragma once

// Little-endian binary I/O helpers shared by the dataset and checkpoint
// readers/writers. Byte order is explicit so files are portable.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ifadit/error.hpp"
#include "ifadit/tensor.hpp"

namespace ifadit::binio {

inline void write_bytes(std::ostream& os, const void* data, std::size_t n) {
    os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!os) throw IoError("write failed");
}

inline void write_u8(std::ostream& os, std::uint8_t v) { write_bytes(os, &v, 1); }

inline void write_u16(std::ostream& os, std::uint16_t v) {
    std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
    write_bytes(os, b, 2);
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    write_bytes(os, b, 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    write_bytes(os, b, 8);
}

inline void write_f32_array(std::ostream& os, const std::vector<double>& values) {
    std::vector<std::uint8_t> buf(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const float f = static_cast<float>(values[i]);
        std::uint32_t bits;
        static_assert(sizeof(bits) == sizeof(f));
        __builtin_memcpy(&bits, &f, 4);
        for (int b = 0; b < 4; ++b) buf[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    write_bytes(os, buf.data(), buf.size());
}

inline void read_bytes(std::istream& is, void* data, std::size_t n, const char* what) {
    is.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw FormatError(std::string("truncated file while reading ") + what);
}

inline std::uint8_t read_u8(std::istream& is, const char* what) {
    std::uint8_t v;
    read_bytes(is, &v, 1, what);
    return v;
}

inline std::uint16_t read_u16(std::istream& is, const char* what) {
    std::uint8_t b[2];
    read_bytes(is, b, 2, what);
    return static_cast<std::uint16_t>(b[0] | (std::uint16_t(b[1]) << 8));
}

inline std::uint32_t read_u32(std::istream& is, const char* what) {
    std::uint8_t b[4];
    read_bytes(is, b, 4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t read_u64(std::istream& is, const char* what) {
    std::uint8_t b[8];
    read_bytes(is, b, 8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

inline void read_f32_array(std::istream& is, std::vector<double>& out, std::size_t count,
                           const char* what) {
    std::vector<std::uint8_t> buf(count * 4);
    read_bytes(is, buf.data(), buf.size(), what);
    out.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= std::uint32_t(buf[4 * i + b]) << (8 * b);
        float f;
        __builtin_memcpy(&f, &bits, 4);
        out[i] = static_cast<double>(f);
    }
}

}  // namespace ifadit::binio
