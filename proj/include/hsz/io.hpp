#ifndef HSZ_IO_HPP
#define HSZ_IO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "hsz/container.hpp"
#include "hsz/error.hpp"
#include "hsz/field.hpp"

namespace hsz {

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    in.seekg(0, std::ios::end);
    auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    std::vector<std::uint8_t> bytes(size);
    if (size && !in.read(reinterpret_cast<char *>(bytes.data()), static_cast<std::streamsize>(size)))
        fail(ErrorCode::Io, "short read on " + path.string());
    return bytes;
}

inline void write_file(const std::filesystem::path &path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot create " + path.string());
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::Io, "write failed on " + path.string());
}

template <class W>
std::vector<std::uint8_t> to_le_bytes(std::span<const W> words) {
    static_assert(sizeof(W) == 4);
    std::vector<std::uint8_t> bytes(words.size() * 4);
    for (std::size_t i = 0; i < words.size(); ++i) {
        auto u = std::bit_cast<std::uint32_t>(words[i]);
        for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<std::uint8_t>(u >> (8 * b));
    }
    return bytes;
}

}  // namespace detail

/// Headerless little-endian float32, row-major. The file length must be exactly 4 * N.
inline FieldF32 read_raw(const std::filesystem::path &path, const std::vector<std::size_t> &dims) {
    require(!dims.empty(), ErrorCode::InvalidArgument, "dims are required");
    GridShape shape(dims);
    auto bytes = detail::read_file(path);
    const std::size_t expected = 4 * shape.size();
    if (bytes.size() != expected)
        fail(ErrorCode::InvalidArgument, path.string() + ": expected " + std::to_string(expected) + " bytes for dims " +
                                             shape.to_string() + ", found " + std::to_string(bytes.size()));
    FieldF32 f(shape);
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
        f.values[i] = std::bit_cast<float>(u);
    }
    require_finite(f);
    return f;
}

inline void write_raw(const std::filesystem::path &path, std::span<const float> values) {
    detail::write_file(path, detail::to_le_bytes(values));
}

inline void write_raw(const std::filesystem::path &path, const FieldF32 &f) { write_raw(path, std::span(f.values)); }

inline void write_i32(const std::filesystem::path &path, std::span<const std::int32_t> values) {
    detail::write_file(path, detail::to_le_bytes(values));
}

inline std::vector<std::int32_t> read_i32(const std::filesystem::path &path) {
    auto bytes = detail::read_file(path);
    require(bytes.size() % 4 == 0, ErrorCode::InvalidArgument, "int32 file length is not a multiple of 4");
    std::vector<std::int32_t> out(bytes.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
        out[i] = static_cast<std::int32_t>(u);
    }
    return out;
}

inline CompressedStream read_compressed(const std::filesystem::path &path) {
    auto bytes = detail::read_file(path);
    return from_bytes(bytes);
}

inline void write_compressed(const std::filesystem::path &path, const CompressedStream &s) {
    detail::write_file(path, to_bytes(s));
}

}  // namespace hsz

#endif
