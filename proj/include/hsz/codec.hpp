#ifndef HSZ_CODEC_HPP
#define HSZ_CODEC_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hsz/error.hpp"

namespace hsz {

inline constexpr std::size_t kChunkCapacity = 32;

/// Fixed-rate sign-magnitude chunk.
///
/// Byte layout: [bitwidth u8] then, when bitwidth > 0, ceil(count/8) sign bytes (bit j of
/// byte j/8, LSB first, set for negative values) followed by the magnitudes packed LSB-first
/// into a little-endian bit buffer, element j at bits [j*b, (j+1)*b), zero padded to a byte.
struct EncodedChunk {
    std::size_t count = 0;
    std::uint8_t bitwidth = 0;
    std::vector<std::uint8_t> signs;
    std::vector<std::uint8_t> magnitudes;

    std::size_t byte_size() const { return 1 + signs.size() + magnitudes.size(); }

    void append_to(std::vector<std::uint8_t> &out) const {
        out.push_back(bitwidth);
        out.insert(out.end(), signs.begin(), signs.end());
        out.insert(out.end(), magnitudes.begin(), magnitudes.end());
    }
};

inline std::size_t chunk_byte_size(std::size_t count, unsigned bitwidth) {
    if (bitwidth == 0) return 1;
    return 1 + (count + 7) / 8 + (count * bitwidth + 7) / 8;
}

inline EncodedChunk encode_chunk(std::span<const std::int32_t> values) {
    require(!values.empty() && values.size() <= kChunkCapacity, ErrorCode::InvalidArgument,
            "chunk must hold 1 to 32 values");
    EncodedChunk c;
    c.count = values.size();
    std::uint32_t max_mag = 0;
    for (auto v : values) {
        require(v != std::numeric_limits<std::int32_t>::min(), ErrorCode::InvalidArgument,
                "value -2^31 has no sign-magnitude representation");
        max_mag = std::max(max_mag, static_cast<std::uint32_t>(v < 0 ? -v : v));
    }
    c.bitwidth = static_cast<std::uint8_t>(std::bit_width(max_mag));
    if (c.bitwidth == 0) return c;

    c.signs.assign((c.count + 7) / 8, 0);
    c.magnitudes.assign((c.count * c.bitwidth + 7) / 8, 0);
    std::uint64_t acc = 0;
    unsigned filled = 0;
    std::size_t out = 0;
    for (std::size_t j = 0; j < c.count; ++j) {
        std::int32_t v = values[j];
        if (v < 0) c.signs[j / 8] |= static_cast<std::uint8_t>(1u << (j % 8));
        acc |= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v < 0 ? -v : v)) << filled;
        filled += c.bitwidth;
        while (filled >= 8) {
            c.magnitudes[out++] = static_cast<std::uint8_t>(acc & 0xff);
            acc >>= 8;
            filled -= 8;
        }
    }
    if (filled > 0) c.magnitudes[out] = static_cast<std::uint8_t>(acc & 0xff);
    return c;
}

inline void encode_chunk_into(std::span<const std::int32_t> values, std::vector<std::uint8_t> &out) {
    encode_chunk(values).append_to(out);
}

/// Decodes `out.size()` values from the front of `bytes`; returns the bytes consumed.
inline std::size_t decode_chunk(std::span<const std::uint8_t> bytes, std::span<std::int32_t> out) {
    const std::size_t count = out.size();
    require(count >= 1 && count <= kChunkCapacity, ErrorCode::InvalidArgument, "chunk must hold 1 to 32 values");
    if (bytes.empty()) fail(ErrorCode::CorruptStream, "chunk truncated before bitwidth byte");
    unsigned b = bytes[0];
    if (b > 32) fail(ErrorCode::CorruptStream, "chunk bitwidth exceeds 32");
    std::size_t need = chunk_byte_size(count, b);
    if (bytes.size() < need) fail(ErrorCode::CorruptStream, "chunk payload shorter than declared");
    if (b == 0) {
        std::fill(out.begin(), out.end(), 0);
        return 1;
    }
    const std::uint8_t *signs = bytes.data() + 1;
    const std::uint8_t *mags = signs + (count + 7) / 8;
    const std::uint64_t mask = (b == 32) ? 0xffffffffull : ((1ull << b) - 1);
    std::uint64_t acc = 0;
    unsigned avail = 0;
    std::size_t in = 0;
    for (std::size_t j = 0; j < count; ++j) {
        while (avail < b) {
            acc |= static_cast<std::uint64_t>(mags[in++]) << avail;
            avail += 8;
        }
        auto mag = static_cast<std::uint32_t>(acc & mask);
        acc >>= b;
        avail -= b;
        bool neg = (signs[j / 8] >> (j % 8)) & 1u;
        if (neg && mag == 0) fail(ErrorCode::CorruptStream, "negative zero in chunk");
        if (mag > static_cast<std::uint32_t>(std::numeric_limits<std::int32_t>::max()))
            fail(ErrorCode::CorruptStream, "chunk magnitude exceeds 31 bits");
        out[j] = neg ? -static_cast<std::int32_t>(mag) : static_cast<std::int32_t>(mag);
    }
    return need;
}

inline std::vector<std::int32_t> decode_chunk(const EncodedChunk &chunk) {
    std::vector<std::uint8_t> bytes;
    chunk.append_to(bytes);
    std::vector<std::int32_t> out(chunk.count);
    decode_chunk(bytes, out);
    return out;
}

}  // namespace hsz

#endif
