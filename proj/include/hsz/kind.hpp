#ifndef HSZ_KIND_HPP
#define HSZ_KIND_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hsz/error.hpp"

namespace hsz {

enum class CompressorKind : std::uint8_t { HSZP = 0, HSZP_ND = 1, HSZX = 2, HSZX_ND = 3 };

/// Decompression stages, numbered as the container exposes them.
enum class Stage : std::uint8_t { Meta = 1, Decorrelated = 2, Quantized = 3, Full = 4 };

inline bool is_hszx_family(CompressorKind k) { return k == CompressorKind::HSZX || k == CompressorKind::HSZX_ND; }
inline bool is_nd(CompressorKind k) { return k == CompressorKind::HSZP_ND || k == CompressorKind::HSZX_ND; }

inline bool supports_stage(CompressorKind k, Stage s) { return s != Stage::Meta || is_hszx_family(k); }

inline std::string_view to_string(CompressorKind k) {
    switch (k) {
        case CompressorKind::HSZP: return "hszp";
        case CompressorKind::HSZP_ND: return "hszp-nd";
        case CompressorKind::HSZX: return "hszx";
        case CompressorKind::HSZX_ND: return "hszx-nd";
    }
    return "?";
}

inline std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::Meta: return "meta";
        case Stage::Decorrelated: return "decorrelated";
        case Stage::Quantized: return "quantized";
        case Stage::Full: return "full";
    }
    return "?";
}

inline std::optional<CompressorKind> parse_kind(std::string_view s) {
    for (auto k : {CompressorKind::HSZP, CompressorKind::HSZP_ND, CompressorKind::HSZX, CompressorKind::HSZX_ND})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

inline std::optional<Stage> parse_stage(std::string_view s) {
    for (auto st : {Stage::Meta, Stage::Decorrelated, Stage::Quantized, Stage::Full})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

inline CompressorKind kind_from_byte(std::uint8_t b) {
    if (b > 3) fail(ErrorCode::CorruptFile, "unknown compressor kind " + std::to_string(b));
    return static_cast<CompressorKind>(b);
}

/// Block extents used when the caller gives none: 32 flat, 8x8, 8x8x8.
inline std::vector<std::size_t> default_block_dims(CompressorKind k, std::size_t rank) {
    if (!is_nd(k)) return {32};
    return std::vector<std::size_t>(rank, 8);
}

}  // namespace hsz

#endif
