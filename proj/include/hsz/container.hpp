#ifndef HSZ_CONTAINER_HPP
#define HSZ_CONTAINER_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "hsz/codec.hpp"
#include "hsz/error.hpp"
#include "hsz/grid.hpp"
#include "hsz/kind.hpp"

namespace hsz {

inline constexpr std::array<char, 4> kMagic{'H', 'S', 'Z', '1'};
inline constexpr std::uint8_t kFormatVersion = 1;

struct Header {
    CompressorKind kind = CompressorKind::HSZP;
    GridShape shape;
    // One entry per axis. Flat kinds store the 1D block length first and 1 elsewhere.
    std::vector<std::size_t> block_dims{32};
    double eps = 0.0;

    std::size_t element_count() const { return shape.size(); }
};

inline StreamOrder stream_order(CompressorKind k) {
    return k == CompressorKind::HSZX_ND ? StreamOrder::BlockContiguous : StreamOrder::GlobalRowMajor;
}

/// Partition that decorrelation works on. Flat kinds see the data as one long 1D array.
inline BlockGeometry geometry_of(const Header &h) {
    if (is_nd(h.kind)) return BlockGeometry(h.shape, h.block_dims);
    return BlockGeometry(GridShape{h.shape.size()}, {h.block_dims[0]});
}

/// Chunk boundaries in the decorrelated stream.
///
/// The stream is cut into units (decorrelation blocks, or axis-0 hyperplanes for HSZP_ND) and
/// each unit into consecutive runs of at most 32 values, so no chunk straddles a unit. A slab
/// is a run of whole units: one block-row for HSZX_ND, one unit otherwise.
struct ChunkLayout {
    std::vector<std::size_t> unit_offset;   // units + 1 entries
    std::vector<std::size_t> unit_chunk;    // first chunk of each unit, units + 1 entries
    std::vector<std::size_t> chunk_start;   // chunks + 1 entries
    std::size_t units_per_slab = 1;
    std::size_t slab_rows = 1;              // axis-0 extent of a full slab (nd kinds)

    std::size_t unit_count() const { return unit_offset.size() - 1; }
    std::size_t chunk_count() const { return chunk_start.size() - 1; }
    std::size_t chunk_size(std::size_t c) const { return chunk_start[c + 1] - chunk_start[c]; }
    std::size_t slab_count() const { return (unit_count() + units_per_slab - 1) / units_per_slab; }
    std::size_t slab_first_unit(std::size_t s) const { return s * units_per_slab; }
    std::size_t slab_end_unit(std::size_t s) const { return std::min(unit_count(), (s + 1) * units_per_slab); }
    std::size_t slab_begin(std::size_t s) const { return unit_offset[slab_first_unit(s)]; }
    std::size_t slab_end(std::size_t s) const { return unit_offset[slab_end_unit(s)]; }
};

inline ChunkLayout chunk_layout(const Header &h) {
    ChunkLayout L;
    std::vector<std::size_t> units;
    if (h.kind == CompressorKind::HSZP_ND) {
        units.assign(h.shape.extent(0), h.shape.hyperplane());
    } else {
        auto g = geometry_of(h);
        units = g.block_sizes();
        if (h.kind == CompressorKind::HSZX_ND) {
            L.units_per_slab = g.blocks_per_block_row();
            L.slab_rows = g.block_dims()[0];
        }
    }
    L.unit_offset.reserve(units.size() + 1);
    L.unit_chunk.reserve(units.size() + 1);
    L.chunk_start.reserve(h.element_count() / kChunkCapacity + units.size() + 1);
    std::size_t pos = 0;
    for (auto u : units) {
        L.unit_offset.push_back(pos);
        L.unit_chunk.push_back(L.chunk_start.size());
        for (std::size_t k = 0; k < u; k += kChunkCapacity) L.chunk_start.push_back(pos + k);
        pos += u;
    }
    L.unit_offset.push_back(pos);
    L.unit_chunk.push_back(L.chunk_start.size());
    L.chunk_start.push_back(pos);
    return L;
}

/// In-memory form of the compressed container.
class CompressedStream {
public:
    CompressedStream() = default;
    CompressedStream(Header header, std::vector<std::int32_t> metadata, std::vector<std::uint64_t> chunk_offsets,
                     std::vector<std::uint8_t> payload)
        : header_(std::move(header)), metadata_(std::move(metadata)), offsets_(std::move(chunk_offsets)),
          payload_(std::move(payload)), layout_(chunk_layout(header_)) {
        validate();
    }

    const Header &header() const { return header_; }
    CompressorKind kind() const { return header_.kind; }
    double eps() const { return header_.eps; }
    const GridShape &shape() const { return header_.shape; }
    std::span<const std::int32_t> metadata() const { return metadata_; }
    std::span<const std::uint64_t> chunk_offsets() const { return offsets_; }
    std::span<const std::uint8_t> payload() const { return payload_; }
    const ChunkLayout &layout() const { return layout_; }
    std::size_t chunk_count() const { return offsets_.size(); }

    std::span<const std::uint8_t> chunk_bytes(std::size_t c) const {
        std::size_t end = c + 1 < offsets_.size() ? offsets_[c + 1] : payload_.size();
        return std::span<const std::uint8_t>(payload_).subspan(offsets_[c], end - offsets_[c]);
    }

    std::size_t header_bytes() const {
        return 4 + 3 + header_.shape.rank() * (8 + 4) + 8 + 8;
    }

    std::size_t serialized_size() const {
        return header_bytes() + 8 + 4 * metadata_.size() + 8 + 8 * offsets_.size() + payload_.size();
    }

    double ratio() const {
        return static_cast<double>(header_.element_count() * sizeof(float)) / static_cast<double>(serialized_size());
    }

private:
    void validate() const {
        auto corrupt = [](const std::string &m) { fail(ErrorCode::CorruptFile, m); };
        if (header_.block_dims.size() != header_.shape.rank()) corrupt("block rank does not match grid rank");
        if (is_nd(header_.kind) && header_.shape.rank() < 2) corrupt("nd compressor requires 2 or 3 dimensions");
        if (!(header_.eps > 0) || !std::isfinite(header_.eps)) corrupt("error bound must be positive");
        std::size_t blocks = geometry_of(header_).block_count();
        std::size_t want_meta = is_hszx_family(header_.kind) ? blocks : 0;
        if (metadata_.size() != want_meta) corrupt("metadata count does not match block count");
        if (offsets_.size() != layout_.chunk_count()) corrupt("chunk index does not match chunk layout");
        for (std::size_t c = 0; c < offsets_.size(); ++c) {
            if (offsets_[c] > payload_.size() || (c > 0 && offsets_[c] < offsets_[c - 1]))
                corrupt("chunk offsets are not monotone within the payload");
        }
    }

    Header header_;
    std::vector<std::int32_t> metadata_;
    std::vector<std::uint64_t> offsets_;
    std::vector<std::uint8_t> payload_;
    ChunkLayout layout_;
};

namespace detail {

template <class U>
void put_le(std::vector<std::uint8_t> &out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <class U>
    U get(const char *what) {
        if (bytes_.size() - pos_ < sizeof(U)) fail(ErrorCode::CorruptFile, std::string("truncated ") + what);
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
        pos_ += sizeof(U);
        return v;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> to_bytes(const CompressedStream &s) {
    std::vector<std::uint8_t> out;
    out.reserve(s.serialized_size());
    const auto &h = s.header();
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    out.push_back(kFormatVersion);
    out.push_back(static_cast<std::uint8_t>(h.kind));
    out.push_back(static_cast<std::uint8_t>(h.shape.rank()));
    for (auto d : h.shape.dims()) detail::put_le<std::uint64_t>(out, d);
    for (auto b : h.block_dims) detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(b));
    detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(h.eps));
    detail::put_le<std::uint64_t>(out, h.element_count());
    detail::put_le<std::uint64_t>(out, s.metadata().size());
    for (auto m : s.metadata()) detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m));
    detail::put_le<std::uint64_t>(out, s.chunk_offsets().size());
    for (auto o : s.chunk_offsets()) detail::put_le<std::uint64_t>(out, o);
    out.insert(out.end(), s.payload().begin(), s.payload().end());
    return out;
}

inline CompressedStream from_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0)
        fail(ErrorCode::CorruptFile, "bad magic, not an HSZ container");
    detail::Reader r(bytes.subspan(4));
    auto version = r.get<std::uint8_t>("version");
    if (version != kFormatVersion)
        fail(ErrorCode::UnsupportedVersion, "container version " + std::to_string(version) + " is not supported");
    Header h;
    h.kind = kind_from_byte(r.get<std::uint8_t>("kind"));
    auto ndims = r.get<std::uint8_t>("rank");
    if (ndims < 1 || ndims > kMaxRank) fail(ErrorCode::CorruptFile, "rank must be 1 to 3");
    std::vector<std::size_t> dims(ndims);
    for (auto &d : dims) {
        d = r.get<std::uint64_t>("dims");
        if (d == 0) fail(ErrorCode::CorruptFile, "zero extent");
    }
    h.shape = GridShape(dims);
    h.block_dims.resize(ndims);
    for (auto &b : h.block_dims) {
        b = r.get<std::uint32_t>("block dims");
        if (b == 0) fail(ErrorCode::CorruptFile, "zero block extent");
    }
    h.eps = std::bit_cast<double>(r.get<std::uint64_t>("eps"));
    auto n = r.get<std::uint64_t>("element count");
    if (n != h.shape.size()) fail(ErrorCode::CorruptFile, "element count disagrees with dims");

    auto meta_count = r.get<std::uint64_t>("metadata length");
    if (meta_count > r.remaining() / 4) fail(ErrorCode::CorruptFile, "truncated metadata");
    std::vector<std::int32_t> meta(meta_count);
    for (auto &m : meta) m = static_cast<std::int32_t>(r.get<std::uint32_t>("metadata"));

    auto chunk_count = r.get<std::uint64_t>("chunk index length");
    if (chunk_count > r.remaining() / 8) fail(ErrorCode::CorruptFile, "truncated chunk index");
    std::vector<std::uint64_t> offsets(chunk_count);
    for (auto &o : offsets) o = r.get<std::uint64_t>("chunk index");
    auto rest = r.rest();
    return CompressedStream(std::move(h), std::move(meta), std::move(offsets),
                            std::vector<std::uint8_t>(rest.begin(), rest.end()));
}

}  // namespace hsz

#endif
