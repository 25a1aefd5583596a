#ifndef HSZ_COMPRESSORS_HPP
#define HSZ_COMPRESSORS_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hsz/codec.hpp"
#include "hsz/container.hpp"
#include "hsz/error.hpp"
#include "hsz/field.hpp"
#include "hsz/grid.hpp"
#include "hsz/kind.hpp"
#include "hsz/quant.hpp"

namespace hsz {

enum class BlockMeanRounding { Truncate, Nearest };

struct CompressOptions {
    std::vector<std::size_t> block_dims;  // empty: default_block_dims
    BlockMeanRounding mean_rounding = BlockMeanRounding::Truncate;
};

/// Residuals p in canonical stream order plus the block means that HSZx kinds predict with.
struct DecorrelatedStream {
    CompressorKind kind = CompressorKind::HSZP;
    GridShape shape;
    BlockGeometry geometry;
    std::vector<std::int32_t> values;
    std::vector<std::int32_t> metadata;
    double eps = 0.0;
    std::size_t offset = 0;  // stream position of values[0]; non-zero for partial streams

    bool complete() const { return offset == 0 && values.size() == shape.size(); }
};

namespace detail {

inline std::int32_t narrow_residual(std::int64_t v) {
    if (v > std::numeric_limits<std::int32_t>::max() || v <= std::numeric_limits<std::int32_t>::min())
        fail(ErrorCode::EpsTooSmall, "decorrelated residual exceeds 32-bit range; increase the error bound");
    return static_cast<std::int32_t>(v);
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t d = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? d - 1 : d;
}

/// 2D and 3D grids as (n0, n1, n2); a 2D grid becomes (n0, 1, n1).
inline std::array<std::size_t, 3> as_3d(const GridShape &s) {
    if (s.rank() == 3) return {s.extent(0), s.extent(1), s.extent(2)};
    if (s.rank() == 2) return {s.extent(0), 1, s.extent(1)};
    return {s.extent(0), 1, 1};
}

}  // namespace detail

/// Integer block mean, truncated toward zero (sum 22 over 4 points gives 5).
inline std::int32_t block_int_mean(std::span<const std::int32_t> q,
                                   BlockMeanRounding rounding = BlockMeanRounding::Truncate) {
    require(!q.empty(), ErrorCode::InvalidArgument, "block mean of an empty block");
    std::int64_t sum = 0;
    for (auto v : q) sum += v;
    auto n = static_cast<std::int64_t>(q.size());
    if (rounding == BlockMeanRounding::Truncate) return static_cast<std::int32_t>(sum / n);
    return static_cast<std::int32_t>(detail::floor_div(2 * sum + n, 2 * n));
}

inline DecorrelatedStream decorrelate_hszp(const QuantizedField &q, std::size_t block_length = 32) {
    DecorrelatedStream s{CompressorKind::HSZP, q.shape, BlockGeometry(GridShape{q.size()}, {block_length}),
                         std::vector<std::int32_t>(q.size()), {}, q.eps, 0};
    std::int64_t prev = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        s.values[i] = detail::narrow_residual(static_cast<std::int64_t>(q.values[i]) - prev);
        prev = q.values[i];
    }
    return s;
}

/// Lorenzo residuals with zero-valued out-of-domain neighbours, in global row-major order.
inline DecorrelatedStream decorrelate_lorenzo_nd(const QuantizedField &q, std::vector<std::size_t> block_dims = {}) {
    require(q.shape.rank() >= 2, ErrorCode::InvalidArgument, "Lorenzo decorrelation needs 2 or 3 dimensions");
    if (block_dims.empty()) block_dims = default_block_dims(CompressorKind::HSZP_ND, q.shape.rank());
    DecorrelatedStream s{CompressorKind::HSZP_ND, q.shape, BlockGeometry(q.shape, block_dims),
                         std::vector<std::int32_t>(q.size()), {}, q.eps, 0};
    auto [n0, n1, n2] = detail::as_3d(q.shape);
    auto at = [&](std::size_t i, std::size_t j, std::size_t k) -> std::int64_t {
        return q.values[(i * n1 + j) * n2 + k];
    };
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j)
            for (std::size_t k = 0; k < n2; ++k) {
                std::int64_t p = at(i, j, k);
                if (k) p -= at(i, j, k - 1);
                if (j) p -= at(i, j - 1, k);
                if (i) p -= at(i - 1, j, k);
                if (j && k) p += at(i, j - 1, k - 1);
                if (i && k) p += at(i - 1, j, k - 1);
                if (i && j) p += at(i - 1, j - 1, k);
                if (i && j && k) p -= at(i - 1, j - 1, k - 1);
                s.values[(i * n1 + j) * n2 + k] = detail::narrow_residual(p);
            }
    return s;
}

/// Block-mean residuals. Flat geometries (rank 1 over the flattened data) give HSZX, nd ones HSZX_ND.
inline DecorrelatedStream decorrelate_hszx(const QuantizedField &q, const BlockGeometry &geometry,
                                           BlockMeanRounding rounding = BlockMeanRounding::Truncate) {
    require(geometry.shape().size() == q.size(), ErrorCode::ShapeMismatch, "geometry does not match field");
    const bool nd = geometry.rank() > 1;
    require(!nd || geometry.shape() == q.shape, ErrorCode::ShapeMismatch, "geometry does not match field shape");
    DecorrelatedStream s{nd ? CompressorKind::HSZX_ND : CompressorKind::HSZX, q.shape, geometry,
                         std::vector<std::int32_t>(q.size()), std::vector<std::int32_t>(geometry.block_count()),
                         q.eps, 0};
    std::vector<std::int32_t> block;
    for (std::size_t b = 0; b < geometry.block_count(); ++b) {
        block.clear();
        if (!nd) {
            auto first = q.values.begin() + static_cast<std::ptrdiff_t>(geometry.block_offset(b));
            block.assign(first, first + static_cast<std::ptrdiff_t>(geometry.block_size(b)));
        } else {
            auto o = geometry.origin(b);
            auto e = geometry.extents(b);
            for (std::size_t i = 0; i < e[0]; ++i)
                for (std::size_t j = 0; j < e[1]; ++j)
                    for (std::size_t k = 0; k < e[2]; ++k) {
                        Coord c{o[0] + i, o[1] + j, o[2] + k};
                        block.push_back(q.at(c));
                    }
        }
        std::int32_t m = block_int_mean(block, rounding);
        s.metadata[b] = m;
        std::size_t base = geometry.block_offset(b);
        for (std::size_t t = 0; t < block.size(); ++t)
            s.values[base + t] = detail::narrow_residual(static_cast<std::int64_t>(block[t]) - m);
    }
    return s;
}

inline DecorrelatedStream decorrelate(const QuantizedField &q, CompressorKind kind, const CompressOptions &opts = {}) {
    auto dims = opts.block_dims.empty() ? default_block_dims(kind, q.shape.rank()) : opts.block_dims;
    switch (kind) {
        case CompressorKind::HSZP:
            require(dims.size() == 1, ErrorCode::InvalidArgument, "hszp takes a single block length");
            return decorrelate_hszp(q, dims[0]);
        case CompressorKind::HSZP_ND:
            require(q.shape.rank() >= 2, ErrorCode::InvalidArgument, "hszp-nd requires 2D or 3D data");
            require(dims.size() == q.shape.rank(), ErrorCode::InvalidArgument, "block rank must match data rank");
            return decorrelate_lorenzo_nd(q, dims);
        case CompressorKind::HSZX:
            require(dims.size() == 1, ErrorCode::InvalidArgument, "hszx takes a single block length");
            return decorrelate_hszx(q, BlockGeometry(GridShape{q.size()}, dims), opts.mean_rounding);
        case CompressorKind::HSZX_ND:
            require(q.shape.rank() >= 2, ErrorCode::InvalidArgument, "hszx-nd requires 2D or 3D data");
            require(dims.size() == q.shape.rank(), ErrorCode::InvalidArgument, "block rank must match data rank");
            return decorrelate_hszx(q, BlockGeometry(q.shape, dims), opts.mean_rounding);
    }
    fail(ErrorCode::InvalidArgument, "unknown compressor kind");
}

// ---- inverse decorrelation primitives, shared by whole-array and slab paths ----

/// q_i = q_{i-1} + p_i starting from `seed` (the value preceding p[0], zero at the stream start).
inline void recorrelate_prefix(std::span<const std::int32_t> p, std::int32_t seed, std::span<std::int32_t> q) {
    std::int64_t acc = seed;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        q[i] = static_cast<std::int32_t>(acc);
    }
}

inline void recorrelate_block_mean(std::span<const std::int32_t> p, std::int32_t mean, std::span<std::int32_t> q) {
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = static_cast<std::int32_t>(static_cast<std::int64_t>(p[i]) + mean);
}

/// One axis-0 hyperplane of Lorenzo reconstruction: q = prev + 2D prefix sum of p over (n1, n2).
/// `prev` is empty for the first hyperplane.
inline void recorrelate_lorenzo_hyperplane(std::span<const std::int32_t> p, std::span<const std::int32_t> prev,
                                           std::span<std::int32_t> q, std::size_t n1, std::size_t n2) {
    std::vector<std::int64_t> col(n2, 0);
    for (std::size_t j = 0; j < n1; ++j) {
        std::int64_t row = 0;
        for (std::size_t k = 0; k < n2; ++k) {
            std::size_t idx = j * n2 + k;
            row += p[idx];
            col[k] += row;
            std::int64_t v = col[k] + (prev.empty() ? 0 : prev[idx]);
            q[idx] = static_cast<std::int32_t>(v);
        }
    }
}

/// Values in canonical order for whole blocks of an HSZx stream, complete or partial.
inline std::vector<std::int32_t> recorrelate_range(const DecorrelatedStream &s) {
    const auto &g = s.geometry;
    if (!is_hszx_family(s.kind)) {
        if (s.offset != 0) fail(ErrorCode::MissingContext, "partial predictive stream needs its predecessor values");
        if (s.values.size() != s.shape.size())
            fail(ErrorCode::MissingContext, "predictive stream must be complete");
    }
    std::vector<std::int32_t> out(s.values.size());
    if (s.kind == CompressorKind::HSZP) {
        recorrelate_prefix(s.values, 0, out);
        return out;
    }
    if (s.kind == CompressorKind::HSZP_ND) {
        auto [n0, n1, n2] = detail::as_3d(s.shape);
        std::size_t plane = n1 * n2;
        for (std::size_t i = 0; i < n0; ++i) {
            std::span<const std::int32_t> prev;
            if (i) prev = std::span<const std::int32_t>(out).subspan((i - 1) * plane, plane);
            recorrelate_lorenzo_hyperplane(std::span<const std::int32_t>(s.values).subspan(i * plane, plane), prev,
                                           std::span<std::int32_t>(out).subspan(i * plane, plane), n1, n2);
        }
        return out;
    }
    // Block-mean kinds: any run of whole blocks decodes independently.
    std::size_t lo = 0, hi = g.block_count();
    while (lo < hi && g.block_offset(lo) < s.offset) ++lo;
    require(lo < g.block_count() + 1 && g.block_offset(lo) == s.offset, ErrorCode::InvalidArgument,
            "partial stream must start on a block boundary");
    std::size_t pos = 0;
    for (std::size_t b = lo; b < hi && pos < s.values.size(); ++b) {
        std::size_t n = g.block_size(b);
        require(pos + n <= s.values.size(), ErrorCode::InvalidArgument, "partial stream must hold whole blocks");
        recorrelate_block_mean(std::span<const std::int32_t>(s.values).subspan(pos, n), s.metadata[b],
                               std::span<std::int32_t>(out).subspan(pos, n));
        pos += n;
    }
    return out;
}

/// Rebuilds the quantized field (grid row-major) from a complete decorrelated stream.
inline QuantizedField recorrelate(const DecorrelatedStream &s) {
    if (!s.complete()) {
        if (!is_hszx_family(s.kind)) fail(ErrorCode::MissingContext, "partial predictive stream cannot be recorrelated");
        fail(ErrorCode::InvalidArgument, "use recorrelate_range for partial block-mean streams");
    }
    auto canon = recorrelate_range(s);
    QuantizedField q{s.shape, {}, s.eps};
    if (stream_order(s.kind) == StreamOrder::GlobalRowMajor) {
        q.values = std::move(canon);
        return q;
    }
    q.values.resize(canon.size());
    const auto &g = s.geometry;
    for (std::size_t b = 0; b < g.block_count(); ++b) {
        auto o = g.origin(b);
        auto e = g.extents(b);
        std::size_t t = g.block_offset(b);
        for (std::size_t i = 0; i < e[0]; ++i)
            for (std::size_t j = 0; j < e[1]; ++j)
                for (std::size_t k = 0; k < e[2]; ++k)
                    q.values[s.shape.linear({o[0] + i, o[1] + j, o[2] + k})] = canon[t++];
    }
    return q;
}

// ---- encoding ----

inline Header header_for(const DecorrelatedStream &s) {
    Header h;
    h.kind = s.kind;
    h.shape = s.shape;
    h.eps = s.eps;
    if (is_nd(s.kind)) {
        h.block_dims = s.geometry.block_dims();
    } else {
        h.block_dims.assign(s.shape.rank(), 1);
        h.block_dims[0] = s.geometry.block_dims()[0];
    }
    return h;
}

inline CompressedStream encode_stream(const DecorrelatedStream &s) {
    require(s.complete(), ErrorCode::InvalidArgument, "only complete streams can be encoded");
    Header h = header_for(s);
    auto layout = chunk_layout(h);
    std::vector<std::uint64_t> offsets(layout.chunk_count());
    std::vector<std::uint8_t> payload;
    payload.reserve(s.values.size());
    std::span<const std::int32_t> vals(s.values);
    for (std::size_t c = 0; c < layout.chunk_count(); ++c) {
        offsets[c] = payload.size();
        encode_chunk_into(vals.subspan(layout.chunk_start[c], layout.chunk_size(c)), payload);
    }
    return CompressedStream(std::move(h), s.metadata, std::move(offsets), std::move(payload));
}

/// quantize -> partition -> metadata -> decorrelate -> encode.
template <class T>
CompressedStream compress(const Field<T> &field, CompressorKind kind, const ErrorBound &bound,
                          const CompressOptions &opts = {}) {
    require_finite(field);
    if (is_nd(kind))
        require(field.shape.rank() >= 2, ErrorCode::InvalidArgument,
                std::string(to_string(kind)).append(" requires 2D or 3D data").c_str());
    double eps = resolve_eps(field, bound);
    return encode_stream(decorrelate(quantize_field(field, eps), kind, opts));
}

}  // namespace hsz

#endif
