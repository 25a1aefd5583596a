#ifndef HSZ_GRID_HPP
#define HSZ_GRID_HPP

#include <array>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hsz/error.hpp"

namespace hsz {

inline constexpr std::size_t kMaxRank = 3;

using Coord = std::array<std::size_t, kMaxRank>;

/// Extents of a 1-3 dimensional row-major array (last axis fastest).
class GridShape {
public:
    GridShape() = default;

    explicit GridShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
        require(!dims_.empty() && dims_.size() <= kMaxRank, ErrorCode::InvalidArgument,
                "grid must have 1 to 3 dimensions");
        for (auto e : dims_) require(e >= 1, ErrorCode::InvalidArgument, "grid extents must be positive");
        total_ = std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
    }

    GridShape(std::initializer_list<std::size_t> dims) : GridShape(std::vector<std::size_t>(dims)) {}

    std::size_t rank() const { return dims_.size(); }
    std::size_t extent(std::size_t axis) const { return dims_[axis]; }
    std::size_t size() const { return total_; }
    const std::vector<std::size_t> &dims() const { return dims_; }

    /// Elements in one axis-0 hyperplane (a row for 2D, a plane for 3D).
    std::size_t hyperplane() const { return total_ / dims_[0]; }

    std::size_t stride(std::size_t axis) const {
        std::size_t s = 1;
        for (std::size_t k = axis + 1; k < dims_.size(); ++k) s *= dims_[k];
        return s;
    }

    std::size_t linear(const Coord &c) const {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < dims_.size(); ++k) idx = idx * dims_[k] + c[k];
        return idx;
    }

    Coord coord(std::size_t idx) const {
        Coord c{};
        for (std::size_t k = dims_.size(); k-- > 0;) {
            c[k] = idx % dims_[k];
            idx /= dims_[k];
        }
        return c;
    }

    bool operator==(const GridShape &o) const { return dims_ == o.dims_; }

    std::string to_string() const {
        std::string s;
        for (std::size_t k = 0; k < dims_.size(); ++k) s += (k ? "x" : "") + std::to_string(dims_[k]);
        return s;
    }

private:
    std::vector<std::size_t> dims_{1};
    std::size_t total_ = 1;
};

/// Regular tiling of a grid into row-major ordered blocks. Edge blocks are shrunk, never padded.
class BlockGeometry {
public:
    BlockGeometry() = default;

    BlockGeometry(GridShape shape, std::vector<std::size_t> block_dims)
        : shape_(std::move(shape)), block_dims_(std::move(block_dims)) {
        require(block_dims_.size() == shape_.rank(), ErrorCode::InvalidArgument,
                "block rank must match grid rank");
        block_grid_.resize(shape_.rank());
        block_count_ = 1;
        for (std::size_t k = 0; k < shape_.rank(); ++k) {
            require(block_dims_[k] >= 1, ErrorCode::InvalidArgument, "block extents must be positive");
            if (block_dims_[k] > shape_.extent(k)) block_dims_[k] = shape_.extent(k);
            block_grid_[k] = (shape_.extent(k) + block_dims_[k] - 1) / block_dims_[k];
            block_count_ *= block_grid_[k];
        }
        offsets_.resize(block_count_ + 1);
        offsets_[0] = 0;
        for (std::size_t b = 0; b < block_count_; ++b) offsets_[b + 1] = offsets_[b] + block_size(b);
    }

    const GridShape &shape() const { return shape_; }
    const std::vector<std::size_t> &block_dims() const { return block_dims_; }
    const std::vector<std::size_t> &block_grid() const { return block_grid_; }
    std::size_t block_count() const { return block_count_; }
    std::size_t rank() const { return shape_.rank(); }

    /// Row-major coordinates of block b within the block grid.
    Coord block_coord(std::size_t b) const {
        Coord c{};
        for (std::size_t k = rank(); k-- > 0;) {
            c[k] = b % block_grid_[k];
            b /= block_grid_[k];
        }
        return c;
    }

    std::size_t block_index(const Coord &bc) const {
        std::size_t b = 0;
        for (std::size_t k = 0; k < rank(); ++k) b = b * block_grid_[k] + bc[k];
        return b;
    }

    Coord origin(std::size_t b) const {
        auto bc = block_coord(b);
        Coord o{};
        for (std::size_t k = 0; k < rank(); ++k) o[k] = bc[k] * block_dims_[k];
        return o;
    }

    Coord extents(std::size_t b) const {
        auto bc = block_coord(b);
        Coord e{1, 1, 1};
        for (std::size_t k = 0; k < rank(); ++k) {
            std::size_t begin = bc[k] * block_dims_[k];
            e[k] = std::min(block_dims_[k], shape_.extent(k) - begin);
        }
        return e;
    }

    std::size_t block_size(std::size_t b) const {
        auto e = extents(b);
        std::size_t s = 1;
        for (std::size_t k = 0; k < rank(); ++k) s *= e[k];
        return s;
    }

    std::vector<std::size_t> block_sizes() const {
        std::vector<std::size_t> sizes(block_count_);
        for (std::size_t b = 0; b < block_count_; ++b) sizes[b] = offsets_[b + 1] - offsets_[b];
        return sizes;
    }

    /// Position of the first element of block b in block-contiguous order.
    std::size_t block_offset(std::size_t b) const { return offsets_[b]; }

    std::size_t block_of(const Coord &c) const {
        Coord bc{};
        for (std::size_t k = 0; k < rank(); ++k) bc[k] = c[k] / block_dims_[k];
        return block_index(bc);
    }

    /// Blocks sharing one block coordinate along axis 0.
    std::size_t blocks_per_block_row() const { return block_count_ / block_grid_[0]; }

private:
    GridShape shape_;
    std::vector<std::size_t> block_dims_{1};
    std::vector<std::size_t> block_grid_{1};
    std::size_t block_count_ = 1;
    std::vector<std::size_t> offsets_{0, 1};
};

inline BlockGeometry partition(const GridShape &shape, std::span<const std::size_t> block_dims) {
    return BlockGeometry(shape, std::vector<std::size_t>(block_dims.begin(), block_dims.end()));
}

inline BlockGeometry partition(const GridShape &shape, std::initializer_list<std::size_t> block_dims) {
    return BlockGeometry(shape, std::vector<std::size_t>(block_dims));
}

enum class StreamOrder { GlobalRowMajor, BlockContiguous };

/// Maps a grid coordinate to its position in the serialized stream.
inline std::size_t stream_position(const BlockGeometry &geom, StreamOrder order, const Coord &c) {
    const auto &shape = geom.shape();
    if (order == StreamOrder::GlobalRowMajor) return shape.linear(c);
    std::size_t b = geom.block_of(c);
    auto o = geom.origin(b);
    auto e = geom.extents(b);
    std::size_t local = 0;
    for (std::size_t k = 0; k < geom.rank(); ++k) local = local * e[k] + (c[k] - o[k]);
    return geom.block_offset(b) + local;
}

/// Inverse of stream_position.
inline Coord grid_coord(const BlockGeometry &geom, StreamOrder order, std::size_t pos) {
    const auto &shape = geom.shape();
    if (order == StreamOrder::GlobalRowMajor) return shape.coord(pos);
    std::size_t lo = 0, hi = geom.block_count();
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (geom.block_offset(mid) <= pos) lo = mid; else hi = mid;
    }
    std::size_t local = pos - geom.block_offset(lo);
    auto o = geom.origin(lo);
    auto e = geom.extents(lo);
    Coord c{};
    for (std::size_t k = geom.rank(); k-- > 0;) {
        c[k] = o[k] + local % e[k];
        local /= e[k];
    }
    return c;
}

/// A band of consecutive axis-0 indices, the unit of out-of-core streaming.
struct SlabIndex {
    std::size_t ordinal = 0;
    std::size_t first = 0;   // first axis-0 index
    std::size_t extent = 0;  // axis-0 indices covered
};

inline std::size_t slab_count(std::size_t axis0_extent, std::size_t slab_extent) {
    require(slab_extent >= 1, ErrorCode::InvalidArgument, "slab extent must be positive");
    return (axis0_extent + slab_extent - 1) / slab_extent;
}

inline SlabIndex slab_at(std::size_t axis0_extent, std::size_t slab_extent, std::size_t ordinal) {
    std::size_t first = ordinal * slab_extent;
    require(first < axis0_extent, ErrorCode::InvalidArgument, "slab ordinal out of range");
    return {ordinal, first, std::min(slab_extent, axis0_extent - first)};
}

}  // namespace hsz

#endif
