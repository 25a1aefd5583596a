#ifndef HSZ_STAGES_HPP
#define HSZ_STAGES_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "hsz/compressors.hpp"
#include "hsz/container.hpp"
#include "hsz/error.hpp"
#include "hsz/field.hpp"
#include "hsz/kind.hpp"
#include "hsz/quant.hpp"

namespace hsz {

/// Work done while decompressing; the stage ordering tests read these.
struct DecodeCounters {
    std::size_t chunks_decoded = 0;
    std::size_t values_decoded = 0;
    std::size_t payload_bytes = 0;
    std::size_t values_recorrelated = 0;
    std::size_t values_dequantized = 0;

    std::size_t work() const { return values_decoded + values_recorrelated + values_dequantized; }
};

using MetaView = std::vector<std::int32_t>;

/// One of the four decompression stages.
using StageView = std::variant<MetaView, DecorrelatedStream, QuantizedField, FieldF32>;

inline Stage stage_of(const StageView &v) { return static_cast<Stage>(v.index() + 1); }

namespace detail {

inline void decode_chunks(const CompressedStream &s, std::size_t first_chunk, std::size_t end_chunk,
                          std::span<std::int32_t> out, DecodeCounters *counters) {
    const auto &L = s.layout();
    std::size_t base = L.chunk_start[first_chunk];
    for (std::size_t c = first_chunk; c < end_chunk; ++c) {
        auto bytes = s.chunk_bytes(c);
        auto dst = out.subspan(L.chunk_start[c] - base, L.chunk_size(c));
        std::size_t used = decode_chunk(bytes, dst);
        if (counters) {
            ++counters->chunks_decoded;
            counters->values_decoded += dst.size();
            counters->payload_bytes += used;
        }
    }
}

}  // namespace detail

/// Decodes every chunk into the decorrelated stream (stage 2).
inline DecorrelatedStream decode_stream(const CompressedStream &s, DecodeCounters *counters = nullptr) {
    DecorrelatedStream d;
    d.kind = s.kind();
    d.shape = s.shape();
    d.geometry = geometry_of(s.header());
    d.eps = s.eps();
    d.metadata.assign(s.metadata().begin(), s.metadata().end());
    d.values.resize(s.header().element_count());
    detail::decode_chunks(s, 0, s.chunk_count(), d.values, counters);
    return d;
}

inline QuantizedField decompress_quantized(const CompressedStream &s, DecodeCounters *counters = nullptr) {
    auto q = recorrelate(decode_stream(s, counters));
    if (counters) counters->values_recorrelated += q.size();
    return q;
}

template <class T = float>
Field<T> decompress_as(const CompressedStream &s, DecodeCounters *counters = nullptr) {
    auto f = dequantize_field<T>(decompress_quantized(s, counters));
    if (counters) counters->values_dequantized += f.size();
    return f;
}

inline FieldF32 decompress(const CompressedStream &s, DecodeCounters *counters = nullptr) {
    return decompress_as<float>(s, counters);
}

/// Stage-4 values before narrowing to float32 storage.
inline FieldF64 decompress_f64(const CompressedStream &s, DecodeCounters *counters = nullptr) {
    return decompress_as<double>(s, counters);
}

inline StageView partial_decompress(const CompressedStream &s, Stage stage, DecodeCounters *counters = nullptr) {
    if (!supports_stage(s.kind(), stage))
        fail(ErrorCode::UnsupportedStage, std::string("stage ") + std::string(to_string(stage)) +
                                              " is not available for " + std::string(to_string(s.kind())));
    switch (stage) {
        case Stage::Meta: return MetaView(s.metadata().begin(), s.metadata().end());
        case Stage::Decorrelated: return decode_stream(s, counters);
        case Stage::Quantized: return decompress_quantized(s, counters);
        case Stage::Full: return decompress(s, counters);
    }
    fail(ErrorCode::InvalidArgument, "unknown stage");
}

// ---- slab streaming ----

/// Counts slab buffers alive at once.
struct SlabTracker {
    std::size_t live = 0;
    std::size_t peak = 0;
    std::size_t live_bytes = 0;
    std::size_t peak_bytes = 0;
    std::size_t largest_slab_bytes = 0;
};

class SlabBuffer {
public:
    SlabBuffer(std::shared_ptr<SlabTracker> tracker, std::size_t n_ints, std::size_t n_floats)
        : ints(n_ints), floats(n_floats), tracker_(std::move(tracker)) {
        bytes_ = ints.size() * sizeof(std::int32_t) + floats.size() * sizeof(float);
        if (tracker_) {
            ++tracker_->live;
            tracker_->live_bytes += bytes_;
            tracker_->peak = std::max(tracker_->peak, tracker_->live);
            tracker_->peak_bytes = std::max(tracker_->peak_bytes, tracker_->live_bytes);
            tracker_->largest_slab_bytes = std::max(tracker_->largest_slab_bytes, bytes_);
        }
    }
    ~SlabBuffer() {
        if (tracker_) {
            --tracker_->live;
            tracker_->live_bytes -= bytes_;
        }
    }
    SlabBuffer(const SlabBuffer &) = delete;
    SlabBuffer &operator=(const SlabBuffer &) = delete;

    std::vector<std::int32_t> ints;
    std::vector<float> floats;

private:
    std::shared_ptr<SlabTracker> tracker_;
    std::size_t bytes_ = 0;
};

/// A band of the array at one stage. `begin`/`end` are positions in both the canonical stream
/// and the row-major grid; slabs never split a decorrelation block or an axis-0 hyperplane.
struct SlabView {
    std::size_t ordinal = 0;
    Stage stage = Stage::Decorrelated;
    std::size_t begin = 0, end = 0;
    std::size_t block_begin = 0, block_end = 0;  // decorrelation blocks covered (block kinds)
    std::shared_ptr<const SlabBuffer> buffer;

    std::size_t size() const { return end - begin; }
    bool contains(std::size_t pos) const { return pos >= begin && pos < end; }
    /// p in canonical order (stage 2) or q in row-major order (stages 3 and 4). Stage 4 keeps q
    /// so consumers can rebuild 2q*eps in double precision.
    std::span<const std::int32_t> ints() const { return buffer->ints; }
    std::span<const float> floats() const { return buffer->floats; }
};

/// Yields slabs in axis-0 order. Only the most recent slab is retained internally, and only
/// as the prefix seed predictive kinds need to continue recorrelation.
class SlabIterator {
public:
    SlabIterator(const CompressedStream &s, Stage stage, std::shared_ptr<SlabTracker> tracker = {},
                 DecodeCounters *counters = nullptr)
        : s_(&s), stage_(stage), tracker_(std::move(tracker)), counters_(counters) {
        if (stage == Stage::Meta)
            fail(ErrorCode::UnsupportedStage, "slab iteration needs stage decorrelated, quantized or full");
        if (s.kind() == CompressorKind::HSZP_ND) {
            auto d = detail::as_3d(s.shape());
            n1_ = d[1];
            n2_ = d[2];
        }
    }

    std::size_t slab_count() const { return s_->layout().slab_count(); }
    const CompressedStream &stream() const { return *s_; }
    Stage stage() const { return stage_; }

    std::optional<SlabView> next() {
        const auto &L = s_->layout();
        if (next_ >= L.slab_count()) return std::nullopt;
        std::size_t idx = next_++;
        SlabView v;
        v.ordinal = idx;
        v.stage = stage_;
        v.begin = L.slab_begin(idx);
        v.end = L.slab_end(idx);
        if (is_hszx_family(s_->kind())) {
            v.block_begin = L.slab_first_unit(idx);
            v.block_end = L.slab_end_unit(idx);
        }
        const std::size_t n = v.size();
        auto buf = std::make_shared<SlabBuffer>(tracker_, n, stage_ == Stage::Full ? n : 0);
        std::span<std::int32_t> p = buf->ints;
        detail::decode_chunks(*s_, L.unit_chunk[L.slab_first_unit(idx)], L.unit_chunk[L.slab_end_unit(idx)], p,
                              counters_);
        if (stage_ != Stage::Decorrelated) {
            recorrelate_slab(v, p);
            if (counters_) counters_->values_recorrelated += n;
        }
        if (stage_ == Stage::Full) {
            for (std::size_t t = 0; t < n; ++t)
                buf->floats[t] = static_cast<float>(dequantize(p[t], s_->eps()));
            if (counters_) counters_->values_dequantized += n;
        }
        v.buffer = buf;
        prev_ = (stage_ != Stage::Decorrelated && s_->kind() == CompressorKind::HSZP_ND)
                    ? std::shared_ptr<const SlabBuffer>(buf)
                    : nullptr;
        if (stage_ != Stage::Decorrelated && s_->kind() == CompressorKind::HSZP && n > 0) seed_ = p[n - 1];
        return v;
    }

private:
    void recorrelate_slab(const SlabView &v, std::span<std::int32_t> values) {
        switch (s_->kind()) {
            case CompressorKind::HSZP:
                recorrelate_prefix(values, seed_, values);
                break;
            case CompressorKind::HSZP_ND: {
                std::span<const std::int32_t> prev;
                if (prev_) prev = prev_->ints;
                recorrelate_lorenzo_hyperplane(values, prev, values, n1_, n2_);
                break;
            }
            case CompressorKind::HSZX:
            case CompressorKind::HSZX_ND: {
                const auto &L = s_->layout();
                for (std::size_t b = v.block_begin; b < v.block_end; ++b) {
                    auto sub = values.subspan(L.unit_offset[b] - v.begin, L.unit_offset[b + 1] - L.unit_offset[b]);
                    recorrelate_block_mean(sub, s_->metadata()[b], sub);
                }
                if (s_->kind() == CompressorKind::HSZX_ND) to_row_major(v, values);
                break;
            }
        }
    }

    // A block-row holds the same positions in both orders; only the arrangement differs.
    void to_row_major(const SlabView &v, std::span<std::int32_t> values) {
        auto g = geometry_of(s_->header());
        std::vector<std::int32_t> tmp(values.begin(), values.end());
        const auto &shape = g.shape();
        for (std::size_t b = v.block_begin; b < v.block_end; ++b) {
            auto o = g.origin(b);
            auto e = g.extents(b);
            std::size_t t = g.block_offset(b) - v.begin;
            for (std::size_t i = 0; i < e[0]; ++i)
                for (std::size_t j = 0; j < e[1]; ++j)
                    for (std::size_t k = 0; k < e[2]; ++k)
                        values[shape.linear({o[0] + i, o[1] + j, o[2] + k}) - v.begin] = tmp[t++];
        }
    }

    const CompressedStream *s_;
    Stage stage_;
    std::shared_ptr<SlabTracker> tracker_;
    DecodeCounters *counters_;
    std::size_t next_ = 0;
    std::size_t n1_ = 1, n2_ = 1;
    std::int32_t seed_ = 0;
    std::shared_ptr<const SlabBuffer> prev_;
};

}  // namespace hsz

#endif
