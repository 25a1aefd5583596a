#ifndef HSZ_STREAMING_HPP
#define HSZ_STREAMING_HPP

#include <deque>
#include <functional>
#include <memory>
#include <utility>
#include <span>
#include <vector>

#include "hsz/derivatives.hpp"
#include "hsz/stages.hpp"

namespace hsz {

/// Receives one slab of results: axis-0 rows [row_begin, row_end), components local to those rows.
using SlabSink = std::function<void(std::size_t row_begin, std::size_t row_end, const std::vector<std::vector<double>> &)>;

namespace detail {

/// Slabs must cover whole axis-0 hyperplanes for a three-slab window to contain every neighbour.
inline bool row_aligned(const CompressedStream &s) { return is_nd(s.kind()) || s.shape().rank() == 1; }

/// Up to three consecutive slabs addressed by global position.
class SlabWindow {
public:
    void push(SlabView v) {
        slabs_.push_back(std::move(v));
        if (slabs_.size() > 3) slabs_.pop_front();
    }
    void drop_oldest() { slabs_.pop_front(); }
    std::size_t size() const { return slabs_.size(); }
    const SlabView &operator[](std::size_t i) const { return slabs_[i]; }

    const SlabView &find(std::size_t pos) const {
        for (const auto &s : slabs_)
            if (s.contains(pos)) return s;
        fail(ErrorCode::InvalidArgument, "position outside the slab window");
    }
    std::int64_t ints(std::size_t pos) const {
        const auto &s = find(pos);
        return s.ints()[pos - s.begin];
    }

private:
    std::deque<SlabView> slabs_;
};

/// Per-input stencil producer, fed slabs in order and returning finished slabs lagging by one.
class SlabStencil {
public:
    struct Result {
        std::size_t row_begin, row_end;
        Components values;
    };

    SlabStencil(const CompressedStream &s, Stage stage, FieldOp op)
        : s_(&s), stage_(stage), op_(op), L_(s.shape()) {
        if (stage == Stage::Decorrelated && s.kind() == CompressorKind::HSZP_ND) {
            engine_ = std::make_unique<LorenzoStencil>(s.shape(), op, s.eps(), [this](std::size_t i, Components &&v) {
                ready_.push_back({i, i + 1, std::move(v)});
            });
        }
    }

    /// Returns results that became final after this slab arrived.
    std::vector<Result> push(SlabView v) {
        if (engine_) {
            engine_->push(v.ints());
            return take();
        }
        window_.push(std::move(v));
        if (window_.size() >= 2) {
            compute(window_[window_.size() - 2]);
            if (window_.size() == 3) window_.drop_oldest();
        }
        return take();
    }

    std::vector<Result> finish() {
        if (engine_) {
            engine_->finish();
        } else if (window_.size() > 0) {
            compute(window_[window_.size() - 1]);
        }
        return take();
    }

private:
    std::vector<Result> take() { return std::exchange(ready_, {}); }

    void compute(const SlabView &v) {
        const std::size_t r0 = v.begin / L_.plane, r1 = v.end / L_.plane;
        Components out = make_components(op_ == FieldOp::Derivative ? L_.rank() : 1, v.size());
        if (stage_ == Stage::Decorrelated) {
            auto g = geometry_of(s_->header());
            block_mean_rows(L_, g, s_->metadata(), op_, [&](std::size_t pos) { return window_.ints(pos); }, r0, r1,
                            s_->eps(), out);
        } else if (stage_ == Stage::Quantized) {
            row_major_rows(L_, op_, [&](std::size_t pos) { return window_.ints(pos); }, r0, r1, QuantScale{s_->eps()},
                           out);
        } else {
            // Same double-precision reconstruction the in-memory stage-4 path uses.
            const double eps = s_->eps();
            row_major_rows(L_, op_, [&](std::size_t pos) { return dequantize(window_.ints(pos), eps); }, r0, r1,
                           RealScale{}, out);
        }
        ready_.push_back({r0, r1, std::move(out)});
    }

    const CompressedStream *s_;
    Stage stage_;
    FieldOp op_;
    Lattice L_;
    SlabWindow window_;
    std::unique_ptr<LorenzoStencil> engine_;
    std::vector<Result> ready_;
};

}  // namespace detail

/// Out-of-core stencil pipeline: slabs are decompressed to `stage` in axis-0 order and at
/// most three per input are alive at once. Inputs must share kind and shape.
inline void stream_field_op(std::span<const CompressedStream *const> inputs, FieldOp op, Stage stage,
                            const SlabSink &sink, std::shared_ptr<SlabTracker> tracker = {},
                            DecodeCounters *counters = nullptr) {
    require(!inputs.empty(), ErrorCode::InvalidArgument, "no input fields");
    const auto &first = *inputs[0];
    for (auto *s : inputs) {
        require(s->kind() == first.kind(), ErrorCode::KindMismatch, "vector components use different compressors");
        require(s->shape() == first.shape(), ErrorCode::ShapeMismatch, "vector components differ in shape");
    }
    detail::check_vector_inputs(op, first.shape(), inputs.size());
    if (!field_op_supported(first.kind(), stage))
        fail(ErrorCode::UnsupportedStage, std::string(to_string(op)) + " is not available at stage " +
                                              std::string(to_string(stage)) + " for " +
                                              std::string(to_string(first.kind())));
    if (!detail::row_aligned(first))
        fail(ErrorCode::UnsupportedStage, "flat compressors stream only 1D data; use the in-memory path");

    const FieldOp per_input = op == FieldOp::Laplacian ? FieldOp::Laplacian : FieldOp::Derivative;
    detail::Lattice L(first.shape());
    std::vector<SlabIterator> iters;
    std::vector<detail::SlabStencil> stencils;
    iters.reserve(inputs.size());
    stencils.reserve(inputs.size());  // stencils capture `this`; they must not relocate
    for (auto *s : inputs) {
        iters.emplace_back(*s, stage, tracker, counters);
        stencils.emplace_back(*s, stage, per_input);
    }

    auto deliver = [&](std::vector<std::vector<detail::SlabStencil::Result>> &per) {
        for (std::size_t r = 0; r < per[0].size(); ++r) {
            const auto &head = per[0][r];
            if (op == FieldOp::Derivative || op == FieldOp::Laplacian) {
                sink(head.row_begin, head.row_end, head.values);
                continue;
            }
            std::vector<detail::Components> grads;
            for (auto &p : per) grads.push_back(std::move(p[r].values));
            auto out = op == FieldOp::Divergence ? detail::combine_divergence(L, head.row_begin, head.row_end, grads)
                                                 : detail::combine_curl(L, head.row_begin, head.row_end, grads);
            sink(head.row_begin, head.row_end, out);
        }
    };

    const std::size_t slabs = iters[0].slab_count();
    for (std::size_t k = 0; k < slabs; ++k) {
        std::vector<std::vector<detail::SlabStencil::Result>> per;
        for (std::size_t c = 0; c < inputs.size(); ++c) {
            auto v = iters[c].next();
            per.push_back(stencils[c].push(std::move(*v)));
        }
        deliver(per);
    }
    std::vector<std::vector<detail::SlabStencil::Result>> per;
    for (auto &st : stencils) per.push_back(st.finish());
    deliver(per);
}

/// Streams `op` and assembles the full result in memory.
inline DerivedField stream_field_op_collect(std::span<const CompressedStream *const> inputs, FieldOp op, Stage stage,
                                            std::shared_ptr<SlabTracker> tracker = {}) {
    require(!inputs.empty(), ErrorCode::InvalidArgument, "no input fields");
    const auto &shape = inputs[0]->shape();
    detail::Lattice L(shape);
    DerivedField out{shape, op, {}};
    stream_field_op(
        inputs, op, stage,
        [&](std::size_t r0, std::size_t, const std::vector<std::vector<double>> &vals) {
            if (out.components.empty()) out.components = detail::make_components(vals.size(), shape.size());
            for (std::size_t c = 0; c < vals.size(); ++c)
                std::copy(vals[c].begin(), vals[c].end(),
                          out.components[c].begin() + static_cast<std::ptrdiff_t>(r0 * L.plane));
        },
        std::move(tracker));
    return out;
}

}  // namespace hsz

#endif
