#ifndef HSZ_DERIVATIVES_HPP
#define HSZ_DERIVATIVES_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hsz/compressors.hpp"
#include "hsz/error.hpp"
#include "hsz/field.hpp"
#include "hsz/grid.hpp"
#include "hsz/kind.hpp"
#include "hsz/stages.hpp"

namespace hsz {

enum class FieldOp { Derivative, Laplacian, Divergence, Curl };

inline std::string_view to_string(FieldOp op) {
    switch (op) {
        case FieldOp::Derivative: return "derivative";
        case FieldOp::Laplacian: return "laplacian";
        case FieldOp::Divergence: return "divergence";
        case FieldOp::Curl: return "curl";
    }
    return "?";
}

/// Stencil output. Entries whose stencil leaves the domain are exactly 0.
///
/// Derivative components follow axis order (axis 0 first); curl in 3D is
/// (d1 w - d2 v, d2 u - d0 w, d0 v - d1 u) and in 2D the scalar d1 u - d0 v.
struct DerivedField {
    GridShape shape;
    FieldOp op = FieldOp::Derivative;
    std::vector<std::vector<double>> components;
};

namespace detail {

/// 1-3D grid seen as (n0, n1, n2); a 2D grid maps to (n0, 1, n1) and a 1D grid to (n0, 1, 1).
/// `axes[c]` is the embedded axis carrying the c-th real axis.
struct Lattice {
    std::array<std::size_t, 3> n{1, 1, 1};
    std::array<std::size_t, 3> stride{1, 1, 1};
    std::vector<int> axes;
    std::size_t plane = 1;

    explicit Lattice(const GridShape &s) {
        n = as_3d(s);
        stride = {n[1] * n[2], n[2], 1};
        plane = n[1] * n[2];
        if (s.rank() == 1) axes = {0};
        else if (s.rank() == 2) axes = {0, 2};
        else axes = {0, 1, 2};
    }

    std::size_t rank() const { return axes.size(); }
    bool interior(const std::array<std::size_t, 3> &c, int a) const { return c[a] > 0 && c[a] + 1 < n[a]; }
    bool interior_all(const std::array<std::size_t, 3> &c) const {
        for (int a : axes)
            if (!interior(c, a)) return false;
        return true;
    }
};

using Components = std::vector<std::vector<double>>;

inline Components make_components(std::size_t count, std::size_t size) {
    return Components(count, std::vector<double>(size, 0.0));
}

/// Row-major stencils on quantization indices: integer differences, then one scale.
struct QuantScale {
    double eps;
    using value_type = std::int64_t;
    double derivative(std::int64_t hi, std::int64_t lo) const { return static_cast<double>(hi - lo) * eps; }
    double laplacian(std::int64_t sum) const { return static_cast<double>(sum) * (2.0 * eps); }
};

/// The same stencils on reconstructed values: (d+ - d-) / 2 and the unscaled Laplacian.
struct RealScale {
    using value_type = double;
    double derivative(double hi, double lo) const { return (hi - lo) / 2.0; }
    double laplacian(double sum) const { return sum; }
};

/// Derivative or Laplacian over axis-0 rows [r0, r1) of a row-major representation.
/// `at(linear)` must cover rows r0-1 .. r1 where they exist; output is local to the rows.
template <class Scale, class At>
void row_major_rows(const Lattice &L, FieldOp op, At &&at, std::size_t r0, std::size_t r1, const Scale &scale,
                    Components &out) {
    using V = typename Scale::value_type;
    const std::size_t base = r0 * L.plane;
    for (std::size_t i = r0; i < r1; ++i)
        for (std::size_t j = 0; j < L.n[1]; ++j)
            for (std::size_t k = 0; k < L.n[2]; ++k) {
                const std::array<std::size_t, 3> c{i, j, k};
                const std::size_t idx = i * L.plane + j * L.n[2] + k;
                if (op == FieldOp::Derivative) {
                    for (std::size_t comp = 0; comp < L.rank(); ++comp) {
                        int a = L.axes[comp];
                        if (!L.interior(c, a)) continue;
                        out[comp][idx - base] =
                            scale.derivative(static_cast<V>(at(idx + L.stride[a])), static_cast<V>(at(idx - L.stride[a])));
                    }
                } else {
                    if (!L.interior_all(c)) continue;
                    V sum = 0;
                    for (int a : L.axes)
                        sum += static_cast<V>(at(idx + L.stride[a])) + static_cast<V>(at(idx - L.stride[a]));
                    sum -= static_cast<V>(2 * L.rank()) * static_cast<V>(at(idx));
                    out[0][idx - base] = scale.laplacian(sum);
                }
            }
}

/// Stencils on block-mean residuals for block-rows covering rows [r0, r1).
///
/// Inside a block, residual differences equal index differences. A point on a block face
/// also sees the neighbouring block's mean, so each block precomputes its face corrections
/// (mu_c - mu_lo, mu_hi - mu_c for derivatives; mu_nbr - mu_c for the Laplacian) first.
/// `p(pos)` takes positions in block-contiguous order.
template <class At>
void block_mean_rows(const Lattice &L, const BlockGeometry &g, std::span<const std::int32_t> means, FieldOp op,
                     At &&p, std::size_t r0, std::size_t r1, double eps, Components &out) {
    const std::size_t rank = L.rank();
    const std::size_t base = r0 * L.plane;
    const std::size_t per_row = g.blocks_per_block_row();
    const std::size_t first_block = (r0 / g.block_dims()[0]) * per_row;
    const std::size_t last_block = std::min(g.block_count(), ((r1 + g.block_dims()[0] - 1) / g.block_dims()[0]) * per_row);
    const auto &shape = g.shape();

    for (std::size_t b = first_block; b < last_block; ++b) {
        const Coord o = g.origin(b);
        const Coord e = g.extents(b);
        const Coord bc = g.block_coord(b);
        const std::int64_t mu_c = means[b];
        // Face corrections per real axis.
        std::array<std::int64_t, 3> d_lo{}, d_hi{}, l_lo{}, l_hi{};
        for (std::size_t a = 0; a < rank; ++a) {
            if (bc[a] > 0) {
                Coord nb = bc;
                --nb[a];
                std::int64_t mu = means[g.block_index(nb)];
                d_lo[a] = mu_c - mu;
                l_lo[a] = mu - mu_c;
            }
            if (bc[a] + 1 < g.block_grid()[a]) {
                Coord nb = bc;
                ++nb[a];
                std::int64_t mu = means[g.block_index(nb)];
                d_hi[a] = mu - mu_c;
                l_hi[a] = mu - mu_c;
            }
        }
        std::array<std::size_t, 3> local_stride{1, 1, 1};
        for (std::size_t a = rank; a-- > 1;) local_stride[a - 1] = local_stride[a] * e[a];

        const std::size_t block_pos = g.block_offset(b);
        std::size_t t = 0;
        Coord lc{};
        auto neighbour = [&](const Coord &x, std::size_t a, bool up) -> std::int64_t {
            bool inside = up ? lc[a] + 1 < e[a] : lc[a] > 0;
            if (inside) return p(up ? block_pos + t + local_stride[a] : block_pos + t - local_stride[a]);
            Coord y = x;
            y[a] = up ? y[a] + 1 : y[a] - 1;
            return p(stream_position(g, StreamOrder::BlockContiguous, y));
        };
        const std::size_t count = g.block_size(b);
        for (t = 0; t < count; ++t) {
            // local coordinate of t within the block
            std::size_t rem = t;
            for (std::size_t a = rank; a-- > 0;) {
                lc[a] = rem % e[a];
                rem /= e[a];
            }
            Coord x{};
            for (std::size_t a = 0; a < rank; ++a) x[a] = o[a] + lc[a];
            const std::size_t out_idx = shape.linear(x) - base;
            auto interior = [&](std::size_t a) { return x[a] > 0 && x[a] + 1 < shape.extent(a); };
            if (op == FieldOp::Derivative) {
                for (std::size_t a = 0; a < rank; ++a) {
                    if (!interior(a)) continue;
                    std::int64_t v = neighbour(x, a, true) - neighbour(x, a, false);
                    if (lc[a] == 0) v += d_lo[a];
                    if (lc[a] + 1 == e[a]) v += d_hi[a];
                    out[a][out_idx] = static_cast<double>(v) * eps;
                }
            } else {
                bool all = true;
                for (std::size_t a = 0; a < rank; ++a) all = all && interior(a);
                if (!all) continue;
                std::int64_t v = -static_cast<std::int64_t>(2 * rank) * p(block_pos + t);
                for (std::size_t a = 0; a < rank; ++a) {
                    v += neighbour(x, a, true) + neighbour(x, a, false);
                    if (lc[a] == 0) v += l_lo[a];
                    if (lc[a] + 1 == e[a]) v += l_hi[a];
                }
                out[0][out_idx] = static_cast<double>(v) * (2.0 * eps);
            }
        }
    }
}

/// Stencils on Lorenzo residuals, one axis-0 hyperplane at a time, without rebuilding q.
///
/// With P_i the 2D prefix sum of hyperplane i, A the running sum over hyperplanes of
/// prefix sums along the last axis, and B the running sum of prefix sums along the middle
/// axis (the column prefix in 2D):
///   q[i+1] - q[i]       = P_{i+1}
///   q[.,j+1] - q[.,j]   = A(j+1)
///   q[..,k+1] - q[..,k] = B(k+1)
/// so every central difference and the Laplacian are sums of two prefix entries.
class LorenzoStencil {
public:
    using Sink = std::function<void(std::size_t plane_index, Components &&values)>;

    LorenzoStencil(const GridShape &shape, FieldOp op, double eps, Sink sink)
        : L_(shape), op_(op), eps_(eps), sink_(std::move(sink)), cur_(L_.plane), nxt_(L_.plane), a_(L_.plane),
          b_(L_.plane) {
        require(op == FieldOp::Derivative || op == FieldOp::Laplacian, ErrorCode::InvalidArgument,
                "stencil engine computes derivatives or Laplacians");
    }

    void push(std::span<const std::int32_t> plane) {
        require(plane.size() == L_.plane, ErrorCode::ShapeMismatch, "hyperplane size mismatch");
        if (pushed_ == 0) {
            prefix2d(plane, cur_);
            accumulate(plane);
        } else {
            prefix2d(plane, nxt_);
            emit(pushed_ - 1, true);
            accumulate(plane);
            std::swap(cur_, nxt_);
        }
        ++pushed_;
    }

    void finish() {
        if (pushed_ > 0 && !finished_) emit(pushed_ - 1, false);
        finished_ = true;
    }

private:
    void prefix2d(std::span<const std::int32_t> p, std::vector<std::int64_t> &out) const {
        const std::size_t n1 = L_.n[1], n2 = L_.n[2];
        for (std::size_t j = 0; j < n1; ++j) {
            std::int64_t row = 0;
            for (std::size_t k = 0; k < n2; ++k) {
                row += p[j * n2 + k];
                out[j * n2 + k] = row + (j ? out[(j - 1) * n2 + k] : 0);
            }
        }
    }

    void accumulate(std::span<const std::int32_t> p) {
        const std::size_t n1 = L_.n[1], n2 = L_.n[2];
        for (std::size_t j = 0; j < n1; ++j) {
            std::int64_t row = 0;
            for (std::size_t k = 0; k < n2; ++k) {
                const std::size_t idx = j * n2 + k;
                row += p[idx];
                a_[idx] += row;
                col_[k] = (j ? col_[k] : 0) + p[idx];
                b_[idx] += col_[k];
            }
        }
    }

    void emit(std::size_t i, bool have_next) {
        const std::size_t n1 = L_.n[1], n2 = L_.n[2];
        Components out = make_components(op_ == FieldOp::Derivative ? L_.rank() : 1, L_.plane);
        for (std::size_t j = 0; j < n1; ++j)
            for (std::size_t k = 0; k < n2; ++k) {
                const std::array<std::size_t, 3> c{i, j, k};
                const std::size_t idx = j * n2 + k;
                const bool in0 = have_next && L_.interior(c, 0);
                if (op_ == FieldOp::Derivative) {
                    for (std::size_t comp = 0; comp < L_.rank(); ++comp) {
                        int a = L_.axes[comp];
                        std::int64_t v = 0;
                        if (a == 0) {
                            if (!in0) continue;
                            v = nxt_[idx] + cur_[idx];
                        } else if (a == 1) {
                            if (!L_.interior(c, 1)) continue;
                            v = a_[idx + n2] + a_[idx];
                        } else {
                            if (!L_.interior(c, 2)) continue;
                            v = b_[idx + 1] + b_[idx];
                        }
                        out[comp][idx] = static_cast<double>(v) * eps_;
                    }
                } else {
                    if (!in0 || !L_.interior_all(c)) continue;
                    std::int64_t v = nxt_[idx] - cur_[idx];
                    for (int a : L_.axes) {
                        if (a == 1) v += a_[idx + n2] - a_[idx];
                        if (a == 2) v += b_[idx + 1] - b_[idx];
                    }
                    out[0][idx] = static_cast<double>(v) * (2.0 * eps_);
                }
            }
        sink_(i, std::move(out));
    }

    Lattice L_;
    FieldOp op_;
    double eps_;
    Sink sink_;
    std::vector<std::int64_t> cur_, nxt_, a_, b_;
    std::vector<std::int64_t> col_ = std::vector<std::int64_t>(L_.n[2], 0);
    std::size_t pushed_ = 0;
    bool finished_ = false;
};

inline Components combine_divergence(const Lattice &L, std::size_t r0, std::size_t r1,
                                     const std::vector<Components> &grads) {
    Components out = make_components(1, (r1 - r0) * L.plane);
    for (std::size_t i = r0; i < r1; ++i)
        for (std::size_t j = 0; j < L.n[1]; ++j)
            for (std::size_t k = 0; k < L.n[2]; ++k) {
                if (!L.interior_all({i, j, k})) continue;
                std::size_t idx = (i - r0) * L.plane + j * L.n[2] + k;
                double v = 0;
                for (std::size_t c = 0; c < L.rank(); ++c) v += grads[c][c][idx];
                out[0][idx] = v;
            }
    return out;
}

inline Components combine_curl(const Lattice &L, std::size_t r0, std::size_t r1, const std::vector<Components> &grads) {
    const bool three = L.rank() == 3;
    Components out = make_components(three ? 3 : 1, (r1 - r0) * L.plane);
    // (result component, field minuend, axis minuend, field subtrahend, axis subtrahend)
    struct Term { std::size_t f1, a1, f2, a2; };
    std::vector<Term> terms = three ? std::vector<Term>{{2, 1, 1, 2}, {0, 2, 2, 0}, {1, 0, 0, 1}}
                                    : std::vector<Term>{{0, 1, 1, 0}};
    for (std::size_t i = r0; i < r1; ++i)
        for (std::size_t j = 0; j < L.n[1]; ++j)
            for (std::size_t k = 0; k < L.n[2]; ++k) {
                const std::array<std::size_t, 3> c{i, j, k};
                std::size_t idx = (i - r0) * L.plane + j * L.n[2] + k;
                for (std::size_t r = 0; r < terms.size(); ++r) {
                    const auto &t = terms[r];
                    if (!L.interior(c, L.axes[t.a1]) || !L.interior(c, L.axes[t.a2])) continue;
                    out[r][idx] = grads[t.f1][t.a1][idx] - grads[t.f2][t.a2][idx];
                }
            }
    return out;
}

inline void check_vector_inputs(FieldOp op, const GridShape &shape, std::size_t count) {
    if (op == FieldOp::Divergence) {
        require(count == shape.rank(), ErrorCode::InvalidArgument, "divergence needs one component per dimension");
    } else if (op == FieldOp::Curl) {
        require(shape.rank() >= 2, ErrorCode::InvalidArgument, "curl needs 2D or 3D fields");
        require(count == shape.rank(), ErrorCode::InvalidArgument, "curl needs one component per dimension");
    } else {
        require(count == 1, ErrorCode::InvalidArgument, "scalar operation takes one field");
    }
}

inline DerivedField finish(const GridShape &shape, FieldOp op, Components comps) {
    return DerivedField{shape, op, std::move(comps)};
}

}  // namespace detail

// ---- stage 3: quantization indices ----

inline DerivedField derivative_from_dq(const QuantizedField &q) {
    detail::Lattice L(q.shape);
    auto out = detail::make_components(L.rank(), q.size());
    detail::row_major_rows(L, FieldOp::Derivative, [&](std::size_t i) { return q.values[i]; }, 0, L.n[0],
                           detail::QuantScale{q.eps}, out);
    return detail::finish(q.shape, FieldOp::Derivative, std::move(out));
}

inline DerivedField laplacian_from_dq(const QuantizedField &q) {
    detail::Lattice L(q.shape);
    auto out = detail::make_components(1, q.size());
    detail::row_major_rows(L, FieldOp::Laplacian, [&](std::size_t i) { return q.values[i]; }, 0, L.n[0],
                           detail::QuantScale{q.eps}, out);
    return detail::finish(q.shape, FieldOp::Laplacian, std::move(out));
}

// ---- stage 4: reconstructed values ----

template <class T>
DerivedField derivative_from_df(const Field<T> &f) {
    detail::Lattice L(f.shape);
    auto out = detail::make_components(L.rank(), f.size());
    detail::row_major_rows(L, FieldOp::Derivative, [&](std::size_t i) { return static_cast<double>(f.values[i]); }, 0,
                           L.n[0], detail::RealScale{}, out);
    return detail::finish(f.shape, FieldOp::Derivative, std::move(out));
}

template <class T>
DerivedField laplacian_from_df(const Field<T> &f) {
    detail::Lattice L(f.shape);
    auto out = detail::make_components(1, f.size());
    detail::row_major_rows(L, FieldOp::Laplacian, [&](std::size_t i) { return static_cast<double>(f.values[i]); }, 0,
                           L.n[0], detail::RealScale{}, out);
    return detail::finish(f.shape, FieldOp::Laplacian, std::move(out));
}

// ---- stage 2: decorrelated residuals (nd kinds only) ----

namespace detail {

inline DerivedField stencil_from_dp(const DecorrelatedStream &s, FieldOp op) {
    if (!is_nd(s.kind))
        fail(ErrorCode::UnsupportedStage,
             "flat compressors do not preserve the multidimensional layout; use stage quantized");
    require(s.complete(), ErrorCode::MissingContext, "stencils need the complete decorrelated stream");
    Lattice L(s.shape);
    const std::size_t ncomp = op == FieldOp::Derivative ? L.rank() : 1;
    if (s.kind == CompressorKind::HSZX_ND) {
        auto out = make_components(ncomp, s.values.size());
        block_mean_rows(L, s.geometry, s.metadata, op, [&](std::size_t pos) -> std::int64_t { return s.values[pos]; },
                        0, L.n[0], s.eps, out);
        return finish(s.shape, op, std::move(out));
    }
    auto out = make_components(ncomp, s.values.size());
    LorenzoStencil engine(s.shape, op, s.eps, [&](std::size_t i, Components &&plane) {
        for (std::size_t c = 0; c < ncomp; ++c)
            std::copy(plane[c].begin(), plane[c].end(), out[c].begin() + static_cast<std::ptrdiff_t>(i * L.plane));
    });
    std::span<const std::int32_t> vals(s.values);
    for (std::size_t i = 0; i < L.n[0]; ++i) engine.push(vals.subspan(i * L.plane, L.plane));
    engine.finish();
    return finish(s.shape, op, std::move(out));
}

}  // namespace detail

inline DerivedField derivative_from_dp(const DecorrelatedStream &s) { return detail::stencil_from_dp(s, FieldOp::Derivative); }
inline DerivedField laplacian_from_dp(const DecorrelatedStream &s) { return detail::stencil_from_dp(s, FieldOp::Laplacian); }

// ---- multivariate ----

namespace detail {

inline DerivedField combine(FieldOp op, const std::vector<DerivedField> &grads) {
    require(!grads.empty(), ErrorCode::InvalidArgument, "no input fields");
    const auto &shape = grads[0].shape;
    for (const auto &g : grads) require(g.shape == shape, ErrorCode::ShapeMismatch, "vector components differ in shape");
    check_vector_inputs(op, shape, grads.size());
    Lattice L(shape);
    std::vector<Components> comps;
    comps.reserve(grads.size());
    for (const auto &g : grads) comps.push_back(g.components);
    auto out = op == FieldOp::Divergence ? combine_divergence(L, 0, L.n[0], comps) : combine_curl(L, 0, L.n[0], comps);
    return finish(shape, op, std::move(out));
}

}  // namespace detail

inline DerivedField divergence_from_dq(std::span<const QuantizedField> comps) {
    std::vector<DerivedField> g;
    for (const auto &q : comps) g.push_back(derivative_from_dq(q));
    return detail::combine(FieldOp::Divergence, g);
}

inline DerivedField curl_from_dq(std::span<const QuantizedField> comps) {
    std::vector<DerivedField> g;
    for (const auto &q : comps) g.push_back(derivative_from_dq(q));
    return detail::combine(FieldOp::Curl, g);
}

inline DerivedField divergence_from_dp(std::span<const DecorrelatedStream> comps) {
    std::vector<DerivedField> g;
    for (const auto &s : comps) {
        require(s.kind == comps[0].kind, ErrorCode::KindMismatch, "vector components use different compressors");
        g.push_back(derivative_from_dp(s));
    }
    return detail::combine(FieldOp::Divergence, g);
}

inline DerivedField curl_from_dp(std::span<const DecorrelatedStream> comps) {
    std::vector<DerivedField> g;
    for (const auto &s : comps) {
        require(s.kind == comps[0].kind, ErrorCode::KindMismatch, "vector components use different compressors");
        g.push_back(derivative_from_dp(s));
    }
    return detail::combine(FieldOp::Curl, g);
}

template <class T>
DerivedField divergence_from_df(std::span<const Field<T>> comps) {
    std::vector<DerivedField> g;
    for (const auto &f : comps) g.push_back(derivative_from_df(f));
    return detail::combine(FieldOp::Divergence, g);
}

template <class T>
DerivedField curl_from_df(std::span<const Field<T>> comps) {
    std::vector<DerivedField> g;
    for (const auto &f : comps) g.push_back(derivative_from_df(f));
    return detail::combine(FieldOp::Curl, g);
}

// ---- container-level dispatch ----

inline bool field_op_supported(CompressorKind kind, Stage stage) {
    if (stage == Stage::Meta) return false;
    if (stage == Stage::Decorrelated) return is_nd(kind);
    return true;
}

inline Stage auto_field_stage(CompressorKind kind) { return is_nd(kind) ? Stage::Decorrelated : Stage::Quantized; }

/// Runs `op` on one (derivative, Laplacian) or several (divergence, curl) compressed fields.
inline DerivedField field_op(std::span<const CompressedStream> inputs, FieldOp op, Stage stage) {
    require(!inputs.empty(), ErrorCode::InvalidArgument, "no input fields");
    const auto kind = inputs[0].kind();
    for (const auto &s : inputs) {
        require(s.kind() == kind, ErrorCode::KindMismatch, "vector components use different compressors");
        require(s.shape() == inputs[0].shape(), ErrorCode::ShapeMismatch, "vector components differ in shape");
    }
    detail::check_vector_inputs(op, inputs[0].shape(), inputs.size());
    if (!field_op_supported(kind, stage))
        fail(ErrorCode::UnsupportedStage, std::string(to_string(op)) + " is not available at stage " +
                                              std::string(to_string(stage)) + " for " + std::string(to_string(kind)));
    const bool scalar = op == FieldOp::Derivative || op == FieldOp::Laplacian;
    const FieldOp per_input = op == FieldOp::Laplacian ? FieldOp::Laplacian : FieldOp::Derivative;
    std::vector<DerivedField> parts;
    for (const auto &s : inputs) {
        switch (stage) {
            case Stage::Decorrelated: {
                auto d = decode_stream(s);
                parts.push_back(detail::stencil_from_dp(d, per_input));
                break;
            }
            case Stage::Quantized: {
                auto q = decompress_quantized(s);
                parts.push_back(per_input == FieldOp::Laplacian ? laplacian_from_dq(q) : derivative_from_dq(q));
                break;
            }
            default: {
                auto f = decompress_f64(s);
                parts.push_back(per_input == FieldOp::Laplacian ? laplacian_from_df(f) : derivative_from_df(f));
                break;
            }
        }
    }
    if (scalar) return std::move(parts[0]);
    return detail::combine(op, parts);
}

}  // namespace hsz

#endif
