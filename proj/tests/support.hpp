#ifndef HSZ_TESTS_SUPPORT_HPP
#define HSZ_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hsz/hsz.hpp"
#include "oracle.hpp"

namespace hsz_test {

using namespace hsz;

inline constexpr CompressorKind kAllKinds[] = {CompressorKind::HSZP, CompressorKind::HSZP_ND, CompressorKind::HSZX,
                                               CompressorKind::HSZX_ND};

/// The 2x4 worked example.
inline FieldF32 worked_y() {
    return FieldF32(GridShape{2, 4}, {1.2f, 1.5f, -2.3f, -2.5f, 2.5f, -1.0f, 2.0f, 1.7f});
}

inline CompressedStream worked_stream(CompressorKind kind = CompressorKind::HSZX_ND) {
    CompressOptions o;
    o.block_dims = is_nd(kind) ? std::vector<std::size_t>{2, 2} : std::vector<std::size_t>{4};
    return compress(worked_y(), kind, ErrorBound::absolute(0.1), o);
}

/// Smooth field with noise: low-frequency sinusoids plus uniform jitter of relative size `noise`.
inline FieldF32 random_field(std::mt19937_64 &rng, const std::vector<std::size_t> &dims, double noise = 0.05) {
    GridShape shape(dims);
    FieldF32 f(shape);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double a[3], w[3], ph[3];
    for (int k = 0; k < 3; ++k) {
        a[k] = u(rng) * 10.0;
        w[k] = 0.05 + 0.3 * std::abs(u(rng));
        ph[k] = 3.0 * u(rng);
    }
    const double offset = 5.0 * u(rng);
    for (std::size_t t = 0; t < f.size(); ++t) {
        auto c = shape.coord(t);
        double v = offset;
        for (std::size_t k = 0; k < shape.rank(); ++k) v += a[k] * std::sin(w[k] * static_cast<double>(c[k]) + ph[k]);
        v += noise * 10.0 * u(rng);
        f.values[t] = static_cast<float>(v);
    }
    return f;
}

inline std::vector<std::size_t> random_dims(std::mt19937_64 &rng, std::size_t rank, std::size_t max_extent) {
    std::uniform_int_distribution<std::size_t> e(1, max_extent);
    std::vector<std::size_t> d(rank);
    for (auto &x : d) x = e(rng);
    return d;
}

inline CompressOptions random_blocks(std::mt19937_64 &rng, CompressorKind kind, std::size_t rank) {
    CompressOptions o;
    if (is_nd(kind)) {
        std::uniform_int_distribution<std::size_t> b(1, 9);
        o.block_dims.resize(rank);
        for (auto &x : o.block_dims) x = b(rng);
    } else {
        std::uniform_int_distribution<std::size_t> b(1, 70);
        o.block_dims = {b(rng)};
    }
    return o;
}

template <class T>
oracle::Grid to_grid(const Field<T> &f) {
    return {f.shape.dims(), std::vector<double>(f.values.begin(), f.values.end())};
}

inline double rel_diff(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

/// Largest |a-b| / max(|b|_inf, tiny) over all entries; relative to the field's scale so zeros compare cleanly.
inline double max_rel_error(const std::vector<double> &a, const std::vector<double> &b) {
    double scale = 0, err = 0;
    for (double x : b) scale = std::max(scale, std::abs(x));
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
    return scale > 0 ? err / scale : err;
}

}  // namespace hsz_test

#endif
