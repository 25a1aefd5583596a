#ifndef HSZ_STATS_HPP
#define HSZ_STATS_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "hsz/compressors.hpp"
#include "hsz/error.hpp"
#include "hsz/field.hpp"
#include "hsz/kind.hpp"
#include "hsz/stages.hpp"

namespace hsz {

using int128 = __int128;

enum class StatOp { Mean, Std };

struct StatResult {
    double value = 0.0;
    Stage stage_used = Stage::Full;
    StatOp op = StatOp::Mean;
};

namespace detail {

inline double scaled_mean(int128 sum, std::size_t n, double eps) {
    return static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(n)) * (2.0 * eps);
}

/// sqrt((s2 - s1^2/N) / (N-1)) * 2eps with the numerator formed exactly as N*s2 - s1^2.
inline double std_from_sums(int128 s1, int128 s2, std::size_t n, double eps) {
    if (n < 2) fail(ErrorCode::UndefinedStd, "standard deviation needs at least two points");
    int128 num = static_cast<int128>(n) * s2 - s1 * s1;
    long double var = static_cast<long double>(num) / (static_cast<long double>(n) * static_cast<long double>(n - 1));
    return static_cast<double>(std::sqrt(var)) * (2.0 * eps);
}

}  // namespace detail

/// Mean from block means alone: (sum M_b * S_b / N) * 2eps.
inline double mean_from_meta(std::span<const std::int32_t> means, std::span<const std::size_t> block_sizes, double eps) {
    require(!means.empty(), ErrorCode::InvalidArgument, "no block metadata");
    require(means.size() == block_sizes.size(), ErrorCode::ShapeMismatch, "one block size per block mean");
    int128 sum = 0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < means.size(); ++b) {
        sum += static_cast<int128>(means[b]) * static_cast<int128>(block_sizes[b]);
        n += block_sizes[b];
    }
    return detail::scaled_mean(sum, n, eps);
}

inline double mean_from_dq(const QuantizedField &q) {
    require(q.size() > 0, ErrorCode::InvalidArgument, "empty field");
    int128 sum = 0;
    for (auto v : q.values) sum += v;
    return detail::scaled_mean(sum, q.size(), q.eps);
}

inline double std_from_dq(const QuantizedField &q) {
    int128 s1 = 0, s2 = 0;
    for (auto v : q.values) {
        s1 += v;
        s2 += static_cast<int128>(static_cast<std::int64_t>(v) * v);
    }
    return detail::std_from_sums(s1, s2, q.size(), q.eps);
}

inline double mean_from_dp(const DecorrelatedStream &s) {
    require(s.complete(), ErrorCode::MissingContext, "mean needs the complete decorrelated stream");
    const std::size_t n = s.values.size();
    int128 sum = 0;
    switch (s.kind) {
        case CompressorKind::HSZX:
        case CompressorKind::HSZX_ND: {
            const auto &g = s.geometry;
            for (std::size_t b = 0; b < g.block_count(); ++b) {
                std::int64_t block = 0;
                for (std::size_t t = g.block_offset(b); t < g.block_offset(b + 1); ++t) block += s.values[t];
                sum += block + static_cast<int128>(s.metadata[b]) * static_cast<int128>(g.block_size(b));
            }
            break;
        }
        case CompressorKind::HSZP:
            // q_i = sum_{t<=i} p_t, so p_i contributes to the N - i values at or after it.
            for (std::size_t i = 0; i < n; ++i) sum += static_cast<int128>(s.values[i]) * static_cast<int128>(n - i);
            break;
        case CompressorKind::HSZP_ND: {
            auto [n0, n1, n2] = detail::as_3d(s.shape);
            std::size_t idx = 0;
            for (std::size_t i = 0; i < n0; ++i)
                for (std::size_t j = 0; j < n1; ++j) {
                    const auto wij = static_cast<int128>((n0 - i) * (n1 - j));
                    for (std::size_t k = 0; k < n2; ++k, ++idx)
                        sum += wij * static_cast<int128>(n2 - k) * static_cast<int128>(s.values[idx]);
                }
            break;
        }
    }
    return detail::scaled_mean(sum, n, s.eps);
}

inline double std_from_dp(const DecorrelatedStream &s) {
    require(s.complete(), ErrorCode::MissingContext, "std needs the complete decorrelated stream");
    const std::size_t n = s.values.size();
    if (n < 2) fail(ErrorCode::UndefinedStd, "standard deviation needs at least two points");
    switch (s.kind) {
        case CompressorKind::HSZX:
        case CompressorKind::HSZX_ND: {
            // Deviations are taken from the integer mean round(sum M_b S_b / N), not the exact mean.
            const auto &g = s.geometry;
            int128 weighted = 0;
            for (std::size_t b = 0; b < g.block_count(); ++b)
                weighted += static_cast<int128>(s.metadata[b]) * static_cast<int128>(g.block_size(b));
            int128 two_n = 2 * static_cast<int128>(n);
            int128 num = 2 * weighted + static_cast<int128>(n);
            int128 mu = num / two_n;
            if (num % two_n != 0 && num < 0) --mu;
            int128 ss = 0;
            for (std::size_t b = 0; b < g.block_count(); ++b) {
                const int128 shift = static_cast<int128>(s.metadata[b]) - mu;
                bool constant = true;
                for (std::size_t t = g.block_offset(b); t < g.block_offset(b + 1); ++t) {
                    if (s.values[t] != 0) { constant = false; break; }
                }
                if (constant) {
                    ss += static_cast<int128>(g.block_size(b)) * shift * shift;
                    continue;
                }
                for (std::size_t t = g.block_offset(b); t < g.block_offset(b + 1); ++t) {
                    int128 d = s.values[t] + shift;
                    ss += d * d;
                }
            }
            long double var = static_cast<long double>(ss) / static_cast<long double>(n - 1);
            return static_cast<double>(std::sqrt(var)) * (2.0 * s.eps);
        }
        case CompressorKind::HSZP: {
            int128 eta = 0, s1 = 0, s2 = 0;
            for (auto p : s.values) {
                eta += p;
                s1 += eta;
                s2 += eta * eta;
            }
            return detail::std_from_sums(s1, s2, n, s.eps);
        }
        case CompressorKind::HSZP_ND: {
            // colSum holds the previous hyperplane of q; each hyperplane adds its own 2D prefix
            // sum. In 2D the prefix is a running row sum (a scalar).
            auto [n0, n1, n2] = detail::as_3d(s.shape);
            std::vector<std::int64_t> col_sum(n1 * n2, 0);
            std::vector<std::int64_t> plane_prefix(n2);
            int128 s1 = 0, s2 = 0;
            std::size_t idx = 0;
            for (std::size_t i = 0; i < n0; ++i) {
                std::fill(plane_prefix.begin(), plane_prefix.end(), 0);
                for (std::size_t j = 0; j < n1; ++j) {
                    std::int64_t pref_sum = 0;
                    for (std::size_t k = 0; k < n2; ++k, ++idx) {
                        pref_sum += s.values[idx];
                        plane_prefix[k] += pref_sum;
                        auto &q = col_sum[j * n2 + k];
                        q += plane_prefix[k];
                        s1 += q;
                        s2 += static_cast<int128>(q) * q;
                    }
                }
            }
            return detail::std_from_sums(s1, s2, n, s.eps);
        }
    }
    fail(ErrorCode::InvalidArgument, "unknown compressor kind");
}

/// Stage-4 statistics on reconstructed values.
template <class T>
double mean_from_df(const Field<T> &f) {
    require(f.size() > 0, ErrorCode::InvalidArgument, "empty field");
    double sum = 0;
    for (auto v : f.values) sum += static_cast<double>(v);
    return sum / static_cast<double>(f.size());
}

template <class T>
double std_from_df(const Field<T> &f) {
    if (f.size() < 2) fail(ErrorCode::UndefinedStd, "standard deviation needs at least two points");
    double mu = mean_from_df(f);
    double ss = 0;
    for (auto v : f.values) ss += (static_cast<double>(v) - mu) * (static_cast<double>(v) - mu);
    return std::sqrt(ss / static_cast<double>(f.size() - 1));
}

inline bool stat_supported(StatOp op, CompressorKind kind, Stage stage) {
    if (!supports_stage(kind, stage)) return false;
    return !(op == StatOp::Std && stage == Stage::Meta);
}

/// Lowest stage that can answer the query: metadata for HSZx means, decorrelated otherwise.
inline Stage auto_stat_stage(StatOp op, CompressorKind kind) {
    return (op == StatOp::Mean && is_hszx_family(kind)) ? Stage::Meta : Stage::Decorrelated;
}

inline StatResult compute_stat(const CompressedStream &s, StatOp op, Stage stage) {
    if (!stat_supported(op, s.kind(), stage))
        fail(ErrorCode::UnsupportedStage, std::string(op == StatOp::Mean ? "mean" : "std") + " is not available at stage " +
                                              std::string(to_string(stage)) + " for " + std::string(to_string(s.kind())));
    StatResult r{0.0, stage, op};
    switch (stage) {
        case Stage::Meta: {
            auto sizes = geometry_of(s.header()).block_sizes();
            r.value = mean_from_meta(s.metadata(), sizes, s.eps());
            break;
        }
        case Stage::Decorrelated: {
            auto d = decode_stream(s);
            r.value = op == StatOp::Mean ? mean_from_dp(d) : std_from_dp(d);
            break;
        }
        case Stage::Quantized: {
            auto q = decompress_quantized(s);
            r.value = op == StatOp::Mean ? mean_from_dq(q) : std_from_dq(q);
            break;
        }
        case Stage::Full: {
            auto f = decompress_f64(s);
            r.value = op == StatOp::Mean ? mean_from_df(f) : std_from_df(f);
            break;
        }
    }
    return r;
}

}  // namespace hsz

#endif
