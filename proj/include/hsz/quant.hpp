#ifndef HSZ_QUANT_HPP
#define HSZ_QUANT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "hsz/error.hpp"
#include "hsz/field.hpp"

namespace hsz {

enum class BoundMode { Absolute, Relative };

/// User error bound; `Relative` scales by the value range of the field.
struct ErrorBound {
    BoundMode mode = BoundMode::Absolute;
    double requested = 0.0;

    static ErrorBound absolute(double v) { return {BoundMode::Absolute, v}; }
    static ErrorBound relative(double v) { return {BoundMode::Relative, v}; }
};

// |q| must stay below this so that neighbour differences and sign-magnitude coding never overflow.
inline constexpr double kMaxQuantIndex = 2147483646.0;

template <class T>
double resolve_eps(const Field<T> &field, const ErrorBound &bound) {
    require(field.size() > 0, ErrorCode::InvalidArgument, "empty field");
    require(std::isfinite(bound.requested) && bound.requested > 0, ErrorCode::InvalidArgument,
            "error bound must be positive");
    if (bound.mode == BoundMode::Absolute) return bound.requested;
    auto [lo, hi] = std::minmax_element(field.values.begin(), field.values.end());
    double range = static_cast<double>(*hi) - static_cast<double>(*lo);
    if (!(range > 0))
        fail(ErrorCode::ZeroValueRange, "field is constant; relative bound undefined, use an absolute bound");
    return bound.requested * range;
}

/// Linear-scaling quantization: floor(d / 2eps + 0.5), evaluated in double.
inline std::int32_t quantize(double d, double eps) {
    double x = std::floor(d / (2.0 * eps) + 0.5);
    if (!(std::fabs(x) <= kMaxQuantIndex))
        fail(ErrorCode::EpsTooSmall, "quantization index exceeds 32-bit range; increase the error bound");
    return static_cast<std::int32_t>(x);
}

inline double dequantize(std::int64_t q, double eps) { return 2.0 * static_cast<double>(q) * eps; }

template <class T>
QuantizedField quantize_field(const Field<T> &field, double eps) {
    require(eps > 0 && std::isfinite(eps), ErrorCode::InvalidArgument, "eps must be positive");
    QuantizedField q{field.shape, std::vector<std::int32_t>(field.size()), eps};
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (!std::isfinite(field.values[i])) fail(ErrorCode::NonFinite, "field contains NaN or Inf");
        q.values[i] = quantize(static_cast<double>(field.values[i]), eps);
    }
    return q;
}

template <class T = float>
Field<T> dequantize_field(const QuantizedField &q) {
    Field<T> f(q.shape);
    for (std::size_t i = 0; i < q.size(); ++i) f.values[i] = static_cast<T>(dequantize(q.values[i], q.eps));
    return f;
}

}  // namespace hsz

#endif
