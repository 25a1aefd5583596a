#ifndef HSZ_FIELD_HPP
#define HSZ_FIELD_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "hsz/error.hpp"
#include "hsz/grid.hpp"

namespace hsz {

/// Dense row-major array with explicit shape.
template <class T>
struct Field {
    GridShape shape;
    std::vector<T> values;

    Field() = default;
    explicit Field(GridShape s) : shape(std::move(s)), values(shape.size()) {}
    Field(GridShape s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
        require(values.size() == shape.size(), ErrorCode::ShapeMismatch, "value count does not match shape");
    }

    std::size_t size() const { return values.size(); }
    T &operator[](std::size_t i) { return values[i]; }
    const T &operator[](std::size_t i) const { return values[i]; }
    T &at(const Coord &c) { return values[shape.linear(c)]; }
    const T &at(const Coord &c) const { return values[shape.linear(c)]; }
};

using FieldF32 = Field<float>;
using FieldF64 = Field<double>;

/// Quantization indices q with the absolute bound they were produced under.
struct QuantizedField {
    GridShape shape;
    std::vector<std::int32_t> values;
    double eps = 0.0;

    std::size_t size() const { return values.size(); }
    std::int32_t at(const Coord &c) const { return values[shape.linear(c)]; }
};

template <class T>
void require_finite(const Field<T> &f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!std::isfinite(f.values[i]))
            fail(ErrorCode::NonFinite, "field contains NaN or Inf at index " + std::to_string(i));
    }
}

}  // namespace hsz

#endif
