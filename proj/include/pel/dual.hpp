#pragma once

#include <cmath>

namespace pel {

/// Forward-mode dual number: a value and its derivative along one seed direction.
struct Dual {
    double value = 0.0;
    double deriv = 0.0;

    constexpr Dual() = default;
    constexpr Dual(double v) : value(v) {}
    constexpr Dual(double v, double d) : value(v), deriv(d) {}

    static constexpr Dual variable(double v) { return {v, 1.0}; }
};

inline double value_of(const Dual &x) { return x.value; }

inline Dual operator+(const Dual &a, const Dual &b) { return {a.value + b.value, a.deriv + b.deriv}; }
inline Dual operator-(const Dual &a, const Dual &b) { return {a.value - b.value, a.deriv - b.deriv}; }
inline Dual operator-(const Dual &a) { return {-a.value, -a.deriv}; }
inline Dual operator*(const Dual &a, const Dual &b) {
    return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
}
inline Dual operator/(const Dual &a, const Dual &b) {
    double q = a.value / b.value;
    return {q, (a.deriv - q * b.deriv) / b.value};
}

inline Dual sin(const Dual &x) { return {std::sin(x.value), std::cos(x.value) * x.deriv}; }
inline Dual cos(const Dual &x) { return {std::cos(x.value), -std::sin(x.value) * x.deriv}; }
inline Dual exp(const Dual &x) {
    double e = std::exp(x.value);
    return {e, e * x.deriv};
}
inline Dual log(const Dual &x) { return {std::log(x.value), x.deriv / x.value}; }
inline Dual sqrt(const Dual &x) {
    double s = std::sqrt(x.value);
    return {s, x.deriv / (2.0 * s)};
}
inline Dual asin(const Dual &x) {
    return {std::asin(x.value), x.deriv / std::sqrt(1.0 - x.value * x.value)};
}
inline Dual atan2(const Dual &y, const Dual &x) {
    double den = x.value * x.value + y.value * y.value;
    return {std::atan2(y.value, x.value), (x.value * y.deriv - y.value * x.deriv) / den};
}

}  // namespace pel
