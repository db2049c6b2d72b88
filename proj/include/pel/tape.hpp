#pragma once

// Reverse-mode differentiation over real scalars.
//
// A GradTape records every primitive as a node holding at most two parent
// indices and the local partial derivatives with respect to them. Nodes are
// appended in evaluation order, so parents always precede children and one
// reverse sweep accumulates all adjoints. A tape belongs to a single thread.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace pel {

class GradTape;

/// Scalar recorded on a GradTape. A Var without a tape is a constant.
struct Var {
    double value = 0.0;
    std::int32_t index = -1;
    GradTape *tape = nullptr;

    Var() = default;
    Var(double v) : value(v) {}
    Var(double v, std::int32_t i, GradTape *t) : value(v), index(i), tape(t) {}

    bool is_constant() const { return tape == nullptr; }
};

inline double value_of(const Var &x) { return x.value; }

class GradTape {
  public:
    struct Node {
        std::int32_t a;
        std::int32_t b;
        double da;
        double db;
    };

    GradTape() = default;
    GradTape(const GradTape &) = delete;
    GradTape &operator=(const GradTape &) = delete;

    /// New independent leaf.
    Var variable(double v) { return push(v, -1, 0.0, -1, 0.0); }

    Var push(double v, std::int32_t a, double da, std::int32_t b, double db) {
        auto idx = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back({a, b, da, db});
        if (first_nonfinite_ < 0 && !std::isfinite(v)) {
            first_nonfinite_ = idx;
        }
        return {v, idx, this};
    }

    std::size_t size() const { return nodes_.size(); }

    /// Index of the first node whose value was NaN or Inf, or -1.
    std::int32_t first_nonfinite() const { return first_nonfinite_; }

    /// Reverse sweep seeded at `output`; returns the adjoint of every node.
    const std::vector<double> &adjoints(const Var &output);

    /// Adjoints of `output` with respect to the given leaves.
    std::vector<double> gradient(const Var &output, std::span<const Var> leaves);

    /// Drops all nodes but keeps the allocation for reuse.
    void clear();

    std::span<const Node> nodes() const { return nodes_; }

  private:
    std::vector<Node> nodes_;
    std::vector<double> adjoints_;
    std::int32_t first_nonfinite_ = -1;
};

namespace detail {

inline Var unary(const Var &x, double v, double dx) {
    if (x.is_constant()) {
        return Var(v);
    }
    return x.tape->push(v, x.index, dx, -1, 0.0);
}

inline Var binary(const Var &x, const Var &y, double v, double dx, double dy) {
    if (x.is_constant() && y.is_constant()) {
        return Var(v);
    }
    GradTape *tape = x.is_constant() ? y.tape : x.tape;
    if (x.is_constant()) {
        return tape->push(v, y.index, dy, -1, 0.0);
    }
    if (y.is_constant()) {
        return tape->push(v, x.index, dx, -1, 0.0);
    }
    return tape->push(v, x.index, dx, y.index, dy);
}

}  // namespace detail

inline Var operator+(const Var &a, const Var &b) { return detail::binary(a, b, a.value + b.value, 1.0, 1.0); }
inline Var operator-(const Var &a, const Var &b) { return detail::binary(a, b, a.value - b.value, 1.0, -1.0); }
inline Var operator-(const Var &a) { return detail::unary(a, -a.value, -1.0); }
inline Var operator*(const Var &a, const Var &b) {
    return detail::binary(a, b, a.value * b.value, b.value, a.value);
}
inline Var operator/(const Var &a, const Var &b) {
    double q = a.value / b.value;
    return detail::binary(a, b, q, 1.0 / b.value, -q / b.value);
}

inline Var sin(const Var &x) { return detail::unary(x, std::sin(x.value), std::cos(x.value)); }
inline Var cos(const Var &x) { return detail::unary(x, std::cos(x.value), -std::sin(x.value)); }
inline Var exp(const Var &x) {
    double e = std::exp(x.value);
    return detail::unary(x, e, e);
}
inline Var log(const Var &x) { return detail::unary(x, std::log(x.value), 1.0 / x.value); }
inline Var sqrt(const Var &x) {
    double s = std::sqrt(x.value);
    return detail::unary(x, s, 0.5 / s);
}
inline Var asin(const Var &x) {
    return detail::unary(x, std::asin(x.value), 1.0 / std::sqrt(1.0 - x.value * x.value));
}
inline Var atan2(const Var &y, const Var &x) {
    double den = x.value * x.value + y.value * y.value;
    return detail::binary(y, x, std::atan2(y.value, x.value), x.value / den, -y.value / den);
}

}  // namespace pel
