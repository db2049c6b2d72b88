#pragma once

// Complex numerics over pairs of real scalars.
//
// The scalar type T is double for plain evaluation, Dual for forward-mode
// sensitivities and Var for reverse-mode training gradients. Every complex
// primitive is written in terms of real scalar operations, so the derivative
// rules of the scalar types cover the complex ones without any holomorphic
// assumption.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <type_traits>
#include <vector>

#include "pel/errors.hpp"

namespace pel {

inline double value_of(double x) { return x; }

template <class T>
struct BasicComplex {
    T re{};
    T im{};

    constexpr BasicComplex() = default;
    constexpr BasicComplex(T r, T i) : re(std::move(r)), im(std::move(i)) {}
    // Real embedding; implicit so that scalar constants mix freely.
    constexpr BasicComplex(T r) : re(std::move(r)), im(T(0.0)) {}

    // Lift a plain complex value into another scalar type as a constant.
    template <class U>
        requires(!std::is_same_v<U, T> && std::is_constructible_v<T, U>)
    explicit constexpr BasicComplex(const BasicComplex<U> &other) : re(T(other.re)), im(T(other.im)) {}

    BasicComplex &operator+=(const BasicComplex &o) {
        re = re + o.re;
        im = im + o.im;
        return *this;
    }
};

using ComplexValue = BasicComplex<double>;

template <class T>
using BasicComplexVector = std::vector<BasicComplex<T>>;
using ComplexVector = BasicComplexVector<double>;

inline constexpr ComplexValue imag_unit{0.0, 1.0};

template <class T>
BasicComplex<T> operator+(const BasicComplex<T> &a, const BasicComplex<T> &b) {
    return {a.re + b.re, a.im + b.im};
}

template <class T>
BasicComplex<T> operator-(const BasicComplex<T> &a, const BasicComplex<T> &b) {
    return {a.re - b.re, a.im - b.im};
}

template <class T>
BasicComplex<T> operator-(const BasicComplex<T> &a) {
    return {-a.re, -a.im};
}

template <class T>
BasicComplex<T> operator*(const BasicComplex<T> &a, const BasicComplex<T> &b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

template <class T>
BasicComplex<T> operator*(const BasicComplex<T> &a, const std::type_identity_t<T> &s) {
    return {a.re * s, a.im * s};
}

template <class T>
BasicComplex<T> operator*(const std::type_identity_t<T> &s, const BasicComplex<T> &a) {
    return {s * a.re, s * a.im};
}

template <class T>
BasicComplex<T> conj(const BasicComplex<T> &a) {
    return {a.re, -a.im};
}

template <class T>
T modulus_sq(const BasicComplex<T> &a) {
    return a.re * a.re + a.im * a.im;
}

/// |z|. At z = 0 the modulus is not differentiable; the zero subgradient is used.
template <class T>
T modulus(const BasicComplex<T> &a) {
    using std::sqrt;
    if (value_of(a.re) == 0.0 && value_of(a.im) == 0.0) {
        return T(0.0);
    }
    return sqrt(modulus_sq(a));
}

template <class T>
BasicComplex<T> operator/(const BasicComplex<T> &a, const BasicComplex<T> &b) {
    T den = modulus_sq(b);
    if (!(value_of(den) > 0.0)) {
        throw DomainError("complex division by a zero-modulus value");
    }
    BasicComplex<T> num = a * conj(b);
    return {num.re / den, num.im / den};
}

/// e^z = e^re (cos im + i sin im).
template <class T>
BasicComplex<T> exp(const BasicComplex<T> &z) {
    using std::cos;
    using std::exp;
    using std::sin;
    T m = exp(z.re);
    return {m * cos(z.im), m * sin(z.im)};
}

/// e^{i theta} for a real angle.
template <class T>
BasicComplex<T> unit_phasor(const T &theta) {
    using std::cos;
    using std::sin;
    return {cos(theta), sin(theta)};
}

/// Argument in (-pi, pi]; 0 for z = 0.
template <class T>
T phase(const BasicComplex<T> &z) {
    using std::atan2;
    return atan2(z.im, z.re);
}

template <class T>
T sin_real(const T &x) {
    using std::sin;
    return sin(x);
}

template <class T>
T sqrt_real(const T &x) {
    using std::sqrt;
    if (value_of(x) < 0.0) {
        throw DomainError("square root of a negative real");
    }
    return sqrt(x);
}

template <class T>
T atan2_real(const T &y, const T &x) {
    using std::atan2;
    return atan2(y, x);
}

inline ComplexValue value_of(const ComplexValue &z) { return z; }

template <class T>
ComplexValue value_of(const BasicComplex<T> &z) {
    return {value_of(z.re), value_of(z.im)};
}

template <class T>
ComplexVector values_of(const BasicComplexVector<T> &v) {
    ComplexVector out;
    out.reserve(v.size());
    for (const auto &z : v) {
        out.push_back(value_of(z));
    }
    return out;
}

template <class T>
T squared_norm(const BasicComplexVector<T> &v) {
    T acc(0.0);
    for (const auto &z : v) {
        acc = acc + modulus_sq(z);
    }
    return acc;
}

inline double norm(const ComplexVector &v) { return std::sqrt(squared_norm(v)); }

/// Dense row-major complex matrix.
template <class T>
class BasicComplexMatrix {
  public:
    BasicComplexMatrix() = default;
    BasicComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, BasicComplex<T>(T(0.0), T(0.0))) {}

    static BasicComplexMatrix identity(std::size_t n) {
        BasicComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = BasicComplex<T>(T(1.0), T(0.0));
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    BasicComplex<T> &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const BasicComplex<T> &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<BasicComplex<T>> &data() const { return data_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<BasicComplex<T>> data_;
};

using ComplexMatrix = BasicComplexMatrix<double>;

template <class T>
BasicComplexMatrix<T> operator*(const BasicComplexMatrix<T> &a, const BasicComplexMatrix<T> &b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matrix product with incompatible shapes");
    }
    BasicComplexMatrix<T> out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            BasicComplex<T> acc(T(0.0), T(0.0));
            for (std::size_t k = 0; k < a.cols(); ++k) {
                acc += a(i, k) * b(k, j);
            }
            out(i, j) = acc;
        }
    }
    return out;
}

template <class T>
BasicComplexVector<T> operator*(const BasicComplexMatrix<T> &a, const BasicComplexVector<T> &x) {
    if (a.cols() != x.size()) {
        throw ShapeError("matrix-vector product with incompatible shapes");
    }
    BasicComplexVector<T> out(a.rows(), BasicComplex<T>(T(0.0), T(0.0)));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        BasicComplex<T> acc = a(i, 0) * x[0];
        for (std::size_t k = 1; k < a.cols(); ++k) {
            acc += a(i, k) * x[k];
        }
        out[i] = acc;
    }
    return out;
}

template <class T>
BasicComplexMatrix<T> adjoint(const BasicComplexMatrix<T> &a) {
    BasicComplexMatrix<T> out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = conj(a(i, j));
        }
    }
    return out;
}

double frobenius_norm(const ComplexMatrix &a);
double frobenius_distance(const ComplexMatrix &a, const ComplexMatrix &b);
/// ||A^dagger A - I||_F, the unitarity defect.
double unitarity_defect(const ComplexMatrix &a);

}  // namespace pel
