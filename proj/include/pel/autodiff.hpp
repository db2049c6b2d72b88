#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "pel/complex.hpp"
#include "pel/dual.hpp"
#include "pel/errors.hpp"
#include "pel/tape.hpp"

namespace pel {

/// Markers raised while evaluating a program at a point where it is not smooth.
struct EvalFlags {
    bool nonsmooth = false;  // activation evaluated at a kink; zero subgradient used
    bool singular = false;   // encoding evaluated where its derivative does not exist

    bool any() const { return nonsmooth || singular; }
    void merge(const EvalFlags &o) {
        nonsmooth = nonsmooth || o.nonsmooth;
        singular = singular || o.singular;
    }
};

struct JvpResult {
    ComplexVector values;
    /// derivs[c] = (d re y_c / d x_j, d im y_c / d x_j).
    ComplexVector derivs;
    EvalFlags flags;
};

namespace detail {

template <class F, class Arg>
auto call_program(F &&program, Arg args, EvalFlags &flags) {
    if constexpr (std::is_invocable_v<F, Arg, EvalFlags &>) {
        return program(args, flags);
    } else {
        return program(args);
    }
}

}  // namespace detail

/// Forward-mode directional derivative of a real -> complex-vector program
/// along coordinate `seed_index`. The program is called with a span of Dual and
/// may optionally take an EvalFlags& second argument.
template <class F>
JvpResult forward_jvp(F &&program, std::span<const double> x, std::size_t seed_index) {
    if (seed_index >= x.size()) {
        throw UsageError("seed index " + std::to_string(seed_index) + " out of range for " +
                         std::to_string(x.size()) + " inputs");
    }
    std::vector<Dual> args(x.begin(), x.end());
    args[seed_index].deriv = 1.0;
    JvpResult result;
    BasicComplexVector<Dual> out =
        detail::call_program(program, std::span<const Dual>(args), result.flags);
    result.values.reserve(out.size());
    result.derivs.reserve(out.size());
    for (const auto &z : out) {
        result.values.push_back({z.re.value, z.im.value});
        result.derivs.push_back({z.re.deriv, z.im.deriv});
    }
    return result;
}

struct ValueAndGradient {
    double value = 0.0;
    std::vector<double> gradient;
};

/// Value and gradient of a real scalar program with respect to every
/// parameter. The program receives a span of tape variables and returns a Var.
/// `workspace`, when given, is cleared and reused instead of a fresh tape.
template <class F>
ValueAndGradient reverse_value_and_grad(F &&loss, std::span<const double> params, GradTape *workspace = nullptr) {
    GradTape local;
    GradTape &tape = workspace != nullptr ? *workspace : local;
    tape.clear();
    std::vector<Var> leaves;
    leaves.reserve(params.size());
    for (double p : params) {
        leaves.push_back(tape.variable(p));
    }
    Var out = loss(std::span<const Var>(leaves));
    if (tape.first_nonfinite() >= 0) {
        throw NumericError("non-finite value at tape node " + std::to_string(tape.first_nonfinite()));
    }
    if (!std::isfinite(out.value)) {
        throw NumericError("non-finite loss value");
    }
    return {out.value, tape.gradient(out, leaves)};
}

/// Gradient of a real scalar program; see reverse_value_and_grad.
template <class F>
std::vector<double> reverse_grad(F &&loss, std::span<const double> params) {
    return reverse_value_and_grad(std::forward<F>(loss), params).gradient;
}

/// Central-difference Jacobian, row-major with one row per output.
struct Jacobian {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// (f(x + h e_j) - f(x - h e_j)) / 2h for every coordinate j. The program maps
/// a vector<double> to a vector<double> or to a double.
template <class F>
Jacobian finite_diff(F &&program, std::span<const double> x, double h) {
    if (!(h > 0.0)) {
        throw DomainError("finite-difference step must be positive");
    }
    auto eval = [&](const std::vector<double> &pt) -> std::vector<double> {
        auto y = program(pt);
        if constexpr (std::is_arithmetic_v<decltype(y)>) {
            return {static_cast<double>(y)};
        } else {
            return std::vector<double>(y.begin(), y.end());
        }
    };
    std::vector<double> point(x.begin(), x.end());
    Jacobian jac;
    jac.cols = x.size();
    std::vector<std::vector<double>> columns;
    columns.reserve(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        point[j] = x[j] + h;
        auto plus = eval(point);
        point[j] = x[j] - h;
        auto minus = eval(point);
        point[j] = x[j];
        std::vector<double> col(plus.size());
        for (std::size_t r = 0; r < plus.size(); ++r) {
            col[r] = (plus[r] - minus[r]) / (2.0 * h);
        }
        columns.push_back(std::move(col));
    }
    jac.rows = columns.empty() ? 0 : columns.front().size();
    jac.data.assign(jac.rows * jac.cols, 0.0);
    for (std::size_t j = 0; j < jac.cols; ++j) {
        for (std::size_t r = 0; r < jac.rows; ++r) {
            jac.data[r * jac.cols + j] = columns[j][r];
        }
    }
    return jac;
}

/// Flattens a complex vector to (re0, im0, re1, im1, ...), the layout used when
/// finite-differencing complex-valued programs.
inline std::vector<double> flatten(const ComplexVector &v) {
    std::vector<double> out;
    out.reserve(2 * v.size());
    for (const auto &z : v) {
        out.push_back(z.re);
        out.push_back(z.im);
    }
    return out;
}

}  // namespace pel
