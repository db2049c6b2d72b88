#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "pel/autodiff.hpp"
#include "pel/complex.hpp"
#include "support.hpp"

using namespace pel;
using testing::Rng;

namespace {

constexpr double pi = std::numbers::pi;

void check_close(const ComplexValue &a, const ComplexValue &b, double tol) {
    CHECK(std::abs(a.re - b.re) <= tol);
    CHECK(std::abs(a.im - b.im) <= tol);
}

}  // namespace

TEST_CASE("complex primitives: spec examples") {
    ComplexValue i{0.0, 1.0};
    ComplexValue sq = i * i;
    CHECK(sq.re == -1.0);
    CHECK(sq.im == 0.0);
    check_close(exp(ComplexValue{0.0, pi / 2}), {0.0, 1.0}, 1e-12);
    CHECK(modulus(ComplexValue{3.0, 4.0}) == 5.0);
    CHECK(modulus_sq(ComplexValue{3.0, 4.0}) == 25.0);
    check_close(conj(ComplexValue{1.0, 2.0}), {1.0, -2.0}, 0.0);
    CHECK(phase(ComplexValue{0.0, 2.0}) == doctest::Approx(pi / 2));
    CHECK(sqrt_real(9.0) == 3.0);
    CHECK(atan2_real(1.0, 1.0) == doctest::Approx(pi / 4));
    CHECK(sin_real(pi / 2) == doctest::Approx(1.0));
    check_close(ComplexValue{1.0, 2.0} / ComplexValue{0.0, 1.0}, {2.0, -1.0}, 1e-15);
}

TEST_CASE("complex primitives: domain errors") {
    CHECK_THROWS_AS(ComplexValue(1.0, 0.0) / ComplexValue(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(sqrt_real(-1.0), DomainError);
}

TEST_CASE("complex arithmetic: field axioms on order-1 operands") {
    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        auto a = rng.complex();
        auto b = rng.complex();
        auto c = rng.complex();
        auto left = (a * b) * c;
        auto right = a * (b * c);
        double scale = std::max(modulus(left), 1e-300);
        CHECK(modulus(left - right) / scale < 1e-12);
        auto d = a * (b + c) - (a * b + a * c);
        CHECK(modulus(d) < 1e-14);
        CHECK(testing::rel_err(modulus_sq(a), modulus(a) * modulus(a)) < 1e-12);
        if (modulus(b) > 1e-3) {
            CHECK(modulus((a / b) * b - a) < 1e-12);
        }
    }
}

TEST_CASE("forward_jvp: spec examples") {
    auto f = [](std::span<const Dual> x) {
        using std::cos;
        using std::sin;
        return BasicComplexVector<Dual>{BasicComplex<Dual>(x[0] * cos(x[0]), x[0] * sin(x[0]))};
    };
    std::vector<double> x0{0.0};
    auto r = forward_jvp(f, x0, 0);
    check_close(r.values[0], {0.0, 0.0}, 0.0);
    check_close(r.derivs[0], {1.0, 0.0}, 0.0);

    auto g = [](std::span<const Dual> x) { return BasicComplexVector<Dual>{BasicComplex<Dual>(x[0], x[1])}; };
    std::vector<double> x1{0.3, 0.7};
    auto r2 = forward_jvp(g, x1, 1);
    check_close(r2.derivs[0], {0.0, 1.0}, 0.0);
    CHECK_THROWS_AS(forward_jvp(g, x1, 2), UsageError);
}

TEST_CASE("reverse_grad: spec examples") {
    auto loss = [](std::span<const Var> w) { return modulus_sq(BasicComplex<Var>(w[0], w[1])); };
    std::vector<double> w{3.0, 4.0};
    auto g = reverse_grad(loss, w);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == 6.0);
    CHECK(g[1] == 8.0);

    auto constant = [](std::span<const Var>) { return Var(2.5); };
    auto z = reverse_grad(constant, w);
    CHECK(z == std::vector<double>{0.0, 0.0});
}

TEST_CASE("reverse_grad: non-finite value reports the node") {
    auto loss = [](std::span<const Var> w) { return log(w[0]) + w[1]; };
    std::vector<double> w{-1.0, 0.0};
    try {
        reverse_grad(loss, w);
        FAIL("expected a numeric error");
    } catch (const NumericError &e) {
        CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
}

TEST_CASE("finite_diff: spec examples") {
    std::vector<double> one{1.0};
    auto sq = finite_diff([](const std::vector<double> &x) { return x[0] * x[0]; }, one, 1e-5);
    CHECK(std::abs(sq(0, 0) - 2.0) < 1e-9);
    std::vector<double> zero{0.0};
    auto s = finite_diff([](const std::vector<double> &x) { return std::sin(x[0]); }, zero, 1e-5);
    CHECK(std::abs(s(0, 0) - 1.0) < 1e-9);
    CHECK_THROWS_AS(finite_diff([](const std::vector<double> &x) { return x[0]; }, one, 0.0), DomainError);
}

TEST_CASE("dual and tape primitives match finite differences") {
    using Fn = std::function<double(double)>;
    struct Case {
        const char *name;
        Fn plain;
        std::function<Dual(Dual)> dual;
        std::function<Var(Var)> var;
        double lo;
        double hi;
    };
    const Case cases[] = {
        {"sin", [](double x) { return std::sin(x); }, [](Dual x) { return sin(x); }, [](Var x) { return sin(x); }, -2, 2},
        {"cos", [](double x) { return std::cos(x); }, [](Dual x) { return cos(x); }, [](Var x) { return cos(x); }, -2, 2},
        {"exp", [](double x) { return std::exp(x); }, [](Dual x) { return exp(x); }, [](Var x) { return exp(x); }, -2, 2},
        {"log", [](double x) { return std::log(x); }, [](Dual x) { return log(x); }, [](Var x) { return log(x); }, 0.2, 2},
        {"sqrt", [](double x) { return std::sqrt(x); }, [](Dual x) { return sqrt(x); }, [](Var x) { return sqrt(x); }, 0.2, 2},
        {"asin", [](double x) { return std::asin(x); }, [](Dual x) { return asin(x); }, [](Var x) { return asin(x); }, -0.9, 0.9},
        {"mul", [](double x) { return x * (x + 1.5); }, [](Dual x) { return x * (x + Dual{1.5}); },
         [](Var x) { return x * (x + Var(1.5)); }, -2, 2},
        {"div", [](double x) { return 1.0 / (x + 3.0); }, [](Dual x) { return Dual{1.0} / (x + Dual{3.0}); },
         [](Var x) { return Var(1.0) / (x + Var(3.0)); }, -2, 2},
        {"atan2", [](double x) { return std::atan2(x, 0.7); }, [](Dual x) { return atan2(x, Dual{0.7}); },
         [](Var x) { return atan2(x, Var(0.7)); }, -2, 2},
    };
    Rng rng(2);
    for (const auto &c : cases) {
        INFO(c.name);
        for (int t = 0; t < 1000; ++t) {
            double x = rng.uniform(c.lo, c.hi);
            double h = 1e-6;
            double fd = (c.plain(x + h) - c.plain(x - h)) / (2 * h);
            double fwd = c.dual(Dual{x, 1.0}).deriv;
            std::vector<double> p{x};
            double rev = reverse_grad([&](std::span<const Var> v) { return c.var(v[0]); }, p)[0];
            CHECK(std::abs(fwd - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
            CHECK(std::abs(rev - fwd) <= 1e-12 * std::max(1.0, std::abs(fwd)));
        }
    }
}

TEST_CASE("complex primitives: derivatives through real pairs") {
    // f(a, b) = |exp(z) * conj(z) / (z + 2)|^2 + phase(z), z = a + ib.
    auto program = [](auto a, auto b) {
        using T = decltype(a);
        BasicComplex<T> z(a, b);
        auto w = exp(z) * conj(z) / (z + BasicComplex<T>(T(2.0), T(0.0)));
        return modulus_sq(w) + phase(z) + modulus(z);
    };
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        auto fd = finite_diff([&](const std::vector<double> &p) { return program(p[0], p[1]); }, x, 1e-6);
        auto rev = reverse_grad([&](std::span<const Var> v) { return program(v[0], v[1]); }, x);
        for (std::size_t j = 0; j < 2; ++j) {
            Dual a{x[0], j == 0 ? 1.0 : 0.0};
            Dual b{x[1], j == 1 ? 1.0 : 0.0};
            double fwd = program(a, b).deriv;
            CHECK(testing::rel_err(fwd, fd(0, j)) < 1e-6);
            CHECK(std::abs(rev[j] - fwd) <= 1e-10 * std::max(1.0, std::abs(fwd)));
        }
    }
}

TEST_CASE("tape: leaf adjoints and topological order") {
    GradTape tape;
    Var a = tape.variable(2.0);
    Var b = tape.variable(-3.0);
    Var c = a * b + sin(a);
    for (std::size_t i = 0; i < tape.size(); ++i) {
        const auto &n = tape.nodes()[i];
        CHECK(n.a < static_cast<std::int32_t>(i));
        CHECK(n.b < static_cast<std::int32_t>(i));
    }
    auto g = tape.gradient(c, std::vector<Var>{a, b});
    CHECK(g[0] == doctest::Approx(-3.0 + std::cos(2.0)));
    CHECK(g[1] == doctest::Approx(2.0));
}
