#pragma once

// Independent oracles and random generators shared by the unit tests. They use
// std::complex throughout so they do not share code with the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "pel/complex.hpp"
#include "pel/model.hpp"

namespace testing {

using cplx = std::complex<double>;
using StdMatrix = std::vector<std::vector<cplx>>;

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    double gauss() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
    std::uint64_t bits() { return gen_(); }

    pel::ComplexValue complex(double scale = 1.0) { return {scale * uniform(-1, 1), scale * uniform(-1, 1)}; }

    pel::ComplexVector vector(std::size_t n, double scale = 1.0) {
        pel::ComplexVector v;
        for (std::size_t i = 0; i < n; ++i) {
            v.push_back(complex(scale));
        }
        return v;
    }

    std::vector<double> reals(std::size_t n, double lo, double hi) {
        std::vector<double> v;
        for (std::size_t i = 0; i < n; ++i) {
            v.push_back(uniform(lo, hi));
        }
        return v;
    }

  private:
    std::mt19937_64 gen_;
};

inline cplx to_std(const pel::ComplexValue &z) { return {z.re, z.im}; }

inline pel::ComplexMatrix from_std(const StdMatrix &m) {
    pel::ComplexMatrix out(m.size(), m.size());
    for (std::size_t r = 0; r < m.size(); ++r) {
        for (std::size_t c = 0; c < m.size(); ++c) {
            out(r, c) = {m[r][c].real(), m[r][c].imag()};
        }
    }
    return out;
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix by modified
/// Gram-Schmidt, with R's diagonal made positive (Mezzadri's recipe).
inline StdMatrix haar_unitary(std::size_t n, Rng &rng) {
    std::vector<std::vector<cplx>> cols(n, std::vector<cplx>(n));
    for (auto &col : cols) {
        for (auto &z : col) {
            z = cplx(rng.gauss(), rng.gauss()) / std::sqrt(2.0);
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            cplx dot = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                dot += std::conj(cols[i][r]) * cols[j][r];
            }
            for (std::size_t r = 0; r < n; ++r) {
                cols[j][r] -= dot * cols[i][r];
            }
        }
        double len = 0.0;
        for (const auto &z : cols[j]) {
            len += std::norm(z);
        }
        len = std::sqrt(len);
        for (auto &z : cols[j]) {
            z /= len;
        }
    }
    StdMatrix u(n, std::vector<cplx>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            u[r][c] = cols[c][r];
        }
    }
    return u;
}

inline double rel_err(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-12});
    return std::abs(a - b) / scale;
}

/// Textbook Eqs. (1)-(2) for a stack of free-matrix layers: y <- sigma(W y + b),
/// read straight from the packed parameter vector.
inline std::vector<cplx> naive_forward(const pel::PNNModel &model, const std::vector<cplx> &input) {
    auto p = model.params();
    std::vector<cplx> y = input;
    for (const auto &layer : model.layers()) {
        const auto &s = layer.spec;
        std::vector<cplx> z(s.n_out);
        for (std::size_t r = 0; r < s.n_out; ++r) {
            cplx acc = 0.0;
            for (std::size_t c = 0; c < s.n_in; ++c) {
                std::size_t idx = layer.offset + 2 * (r * s.n_in + c);
                acc += cplx(p[idx], p[idx + 1]) * y[c];
            }
            acc += cplx(p[layer.bias_offset() + 2 * r], p[layer.bias_offset() + 2 * r + 1]);
            if (s.activation == pel::ActivationKind::modrelu) {
                double b = p[layer.activation_offset()];
                double mag = std::abs(acc);
                acc = (mag > 0.0 && mag + b > 0.0) ? (mag + b) * acc / mag : cplx(0.0);
            }
            z[r] = acc;
        }
        y = std::move(z);
    }
    return y;
}

/// Square network of `depth` layers on `ports` ports with random parameters.
inline pel::PNNModel random_network(pel::LayerKind kind, std::size_t ports, std::size_t depth,
                                    pel::ActivationKind hidden, std::uint64_t seed, double bias_scale = 0.3) {
    std::vector<pel::LayerSpec> layers;
    for (std::size_t l = 0; l < depth; ++l) {
        layers.push_back({kind, ports, ports, l + 1 == depth ? pel::ActivationKind::identity : hidden});
    }
    pel::ModelInit init;
    init.seed = seed;
    init.svd_gain = 0.8;
    auto model = pel::PNNModel::random(layers, pel::Detection::field, init);
    Rng rng(seed ^ 0xabcdefULL);
    for (const auto &layer : model.layers()) {
        for (std::size_t i = 0; i < 2 * layer.spec.n_out; ++i) {
            model.params()[layer.bias_offset() + i] = bias_scale * rng.uniform(-1, 1);
        }
        if (layer.spec.kind == pel::LayerKind::svd_mesh) {
            for (std::size_t k = 0; k < layer.gain_count(); ++k) {
                model.params()[layer.offset + layer.gain_offset() + k] = rng.uniform(0.2, 1.0);
            }
        }
    }
    return model;
}

}  // namespace testing
