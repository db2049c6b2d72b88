#pragma once

// Layered photonic network model.
//
// Each layer computes z = W y + b followed by an elementwise activation, and
// the last layer's field is optionally converted to intensities at detection.
// All trainable values live in one flat parameter vector owned by the model;
// every layer records its offset into that vector. The evaluation functions are
// templates over the scalar type so the same code path serves plain doubles,
// forward-mode duals and reverse-mode tape variables.
//
// The bias b is an added coherent field. On hardware it needs an extra
// phase-locked source per port; the simulation treats it as free.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pel/autodiff.hpp"
#include "pel/complex.hpp"
#include "pel/mesh.hpp"

namespace pel {

enum class LayerKind { free_matrix, unitary_mesh, svd_mesh };
enum class ActivationKind { identity, modrelu };
enum class Detection { intensity, field };

std::string to_string(LayerKind kind);
std::string to_string(ActivationKind kind);
std::string to_string(Detection mode);
LayerKind parse_layer_kind(const std::string &name);
ActivationKind parse_activation(const std::string &name);
Detection parse_detection(const std::string &name);

/// Upper bound of the svd-mesh singular values (passive attenuation only).
inline constexpr double svd_gain_max = 1.0;

/// modReLU: (|z| + b) z / |z| when |z| + b > 0, else 0, with z/|z| := 0 at
/// z = 0. The kink |z| + b = 0 and the discontinuity at z = 0 for b > 0 use the
/// zero subgradient and raise the nonsmooth flag.
template <class T>
BasicComplex<T> modrelu(const BasicComplex<T> &z, const T &b, EvalFlags *flags = nullptr) {
    ComplexValue zv = value_of(z);
    double mag = std::sqrt(modulus_sq(zv));
    double shifted = mag + value_of(b);
    if (mag == 0.0 || !(shifted > 0.0)) {
        if (flags != nullptr && (shifted == 0.0 || (mag == 0.0 && value_of(b) > 0.0))) {
            flags->nonsmooth = true;
        }
        return BasicComplex<T>(T(0.0), T(0.0));
    }
    T m = modulus(z);
    T scale = (m + b) / m;
    return z * scale;
}

/// Packed parameter layout of one layer, offsets relative to the layer start.
///
///   free_matrix:  weights (2 * n_out * n_in, row-major re/im)
///   unitary_mesh: mesh (2K + n phases)
///   svd_mesh:     U mesh on n_out ports, gains s (min(n_out, n_in)), V^dagger mesh on n_in ports
///   all kinds:    bias (2 * n_out), then the modReLU bias when the activation is modrelu
struct LayerSpec {
    LayerKind kind = LayerKind::svd_mesh;
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    ActivationKind activation = ActivationKind::identity;
};

struct PNNLayer {
    LayerSpec spec;
    std::size_t offset = 0;  // start of this layer in the model's parameter vector

    std::size_t weight_count() const;
    std::size_t bias_offset() const { return offset + weight_count(); }
    std::size_t activation_offset() const { return bias_offset() + 2 * spec.n_out; }
    std::size_t param_count() const {
        return weight_count() + 2 * spec.n_out + (spec.activation == ActivationKind::modrelu ? 1 : 0);
    }
    std::size_t gain_count() const;
    /// Offset of the svd gains within the layer's weights block.
    std::size_t gain_offset() const;
};

struct ModelInit {
    std::uint64_t seed = 0;
    double activation_bias = 0.1;
    double svd_gain = 1.0;
};

class PNNModel {
  public:
    PNNModel() = default;
    PNNModel(std::vector<LayerSpec> layers, Detection detection);

    /// Randomly initialized model: mesh phases uniform in [0, 2pi), free
    /// matrix entries complex Gaussian with E|w|^2 = 1/n_in, zero bias.
    static PNNModel random(std::vector<LayerSpec> layers, Detection detection, const ModelInit &init);

    std::size_t n_inputs() const { return layers_.empty() ? 0 : layers_.front().spec.n_in; }
    std::size_t n_outputs() const { return layers_.empty() ? 0 : layers_.back().spec.n_out; }
    std::size_t depth() const { return layers_.size(); }
    Detection detection() const { return detection_; }
    void set_detection(Detection mode) { detection_ = mode; }

    const std::vector<PNNLayer> &layers() const { return layers_; }
    std::span<const double> params() const { return params_; }
    std::span<double> params() { return params_; }
    std::span<const double> layer_params(std::size_t l) const;
    std::span<double> layer_params(std::size_t l);

    /// Clamps svd gains into [0, svd_gain_max].
    void project();

    /// True when every layer is complex-linear (identity activation), so the
    /// field map is holomorphic in each input.
    bool is_holomorphic() const;

  private:
    std::vector<PNNLayer> layers_;
    Detection detection_ = Detection::intensity;
    std::vector<double> params_;
};

/// Layer weights, bias and activation realized for one scalar type.
template <class T>
struct RealizedLayer {
    BasicComplexMatrix<T> weights;
    BasicComplexVector<T> bias;
    ActivationKind activation = ActivationKind::identity;
    T activation_bias = T(0.0);
};

template <class T>
using RealizedModel = std::vector<RealizedLayer<T>>;

template <class T>
BasicComplexMatrix<T> layer_matrix(const LayerSpec &spec, std::span<const T> w) {
    auto mesh = [](std::size_t n, std::span<const T> block) {
        auto layout = MeshLayout::clements(n);
        std::size_t k = 2 * layout.mzi_count();
        return mesh_matrix<T>(n, layout.placements, block.subspan(0, k), block.subspan(k, n));
    };
    switch (spec.kind) {
    case LayerKind::free_matrix: {
        BasicComplexMatrix<T> m(spec.n_out, spec.n_in);
        for (std::size_t r = 0; r < spec.n_out; ++r) {
            for (std::size_t c = 0; c < spec.n_in; ++c) {
                std::size_t idx = 2 * (r * spec.n_in + c);
                m(r, c) = BasicComplex<T>(w[idx], w[idx + 1]);
            }
        }
        return m;
    }
    case LayerKind::unitary_mesh:
        return mesh(spec.n_out, w);
    case LayerKind::svd_mesh: {
        std::size_t u_len = 2 * clements_mzi_count(spec.n_out) + spec.n_out;
        std::size_t s_len = std::min(spec.n_out, spec.n_in);
        auto u = mesh(spec.n_out, w.subspan(0, u_len));
        auto vh = mesh(spec.n_in, w.subspan(u_len + s_len));
        // U diag(s) V^dagger: scale the first s_len rows of V^dagger, then multiply
        // by the first s_len columns of U.
        BasicComplexMatrix<T> out(spec.n_out, spec.n_in);
        for (std::size_t r = 0; r < spec.n_out; ++r) {
            for (std::size_t c = 0; c < spec.n_in; ++c) {
                BasicComplex<T> acc(T(0.0), T(0.0));
                for (std::size_t k = 0; k < s_len; ++k) {
                    acc += u(r, k) * (vh(k, c) * w[u_len + k]);
                }
                out(r, c) = acc;
            }
        }
        return out;
    }
    }
    throw std::logic_error("unknown layer kind");
}

template <class T>
RealizedModel<T> realize(const PNNModel &model, std::span<const T> params) {
    if (params.size() != model.params().size()) {
        throw ShapeError("parameter vector has " + std::to_string(params.size()) + " entries, model needs " +
                         std::to_string(model.params().size()));
    }
    RealizedModel<T> out;
    out.reserve(model.depth());
    for (const auto &layer : model.layers()) {
        RealizedLayer<T> r;
        r.weights = layer_matrix<T>(layer.spec, params.subspan(layer.offset, layer.weight_count()));
        r.bias.reserve(layer.spec.n_out);
        for (std::size_t i = 0; i < layer.spec.n_out; ++i) {
            std::size_t idx = layer.bias_offset() + 2 * i;
            r.bias.emplace_back(params[idx], params[idx + 1]);
        }
        r.activation = layer.spec.activation;
        if (r.activation == ActivationKind::modrelu) {
            r.activation_bias = params[layer.activation_offset()];
        }
        out.push_back(std::move(r));
    }
    return out;
}

RealizedModel<double> realize(const PNNModel &model);

/// Pre-detection field y^(L) for input y^(0).
template <class T>
BasicComplexVector<T> forward_field(const RealizedModel<T> &layers, const BasicComplexVector<T> &input,
                                    EvalFlags *flags = nullptr) {
    BasicComplexVector<T> y = input;
    for (const auto &layer : layers) {
        if (y.size() != layer.weights.cols()) {
            throw ShapeError("layer expects " + std::to_string(layer.weights.cols()) + " inputs, got " +
                             std::to_string(y.size()));
        }
        BasicComplexVector<T> z = layer.weights * y;
        for (std::size_t i = 0; i < z.size(); ++i) {
            z[i] += layer.bias[i];
            if (layer.activation == ActivationKind::modrelu) {
                z[i] = modrelu(z[i], layer.activation_bias, flags);
            }
        }
        y = std::move(z);
    }
    return y;
}

template <class T>
std::vector<T> detect_intensity(const BasicComplexVector<T> &y) {
    std::vector<T> out;
    out.reserve(y.size());
    for (const auto &z : y) {
        out.push_back(modulus_sq(z));
    }
    return out;
}

struct DetectedOutput {
    Detection mode = Detection::intensity;
    std::vector<double> intensity;  // filled in intensity mode
    ComplexVector field;            // filled in field mode
};

DetectedOutput detect(const ComplexVector &y, Detection mode);

/// Layers in sequence, then detection per the model's mode.
DetectedOutput model_forward(const PNNModel &model, const ComplexVector &input, EvalFlags *flags = nullptr);

/// Pre-detection field of the model.
ComplexVector model_field(const PNNModel &model, const ComplexVector &input, EvalFlags *flags = nullptr);

}  // namespace pel
