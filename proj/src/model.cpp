#include "pel/model.hpp"

#include <algorithm>
#include <numbers>
#include <random>

namespace pel {

std::string to_string(LayerKind kind) {
    switch (kind) {
    case LayerKind::free_matrix:
        return "free_matrix";
    case LayerKind::unitary_mesh:
        return "unitary_mesh";
    case LayerKind::svd_mesh:
        return "svd_mesh";
    }
    return "unknown";
}

std::string to_string(ActivationKind kind) {
    return kind == ActivationKind::modrelu ? "modrelu" : "identity";
}

std::string to_string(Detection mode) { return mode == Detection::field ? "field" : "intensity"; }

LayerKind parse_layer_kind(const std::string &name) {
    if (name == "free_matrix") {
        return LayerKind::free_matrix;
    }
    if (name == "unitary_mesh") {
        return LayerKind::unitary_mesh;
    }
    if (name == "svd_mesh") {
        return LayerKind::svd_mesh;
    }
    throw ParseError("unknown layer kind '" + name + "'");
}

ActivationKind parse_activation(const std::string &name) {
    if (name == "modrelu") {
        return ActivationKind::modrelu;
    }
    if (name == "identity") {
        return ActivationKind::identity;
    }
    throw ParseError("unknown activation '" + name + "'");
}

Detection parse_detection(const std::string &name) {
    if (name == "intensity") {
        return Detection::intensity;
    }
    if (name == "field") {
        return Detection::field;
    }
    throw ParseError("unknown detection mode '" + name + "'");
}

std::size_t PNNLayer::weight_count() const {
    auto mesh_len = [](std::size_t n) { return 2 * clements_mzi_count(n) + n; };
    switch (spec.kind) {
    case LayerKind::free_matrix:
        return 2 * spec.n_out * spec.n_in;
    case LayerKind::unitary_mesh:
        return mesh_len(spec.n_out);
    case LayerKind::svd_mesh:
        return mesh_len(spec.n_out) + gain_count() + mesh_len(spec.n_in);
    }
    return 0;
}

std::size_t PNNLayer::gain_count() const {
    return spec.kind == LayerKind::svd_mesh ? std::min(spec.n_in, spec.n_out) : 0;
}

std::size_t PNNLayer::gain_offset() const {
    return 2 * clements_mzi_count(spec.n_out) + spec.n_out;
}

PNNModel::PNNModel(std::vector<LayerSpec> layers, Detection detection) : detection_(detection) {
    if (layers.empty()) {
        throw ShapeError("a model needs at least one layer");
    }
    std::size_t offset = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto &spec = layers[l];
        if (spec.n_in == 0 || spec.n_out == 0) {
            throw ShapeError("layer " + std::to_string(l) + " has a zero dimension");
        }
        if (spec.kind == LayerKind::unitary_mesh && spec.n_in != spec.n_out) {
            throw ShapeError("unitary mesh layer " + std::to_string(l) + " must be square");
        }
        if (l > 0 && layers[l - 1].n_out != spec.n_in) {
            throw ShapeError("layer " + std::to_string(l) + " expects " + std::to_string(spec.n_in) +
                             " inputs but the previous layer produces " + std::to_string(layers[l - 1].n_out));
        }
        PNNLayer layer{spec, offset};
        offset += layer.param_count();
        layers_.push_back(layer);
    }
    params_.assign(offset, 0.0);
}

PNNModel PNNModel::random(std::vector<LayerSpec> layers, Detection detection, const ModelInit &init) {
    PNNModel model(std::move(layers), detection);
    std::mt19937_64 rng(init.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t l = 0; l < model.layers_.size(); ++l) {
        const auto &layer = model.layers_[l];
        auto p = model.layer_params(l);
        std::size_t wc = layer.weight_count();
        if (layer.spec.kind == LayerKind::free_matrix) {
            double sd = 1.0 / std::sqrt(2.0 * static_cast<double>(layer.spec.n_in));
            for (std::size_t i = 0; i < wc; ++i) {
                p[i] = sd * gauss(rng);
            }
        } else {
            for (std::size_t i = 0; i < wc; ++i) {
                p[i] = phase(rng);
            }
            if (layer.spec.kind == LayerKind::svd_mesh) {
                for (std::size_t k = 0; k < layer.gain_count(); ++k) {
                    p[layer.gain_offset() + k] = init.svd_gain;
                }
            }
        }
        if (layer.spec.activation == ActivationKind::modrelu) {
            p[p.size() - 1] = init.activation_bias;
        }
    }
    model.project();
    return model;
}

std::span<const double> PNNModel::layer_params(std::size_t l) const {
    const auto &layer = layers_.at(l);
    return std::span<const double>(params_).subspan(layer.offset, layer.param_count());
}

std::span<double> PNNModel::layer_params(std::size_t l) {
    const auto &layer = layers_.at(l);
    return std::span<double>(params_).subspan(layer.offset, layer.param_count());
}

void PNNModel::project() {
    for (const auto &layer : layers_) {
        std::size_t start = layer.offset + layer.gain_offset();
        for (std::size_t k = 0; k < layer.gain_count(); ++k) {
            params_[start + k] = std::clamp(params_[start + k], 0.0, svd_gain_max);
        }
    }
}

bool PNNModel::is_holomorphic() const {
    return std::all_of(layers_.begin(), layers_.end(),
                       [](const PNNLayer &l) { return l.spec.activation == ActivationKind::identity; });
}

RealizedModel<double> realize(const PNNModel &model) { return realize<double>(model, model.params()); }

DetectedOutput detect(const ComplexVector &y, Detection mode) {
    DetectedOutput out;
    out.mode = mode;
    if (mode == Detection::intensity) {
        out.intensity = detect_intensity(y);
    } else {
        out.field = y;
    }
    return out;
}

ComplexVector model_field(const PNNModel &model, const ComplexVector &input, EvalFlags *flags) {
    if (input.size() != model.n_inputs()) {
        throw ShapeError("model expects " + std::to_string(model.n_inputs()) + " inputs, got " +
                         std::to_string(input.size()));
    }
    return forward_field(realize(model), input, flags);
}

DetectedOutput model_forward(const PNNModel &model, const ComplexVector &input, EvalFlags *flags) {
    return detect(model_field(model, input, flags), model.detection());
}

}  // namespace pel
