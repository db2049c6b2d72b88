#include "pel/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pel {

std::string to_string(EncodingTag tag) {
    switch (tag) {
    case EncodingTag::independent:
        return "independent";
    case EncodingTag::linear:
        return "linear";
    case EncodingTag::exponential:
        return "exponential";
    case EncodingTag::hw_linear:
        return "hw_linear";
    case EncodingTag::hw_exponential:
        return "hw_exponential";
    case EncodingTag::engineered_radial:
        return "engineered_radial";
    }
    return "unknown";
}

EncodingTag parse_encoding_tag(const std::string &name) {
    for (auto tag : {EncodingTag::independent, EncodingTag::linear, EncodingTag::exponential,
                     EncodingTag::hw_linear, EncodingTag::hw_exponential, EncodingTag::engineered_radial}) {
        if (to_string(tag) == name) {
            return tag;
        }
    }
    throw ParseError("unknown encoding kind '" + name + "'");
}

bool EncodingKind::amplitude_bounded(int slot) const {
    switch (tag) {
    case EncodingTag::hw_linear:
        return true;
    case EncodingTag::hw_exponential:
        return slot == 0;
    default:
        return false;
    }
}

bool EncodingKind::is_phase_slot(int slot) const {
    return slot == 1 && (tag == EncodingTag::exponential || tag == EncodingTag::hw_exponential);
}

void FeaturePairing::validate(std::size_t n_features) const {
    std::vector<int> seen(n_features, 0);
    auto mark = [&](std::size_t f) {
        if (f >= n_features) {
            throw ValidationError("pairing references feature " + std::to_string(f) + " but the data has " +
                                  std::to_string(n_features) + " features");
        }
        if (seen[f]++ > 0) {
            throw ValidationError("feature " + std::to_string(f) + " appears more than once in the pairing");
        }
    };
    for (const auto &[j, k] : pairs) {
        mark(j);
        mark(k);
    }
    for (std::size_t f : singles) {
        mark(f);
    }
    for (std::size_t f = 0; f < n_features; ++f) {
        if (seen[f] == 0) {
            throw ValidationError("feature " + std::to_string(f) + " is not assigned to any input");
        }
    }
}

std::optional<std::size_t> FeaturePairing::shared_input(std::size_t j, std::size_t k) const {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if ((pairs[i].first == j && pairs[i].second == k) || (pairs[i].first == k && pairs[i].second == j)) {
            return i;
        }
    }
    return std::nullopt;
}

FeaturePairing FeaturePairing::all_singles(std::size_t n_features) {
    FeaturePairing p;
    for (std::size_t f = 0; f < n_features; ++f) {
        p.singles.push_back(f);
    }
    return p;
}

std::string FeaturePairing::id() const {
    std::string out;
    for (const auto &[j, k] : pairs) {
        if (!out.empty()) {
            out += '.';
        }
        out += std::to_string(j) + "-" + std::to_string(k);
    }
    for (std::size_t f : singles) {
        if (!out.empty()) {
            out += '.';
        }
        out += "s" + std::to_string(f);
    }
    return out;
}

std::string EncodingSpec::default_id() const {
    std::string name = to_string(kind.tag);
    if (kind.tag == EncodingTag::engineered_radial) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "(b=%g)", kind.beta);
        name += buf;
    }
    if (kind.is_hardware() && !kind.arcsin_premap) {
        name += "(raw)";
    }
    return name;
}

void fit_prescale(EncodingSpec &spec, std::span<const std::pair<double, double>> feature_ranges,
                  const PrescaleRule &rule) {
    spec.prescale.assign(feature_ranges.size(), Affine{});
    if (rule.mode == PrescaleRule::Mode::none) {
        spec.prescale.clear();
        return;
    }
    auto fit = [&](std::size_t f, bool phase) {
        auto [lo, hi] = feature_ranges[f];
        if (!(hi > lo)) {
            throw ValidationError("feature " + std::to_string(f) + " is constant; cannot min-max scale it");
        }
        spec.prescale[f] = phase ? Affine{lo, hi, rule.phase_lo, rule.phase_hi} : Affine{lo, hi, -1.0, 1.0};
    };
    for (const auto &[j, k] : spec.pairing.pairs) {
        fit(j, spec.kind.is_phase_slot(0));
        fit(k, spec.kind.is_phase_slot(1));
    }
    for (std::size_t f : spec.pairing.singles) {
        fit(f, false);
    }
}

std::pair<ComplexValue, ComplexValue> encoding_jacobian(const EncodingKind &kind, double xj, double xk) {
    const ComplexValue e = unit_phasor(xk);
    switch (kind.tag) {
    case EncodingTag::independent:
        throw UsageError("independent encoding does not combine features");
    case EncodingTag::linear:
        return {{1.0, 0.0}, {0.0, 1.0}};
    case EncodingTag::exponential:
        // d/dx_j = e^{i x_k},  d/dx_k = i x_j e^{i x_k}
        return {e, imag_unit * e * xj};
    case EncodingTag::hw_exponential: {
        if (kind.arcsin_premap) {
            if (!(std::abs(xj) < 1.0)) {
                throw DomainError("arcsin pre-map is not differentiable at |x_j| >= 1");
            }
            // g = i x_j e^{i x_k}
            return {imag_unit * e, -(e * xj)};
        }
        // g = i sin(x_j) e^{i x_k}
        return {imag_unit * e * std::cos(xj), -(e * std::sin(xj))};
    }
    case EncodingTag::hw_linear: {
        if (kind.arcsin_premap) {
            if (!(std::abs(xj) < 1.0) || !(std::abs(xk) < 1.0)) {
                throw DomainError("arcsin pre-map is not differentiable at |x| >= 1");
            }
            // g = i (x_j + i x_k) = (-x_k, x_j)
            return {{0.0, 1.0}, {-1.0, 0.0}};
        }
        return {{0.0, std::cos(xj)}, {-std::cos(xk), 0.0}};
    }
    case EncodingTag::engineered_radial: {
        if (xj == 0.0 && xk == 0.0) {
            throw DomainError("engineered radial encoding is singular at the origin");
        }
        // g = r e^{i beta t}, r = |(x_j, x_k)|, t = atan2(x_k, x_j):
        //   dg/dx_j = e^{i beta t} (x_j - i beta x_k) / r
        //   dg/dx_k = e^{i beta t} (x_k + i beta x_j) / r
        double r = std::hypot(xj, xk);
        ComplexValue rot = unit_phasor(kind.beta * std::atan2(xk, xj));
        return {rot * ComplexValue(xj / r, -kind.beta * xk / r), rot * ComplexValue(xk / r, kind.beta * xj / r)};
    }
    }
    throw std::logic_error("unknown encoding kind");
}

ImportanceRatio relative_importance_analytic(const EncodingKind &kind, double xj, double xk) {
    auto [dj, dk] = encoding_jacobian(kind, xj, xk);
    double num = modulus(dj);
    double den = modulus(dk);
    if (den == 0.0) {
        return {std::numeric_limits<double>::infinity(), true};
    }
    return {num / den, false};
}

ComplexMatrix encode_dataset(std::span<const std::vector<double>> X, const EncodingSpec &spec) {
    ComplexMatrix out(X.size(), spec.input_count());
    for (std::size_t s = 0; s < X.size(); ++s) {
        ComplexVector row;
        try {
            row = encode_sample<double>(spec, X[s]);
        } catch (const DomainError &e) {
            throw DomainError("sample " + std::to_string(s) + ", " + e.what());
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            out(s, i) = row[i];
        }
    }
    return out;
}

}  // namespace pel
