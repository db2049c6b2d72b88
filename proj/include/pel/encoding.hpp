#pragma once

// Encoding functions: how real features become complex optical inputs.
//
// A pair (x_j, x_k) shares one input through one of the two-feature kinds;
// unpaired features use the independent (real amplitude) encoding. Inputs are
// ordered as all pairs first, then all singles, each in pairing order.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pel/autodiff.hpp"
#include "pel/complex.hpp"
#include "pel/errors.hpp"

namespace pel {

enum class EncodingTag { independent, linear, exponential, hw_linear, hw_exponential, engineered_radial };

std::string to_string(EncodingTag tag);
EncodingTag parse_encoding_tag(const std::string &name);

struct EncodingKind {
    EncodingTag tag = EncodingTag::independent;
    double beta = 0.0;          // phase scale of engineered_radial
    bool arcsin_premap = true;  // hw kinds: feed arcsin(x) to the sine-mediated modulators

    bool is_hardware() const { return tag == EncodingTag::hw_linear || tag == EncodingTag::hw_exponential; }
    /// Whether slot 0 / slot 1 of a pair must lie in [-1, 1].
    bool amplitude_bounded(int slot) const;
    /// True for the slot carried purely as a phase (x_k of the exponential kinds).
    bool is_phase_slot(int slot) const;
};

struct FeaturePairing {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::size_t> singles;

    std::size_t input_count() const { return pairs.size() + singles.size(); }
    std::size_t feature_count() const { return 2 * pairs.size() + singles.size(); }
    /// Every index in [0, n_features) must appear exactly once.
    void validate(std::size_t n_features) const;
    /// Input index carrying both j and k, if they are co-encoded.
    std::optional<std::size_t> shared_input(std::size_t j, std::size_t k) const;

    static FeaturePairing all_singles(std::size_t n_features);
    /// Stable identifier such as "0-1.2-3" or "s0.s1".
    std::string id() const;
};

/// Affine map [in_lo, in_hi] -> [out_lo, out_hi] applied to a raw feature
/// before encoding. Written as a normalized position so that the interval
/// endpoints map exactly onto the target endpoints.
struct Affine {
    double in_lo = 0.0;
    double in_hi = 1.0;
    double out_lo = 0.0;
    double out_hi = 1.0;

    template <class T>
    T apply(const T &x) const {
        return (x - T(in_lo)) / T(in_hi - in_lo) * T(out_hi - out_lo) + T(out_lo);
    }
    double scale() const { return (out_hi - out_lo) / (in_hi - in_lo); }
    bool is_identity() const { return in_lo == out_lo && in_hi == out_hi; }
};

struct EncodingSpec {
    std::string id;
    EncodingKind kind;
    FeaturePairing pairing;
    std::vector<Affine> prescale;  // empty means identity for every feature

    Affine prescale_for(std::size_t feature) const {
        return feature < prescale.size() ? prescale[feature] : Affine{};
    }
    std::size_t input_count() const { return pairing.input_count(); }
    std::string default_id() const;
};

/// How to derive the prescale maps from the data's feature ranges: amplitude
/// slots are mapped min-max onto [-1, 1], phase slots onto phase_range.
struct PrescaleRule {
    enum class Mode { none, minmax } mode = Mode::minmax;
    double phase_lo = -std::numbers::pi;
    double phase_hi = std::numbers::pi;
};

void fit_prescale(EncodingSpec &spec, std::span<const std::pair<double, double>> feature_ranges,
                  const PrescaleRule &rule);

// Individual encoding functions --------------------------------------------

template <class T>
BasicComplex<T> encode_independent(const T &x) {
    return BasicComplex<T>(x, T(0.0));
}

/// x_j + i x_k
template <class T>
BasicComplex<T> encode_linear(const T &xj, const T &xk) {
    return BasicComplex<T>(xj, xk);
}

/// x_j e^{i x_k}
template <class T>
BasicComplex<T> encode_exponential(const T &xj, const T &xk) {
    return unit_phasor(xk) * xj;
}

/// i sin(x_j) e^{i x_k}: balanced MZI amplitude modulator followed by a phase shifter.
template <class T>
BasicComplex<T> encode_hw_exponential(const T &xj, const T &xk) {
    using std::sin;
    BasicComplex<T> e = unit_phasor(xk) * sin(xj);
    return BasicComplex<T>(-e.im, e.re);
}

/// i (sin x_j + i sin x_k) = (-sin x_k, sin x_j): two MZI amplitude modulators,
/// one output shifted by pi/2.
template <class T>
BasicComplex<T> encode_hw_linear(const T &xj, const T &xk) {
    using std::sin;
    return BasicComplex<T>(-sin(xk), sin(xj));
}

/// sqrt(x_j^2 + x_k^2) e^{i beta atan2(x_k, x_j)}. beta = 0 is the pure radius,
/// beta = 1 is identical to the linear encoding. The origin is singular; its
/// value is 0 and `flags->singular` is raised.
template <class T>
BasicComplex<T> encode_engineered_radial(const T &xj, const T &xk, double beta, EvalFlags *flags = nullptr) {
    using std::atan2;
    using std::sqrt;
    if (value_of(xj) == 0.0 && value_of(xk) == 0.0) {
        if (flags != nullptr) {
            flags->singular = true;
        }
        return BasicComplex<T>(T(0.0), T(0.0));
    }
    T r = sqrt(xj * xj + xk * xk);
    return unit_phasor(T(beta) * atan2(xk, xj)) * r;
}

namespace detail {

// arcsin pre-map with the [-1, 1] domain check; |x| = 1 has an unbounded
// derivative and is flagged singular.
template <class T>
T premap_arcsin(const T &x, EvalFlags *flags) {
    using std::asin;
    double v = value_of(x);
    if (!(std::abs(v) <= 1.0)) {
        throw DomainError("value " + std::to_string(v) + " outside the arcsin domain [-1, 1]");
    }
    if (std::abs(v) == 1.0 && flags != nullptr) {
        flags->singular = true;
    }
    return asin(x);
}

inline void check_bounded(double v) {
    if (!(std::abs(v) <= 1.0)) {
        throw DomainError("value " + std::to_string(v) + " outside [-1, 1] required by the hardware encoding");
    }
}

}  // namespace detail

/// Encodes one (already prescaled) feature pair under `kind`, including the
/// arcsin pre-map of the hardware kinds when enabled.
template <class T>
BasicComplex<T> encode_pair(const EncodingKind &kind, const T &xj, const T &xk, EvalFlags *flags = nullptr) {
    switch (kind.tag) {
    case EncodingTag::independent:
        throw UsageError("independent encoding does not combine features");
    case EncodingTag::linear:
        return encode_linear(xj, xk);
    case EncodingTag::exponential:
        return encode_exponential(xj, xk);
    case EncodingTag::hw_exponential:
        if (kind.arcsin_premap) {
            return encode_hw_exponential(detail::premap_arcsin(xj, flags), xk);
        }
        detail::check_bounded(value_of(xj));
        return encode_hw_exponential(xj, xk);
    case EncodingTag::hw_linear:
        if (kind.arcsin_premap) {
            return encode_hw_linear(detail::premap_arcsin(xj, flags), detail::premap_arcsin(xk, flags));
        }
        detail::check_bounded(value_of(xj));
        detail::check_bounded(value_of(xk));
        return encode_hw_linear(xj, xk);
    case EncodingTag::engineered_radial:
        return encode_engineered_radial(xj, xk, kind.beta, flags);
    }
    throw std::logic_error("unknown encoding kind");
}

/// Full sample encoding: prescale every feature, then encode pairs and singles.
/// `n_ports` pads the result with zero inputs (0 means no padding).
template <class T>
BasicComplexVector<T> encode_sample(const EncodingSpec &spec, std::span<const T> x, std::size_t n_ports = 0,
                                    EvalFlags *flags = nullptr) {
    if (x.size() != spec.pairing.feature_count()) {
        throw ShapeError("sample has " + std::to_string(x.size()) + " features, encoding expects " +
                         std::to_string(spec.pairing.feature_count()));
    }
    BasicComplexVector<T> out;
    out.reserve(std::max(n_ports, spec.input_count()));
    for (const auto &[j, k] : spec.pairing.pairs) {
        T xj = spec.prescale_for(j).apply(x[j]);
        T xk = spec.prescale_for(k).apply(x[k]);
        try {
            out.push_back(encode_pair(spec.kind, xj, xk, flags));
        } catch (const DomainError &e) {
            throw DomainError("features (" + std::to_string(j) + ", " + std::to_string(k) + "): " + e.what());
        }
    }
    for (std::size_t j : spec.pairing.singles) {
        out.push_back(encode_independent(spec.prescale_for(j).apply(x[j])));
    }
    if (n_ports > 0) {
        if (out.size() > n_ports) {
            throw ShapeError("encoding produces " + std::to_string(out.size()) + " inputs for a " +
                             std::to_string(n_ports) + "-port model");
        }
        out.resize(n_ports, BasicComplex<T>(T(0.0), T(0.0)));
    }
    return out;
}

/// Analytic partial derivatives (d g / d x_j, d g / d x_k) of encode_pair.
std::pair<ComplexValue, ComplexValue> encoding_jacobian(const EncodingKind &kind, double xj, double xk);

/// |dg/dx_j| / |dg/dx_k|. A zero denominator yields +inf with `unbounded` set.
struct ImportanceRatio {
    double value = 0.0;
    bool unbounded = false;
};

ImportanceRatio relative_importance_analytic(const EncodingKind &kind, double xj, double xk);

/// Encodes every sample (rows of X); result has one row per sample and one
/// column per encoded input. Domain failures name the sample and features.
ComplexMatrix encode_dataset(std::span<const std::vector<double>> X, const EncodingSpec &spec);

}  // namespace pel
