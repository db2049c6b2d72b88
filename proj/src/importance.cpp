#include "pel/importance.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace pel {

namespace {

RealizedModel<Dual> realize_constant(const PNNModel &model) {
    std::vector<Dual> params(model.params().begin(), model.params().end());
    return realize<Dual>(model, params);
}

void check_point(const PNNModel &model, const EncodingSpec &spec, std::span<const double> x) {
    if (x.size() != spec.pairing.feature_count()) {
        throw ShapeError("point has " + std::to_string(x.size()) + " features, encoding expects " +
                         std::to_string(spec.pairing.feature_count()));
    }
    if (spec.input_count() > model.n_inputs()) {
        throw ShapeError("encoding produces " + std::to_string(spec.input_count()) + " inputs for a " +
                         std::to_string(model.n_inputs()) + "-port model");
    }
}

// Singularity of the encoding at x for feature j only: evaluated on the pair
// that carries j, so a singular pair does not taint unrelated features.
bool encoding_singular_for(const EncodingSpec &spec, std::span<const double> x, std::size_t j) {
    for (const auto &[a, b] : spec.pairing.pairs) {
        if (a == j || b == j) {
            EvalFlags f;
            encode_pair(spec.kind, spec.prescale_for(a).apply(x[a]), spec.prescale_for(b).apply(x[b]), &f);
            return f.singular;
        }
    }
    return false;
}

struct Sensitivities {
    std::vector<ComplexVector> derivs;  // per feature, per output
    std::vector<EvalFlags> flags;
};

Sensitivities sensitivities(const PNNModel &model, const EncodingSpec &spec, std::span<const double> x,
                            std::span<const std::size_t> features) {
    check_point(model, spec, x);
    const auto layers = realize_constant(model);
    const std::size_t ports = model.n_inputs();
    auto program = [&](std::span<const Dual> xs, EvalFlags &flags) {
        auto input = encode_sample<Dual>(spec, xs, ports, &flags);
        return forward_field(layers, input, &flags);
    };
    Sensitivities out;
    for (std::size_t j : features) {
        auto jvp = forward_jvp(program, x, j);
        EvalFlags f;
        f.nonsmooth = jvp.flags.nonsmooth;
        f.singular = encoding_singular_for(spec, x, j);
        for (const auto &d : jvp.derivs) {
            if (!std::isfinite(d.re) || !std::isfinite(d.im)) {
                f.singular = true;
            }
        }
        out.derivs.push_back(std::move(jvp.derivs));
        out.flags.push_back(f);
    }
    return out;
}

}  // namespace

ImportanceResult importance_at(const PNNModel &model, const EncodingSpec &spec, std::span<const double> x) {
    std::vector<std::size_t> features(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        features[j] = j;
    }
    auto sens = sensitivities(model, spec, x, features);
    ImportanceResult r;
    r.n_features = x.size();
    r.n_outputs = model.n_outputs();
    r.point.assign(x.begin(), x.end());
    r.encoding_id = spec.id.empty() ? spec.default_id() : spec.id;
    r.per_output.reserve(r.n_features * r.n_outputs);
    for (std::size_t j = 0; j < r.n_features; ++j) {
        for (const auto &d : sens.derivs[j]) {
            r.per_output.push_back(modulus(d));
        }
    }
    r.feature_flags = std::move(sens.flags);
    return r;
}

PointImportance feature_importance(const PNNModel &model, const EncodingSpec &spec, std::span<const double> x,
                                   std::size_t j, std::size_t c) {
    if (j >= x.size()) {
        throw UsageError("feature index " + std::to_string(j) + " out of range");
    }
    if (c >= model.n_outputs()) {
        throw UsageError("output index " + std::to_string(c) + " out of range");
    }
    const std::size_t features[] = {j};
    auto sens = sensitivities(model, spec, x, features);
    return {modulus(sens.derivs[0][c]), sens.flags[0]};
}

RelativeImportanceResult relative_importance_empirical(const PNNModel &model, const EncodingSpec &spec,
                                                       std::span<const double> x, std::size_t j, std::size_t k) {
    auto input = spec.pairing.shared_input(j, k);
    if (!input || j == k) {
        throw UsageError("features " + std::to_string(j) + " and " + std::to_string(k) +
                         " are not encoded in the same input");
    }
    const std::size_t features[] = {j, k};
    auto sens = sensitivities(model, spec, x, features);

    RelativeImportanceResult r;
    r.j = j;
    r.k = k;
    r.network_holomorphic = model.is_holomorphic();
    r.flags = sens.flags[0];
    r.flags.merge(sens.flags[1]);

    // Analytic value from the encoding alone, carried through the prescale maps.
    const auto &[a, b] = spec.pairing.pairs[*input];
    const Affine pa = spec.prescale_for(a);
    const Affine pb = spec.prescale_for(b);
    try {
        auto [dg_a, dg_b] = encoding_jacobian(spec.kind, pa.apply(x[a]), pb.apply(x[b]));
        double ra = modulus(dg_a) * std::abs(pa.scale());
        double rb = modulus(dg_b) * std::abs(pb.scale());
        double num = a == j ? ra : rb;
        double den = a == j ? rb : ra;
        r.analytic_unbounded = den == 0.0;
        r.analytic = den == 0.0 ? std::numeric_limits<double>::infinity() : num / den;
    } catch (const DomainError &) {
        r.analytic = std::numeric_limits<double>::quiet_NaN();
        r.flags.singular = true;
    }

    bool have_reference = false;
    for (std::size_t c = 0; c < model.n_outputs(); ++c) {
        double rj = modulus(sens.derivs[0][c]);
        double rk = modulus(sens.derivs[1][c]);
        double ratio;
        if (rk == 0.0) {
            ratio = rj == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
        } else {
            ratio = rj / rk;
        }
        r.empirical_per_output.push_back(ratio);
        if (!have_reference && !std::isnan(ratio)) {
            r.ratio = ratio;
            r.unbounded = std::isinf(ratio);
            have_reference = true;
        }
    }
    if (!have_reference) {
        r.ratio = std::numeric_limits<double>::quiet_NaN();
    }
    if (have_reference && !r.unbounded) {
        for (double ratio : r.empirical_per_output) {
            if (std::isnan(ratio)) {
                continue;
            }
            double spread = std::isinf(ratio) ? std::numeric_limits<double>::infinity()
                                               : std::abs(ratio - r.ratio) / r.ratio;
            r.max_spread = std::max(r.max_spread, spread);
        }
    }
    r.output_independent = r.max_spread < RelativeImportanceResult::spread_tolerance;
    return r;
}

std::vector<FeatureAggregate> importance_map(const PNNModel &model, const EncodingSpec &spec,
                                             std::span<const std::vector<double>> samples) {
    if (samples.empty()) {
        throw UsageError("importance map needs at least one sample");
    }
    const std::size_t n_features = samples.front().size();
    std::vector<double> sums(n_features, 0.0);
    std::vector<std::size_t> counts(n_features, 0);
    std::vector<std::size_t> flagged(n_features, 0);
    for (const auto &x : samples) {
        auto r = importance_at(model, spec, x);
        for (std::size_t j = 0; j < n_features; ++j) {
            if (r.flagged(j)) {
                ++flagged[j];
                continue;
            }
            for (std::size_t c = 0; c < r.n_outputs; ++c) {
                sums[j] += r.at(j, c);
            }
            counts[j] += r.n_outputs;
        }
    }
    std::vector<FeatureAggregate> out;
    for (std::size_t j = 0; j < n_features; ++j) {
        if (flagged[j] == samples.size()) {
            throw NumericError("every sample is flagged for feature " + std::to_string(j));
        }
        FeatureAggregate agg;
        agg.feature = j;
        agg.mean_importance = sums[j] / static_cast<double>(counts[j]);
        agg.flagged = flagged[j];
        agg.flagged_fraction = static_cast<double>(flagged[j]) / static_cast<double>(samples.size());
        out.push_back(agg);
    }
    return out;
}

AxisSweep importance_axis_sweep(const PNNModel &model, const EncodingSpec &spec, std::size_t axis,
                                std::span<const double> grid) {
    const std::size_t n_features = spec.pairing.feature_count();
    if (axis >= n_features) {
        throw UsageError("sweep axis " + std::to_string(axis) + " out of range");
    }
    AxisSweep sweep;
    sweep.axis = axis;
    std::vector<double> x(n_features, 0.0);
    const std::size_t features[] = {axis};
    for (double v : grid) {
        x[axis] = v;
        auto sens = sensitivities(model, spec, x, features);
        if (sens.flags[0].any()) {
            sweep.skipped.push_back(v);
            continue;
        }
        SweepPoint p;
        p.x = v;
        p.flags = sens.flags[0];
        for (const auto &d : sens.derivs[0]) {
            p.importance.push_back(modulus(d));
        }
        sweep.points.push_back(std::move(p));
    }
    return sweep;
}

void write_sweep_tsv(std::ostream &out, const AxisSweep &sweep) {
    std::size_t n_out = sweep.points.empty() ? 0 : sweep.points.front().importance.size();
    out << "x_" << sweep.axis;
    for (std::size_t c = 0; c < n_out; ++c) {
        out << "\tR_c" << c;
    }
    out << '\n' << std::setprecision(17);
    for (const auto &p : sweep.points) {
        out << p.x;
        for (double v : p.importance) {
            out << '\t' << v;
        }
        out << '\n';
    }
}

void write_map_csv(std::ostream &out, std::span<const FeatureAggregate> map) {
    out << "feature,mean_importance,flagged_fraction\n" << std::setprecision(17);
    for (const auto &a : map) {
        out << a.feature << ',' << a.mean_importance << ',' << a.flagged_fraction << '\n';
    }
}

}  // namespace pel
