#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pel/config.hpp"
#include "pel/importance.hpp"
#include "pel/training.hpp"
#include "support.hpp"

using namespace pel;
using testing::Rng;

namespace {

EncodingSpec pair_spec(EncodingTag tag, std::size_t n_features = 2, double beta = 0.0) {
    EncodingSpec spec;
    spec.kind.tag = tag;
    spec.kind.beta = beta;
    for (std::size_t f = 0; f + 1 < n_features; f += 2) {
        spec.pairing.pairs.emplace_back(f, f + 1);
    }
    return spec;
}

// Random valid point for the kind: hardware kinds need |x| < 1.
std::vector<double> random_point(const EncodingSpec &spec, Rng &rng) {
    double bound = spec.kind.is_hardware() ? 0.95 : 2.0;
    auto x = rng.reals(spec.pairing.feature_count(), -bound, bound);
    for (auto &v : x) {
        if (std::abs(v) < 0.05) {
            v = 0.05;
        }
    }
    return x;
}

const EncodingTag combined_tags[] = {EncodingTag::linear, EncodingTag::exponential, EncodingTag::hw_linear,
                                     EncodingTag::hw_exponential, EncodingTag::engineered_radial};

}  // namespace

TEST_CASE("feature_importance: identity network examples") {
    auto identity = identity_model(1);
    auto lin = pair_spec(EncodingTag::linear);
    std::vector<double> x{0.3, -0.8};
    CHECK(feature_importance(identity, lin, x, 0, 0).value == 1.0);
    CHECK(feature_importance(identity, lin, x, 1, 0).value == 1.0);

    auto ex = pair_spec(EncodingTag::exponential);
    std::vector<double> p{2.0, 0.7};
    CHECK(feature_importance(identity, ex, p, 1, 0).value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(feature_importance(identity, ex, p, 2, 0), UsageError);
    CHECK_THROWS_AS(feature_importance(identity, ex, p, 0, 1), UsageError);
}

TEST_CASE("feature_importance: random networks match finite differences") {
    Rng rng(30);
    int checked = 0;
    for (int t = 0; t < 20; ++t) {
        auto spec = pair_spec(combined_tags[t % 5], 4);
        auto model = testing::random_network(LayerKind::svd_mesh, 3, 2, ActivationKind::modrelu, rng.bits());
        auto x = random_point(spec, rng);
        auto r = importance_at(model, spec, x);
        auto field = [&](const std::vector<double> &p) {
            return flatten(model_field(model, encode_sample<double>(spec, p, 3)));
        };
        auto fd = finite_diff(field, x, 1e-6);
        for (std::size_t j = 0; j < 4; ++j) {
            if (r.flagged(j)) {
                continue;
            }
            for (std::size_t c = 0; c < 3; ++c) {
                double want = std::hypot(fd(2 * c, j), fd(2 * c + 1, j));
                CHECK(r.at(j, c) >= 0.0);
                CHECK(std::abs(r.at(j, c) - want) <= 1e-5 * std::max(want, 1e-3));
                ++checked;
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("relative_importance_empirical: paper values") {
    Rng rng(31);
    for (int t = 0; t < 10; ++t) {
        for (auto kind : {LayerKind::svd_mesh, LayerKind::free_matrix, LayerKind::unitary_mesh}) {
            auto model = testing::random_network(kind, 3, 2, ActivationKind::identity, rng.bits());
            auto lin = pair_spec(EncodingTag::linear, 4);
            auto x = rng.reals(4, -1, 1);
            auto r = relative_importance_empirical(model, lin, x, 0, 1);
            CHECK(r.network_holomorphic);
            for (double v : r.empirical_per_output) {
                CHECK(std::abs(v - 1.0) < 1e-9);
            }
            auto ex = pair_spec(EncodingTag::exponential, 4);
            std::vector<double> p{2.0, rng.uniform(-3, 3), 0.4, 0.1};
            auto re = relative_importance_empirical(model, ex, p, 0, 1);
            for (double v : re.empirical_per_output) {
                CHECK(std::abs(v - 0.5) < 1e-9);
            }
            CHECK(re.analytic == doctest::Approx(0.5));
            CHECK(re.output_independent);
        }
    }
}

TEST_CASE("relative_importance_empirical: sentinel and usage errors") {
    auto model = identity_model(2);
    auto ex = pair_spec(EncodingTag::exponential, 4);
    std::vector<double> x{0.5, 0.3, 0.0, 1.0};
    // x_j = 0 kills the phase derivative: R_{k} = 0.
    auto r = relative_importance_empirical(model, ex, x, 2, 3);
    CHECK(r.unbounded);
    CHECK(std::isinf(r.ratio));
    CHECK(r.analytic_unbounded);
    CHECK_THROWS_AS(relative_importance_empirical(model, ex, x, 0, 2), UsageError);
    CHECK_THROWS_AS(relative_importance_empirical(model, ex, x, 1, 1), UsageError);
}

TEST_CASE("relative importance: output- and weight-independence for holomorphic networks") {
    Rng rng(32);
    for (auto tag : combined_tags) {
        auto spec = pair_spec(tag, 4);
        for (int t = 0; t < 50; ++t) {
            auto m1 = testing::random_network(LayerKind::svd_mesh, 3, 2, ActivationKind::identity, rng.bits());
            auto m2 = testing::random_network(LayerKind::free_matrix, 3, 3, ActivationKind::identity, rng.bits());
            auto x = random_point(spec, rng);
            auto a = relative_importance_empirical(m1, spec, x, 0, 1);
            auto b = relative_importance_empirical(m2, spec, x, 0, 1);
            if (a.unbounded || std::isnan(a.ratio)) {
                continue;
            }
            CHECK(a.max_spread < 1e-6);
            CHECK(testing::rel_err(a.ratio, b.ratio) < 1e-9);
            CHECK(testing::rel_err(a.ratio, a.analytic) < 1e-8);
        }
    }
}

TEST_CASE("relative importance: empirical matches analytic over random kinds and points") {
    Rng rng(33);
    int compared = 0;
    for (int t = 0; t < 1000; ++t) {
        auto spec = pair_spec(combined_tags[rng.index(5)], 2, rng.uniform(-2, 2));
        auto x = random_point(spec, rng);
        auto model = testing::random_network(LayerKind::free_matrix, 2, 1, ActivationKind::identity, rng.bits());
        auto r = relative_importance_empirical(model, spec, x, 0, 1);
        if (r.unbounded || r.flags.any()) {
            continue;
        }
        CHECK(testing::rel_err(r.ratio, r.analytic) < 1e-8);
        ++compared;
    }
    CHECK(compared > 900);
}

TEST_CASE("relative importance: modReLU networks are reported as non-holomorphic") {
    // The network term only cancels when y is complex-differentiable in the
    // encoded input; modReLU breaks that, so the ratio becomes model dependent.
    Rng rng(34);
    auto spec = pair_spec(EncodingTag::linear, 4);
    double max_dev = 0.0;
    for (int t = 0; t < 20; ++t) {
        auto model = testing::random_network(LayerKind::svd_mesh, 3, 2, ActivationKind::modrelu, rng.bits());
        auto r = relative_importance_empirical(model, spec, rng.reals(4, -1, 1), 0, 1);
        CHECK_FALSE(r.network_holomorphic);
        if (!std::isnan(r.ratio) && !r.unbounded) {
            max_dev = std::max(max_dev, std::abs(r.ratio - 1.0));
        }
    }
    CHECK(max_dev > 1e-3);
}

TEST_CASE("relative importance: unchanged by training a holomorphic network") {
    auto data = gen_nsphere({4, 200, 1.139216816500281, 5});
    auto spec = pair_spec(EncodingTag::exponential, 4);
    fit_prescale(spec, data.feature_ranges, PrescaleRule{});
    ArchitectureConfig arch;
    arch.hidden_activation = ActivationKind::identity;
    auto model = build_model(arch, 2, 2, 9);
    std::vector<double> x{0.4, -0.3, 0.2, 0.7};
    auto before = relative_importance_empirical(model, spec, x, 0, 1);
    TrainConfig cfg;
    cfg.epochs = 8;  // 200 samples / batch 16 = 13 steps per epoch: > 100 steps
    auto trained = train(model, data, spec, cfg);
    CHECK(trained.model.params()[0] != model.params()[0]);
    auto after = relative_importance_empirical(trained.model, spec, x, 0, 1);
    CHECK(testing::rel_err(before.ratio, after.ratio) < 1e-9);
}

TEST_CASE("importance_map: examples and brute-force oracle") {
    auto spec = pair_spec(EncodingTag::linear, 2);
    PNNModel zero({{LayerKind::free_matrix, 1, 1, ActivationKind::identity}}, Detection::field);
    std::vector<std::vector<double>> samples{{0.1, 0.2}, {0.5, -0.5}};
    for (const auto &agg : importance_map(zero, spec, samples)) {
        CHECK(agg.mean_importance == 0.0);
    }

    Rng rng(35);
    auto model = testing::random_network(LayerKind::svd_mesh, 3, 2, ActivationKind::modrelu, 77);
    auto spec4 = pair_spec(EncodingTag::exponential, 4);
    std::vector<std::vector<double>> one{rng.reals(4, -1, 1)};
    auto single = importance_map(model, spec4, one);
    for (std::size_t j = 0; j < 4; ++j) {
        double mean = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            mean += feature_importance(model, spec4, one[0], j, c).value;
        }
        CHECK(std::abs(single[j].mean_importance - mean / 3.0) < 1e-12);
    }

    std::vector<std::vector<double>> many;
    for (int s = 0; s < 30; ++s) {
        many.push_back(rng.reals(4, -1, 1));
    }
    auto agg = importance_map(model, spec4, many);
    for (std::size_t j = 0; j < 4; ++j) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto &x : many) {
            for (std::size_t c = 0; c < 3; ++c) {
                auto p = feature_importance(model, spec4, x, j, c);
                if (!p.flags.any()) {
                    sum += p.value;
                    ++n;
                }
            }
        }
        CHECK(std::abs(agg[j].mean_importance - sum / static_cast<double>(n)) < 1e-12);
    }
}

TEST_CASE("importance_map: flagged samples are excluded and counted") {
    auto spec = pair_spec(EncodingTag::engineered_radial, 2);
    auto model = identity_model(1);
    std::vector<std::vector<double>> samples{{0.0, 0.0}, {3.0, 4.0}};
    auto agg = importance_map(model, spec, samples);
    CHECK(agg[0].flagged == 1);
    CHECK(agg[0].flagged_fraction == 0.5);
    CHECK(agg[0].mean_importance == doctest::Approx(0.6));
    std::vector<std::vector<double>> all_bad{{0.0, 0.0}};
    CHECK_THROWS_AS(importance_map(model, spec, all_bad), NumericError);
}

TEST_CASE("importance_axis_sweep: examples") {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) {
        grid.push_back(-1.0 + 0.1 * i);
    }
    auto lin = pair_spec(EncodingTag::linear);
    auto s = importance_axis_sweep(identity_model(1), lin, 0, grid);
    CHECK(s.points.size() == grid.size());
    for (const auto &p : s.points) {
        CHECK(p.importance[0] == 1.0);
    }

    // partner amplitude sweep: importance of the phase slot scales with |x_j|
    auto ex = pair_spec(EncodingTag::exponential);
    for (double xj : {0.5, -1.5, 2.0}) {
        std::vector<double> x{xj, 0.3};
        CHECK(feature_importance(identity_model(1), ex, x, 1, 0).value == doctest::Approx(std::abs(xj)));
    }

    auto rad = pair_spec(EncodingTag::engineered_radial);
    auto rs = importance_axis_sweep(identity_model(1), rad, 0, grid);
    CHECK(rs.skipped.size() == 1);
    CHECK(std::abs(rs.skipped[0]) < 1e-12);
    for (const auto &p : rs.points) {
        CHECK(p.importance[0] == doctest::Approx(1.0).epsilon(1e-14));
        double h = 1e-6;
        double fd = (encode_engineered_radial(p.x + h, 0.0, 0.0).re - encode_engineered_radial(p.x - h, 0.0, 0.0).re) /
                    (2 * h);
        CHECK(std::abs(std::abs(fd) - 1.0) < 1e-6);
    }
    CHECK_THROWS_AS(importance_axis_sweep(identity_model(1), rad, 2, grid), UsageError);
}

TEST_CASE("plot-data writers") {
    auto lin = pair_spec(EncodingTag::linear);
    std::vector<double> grid{-0.5, 0.5};
    auto s = importance_axis_sweep(identity_model(1), lin, 1, grid);
    std::ostringstream tsv;
    write_sweep_tsv(tsv, s);
    CHECK(tsv.str() == "x_1\tR_c0\n-0.5\t1\n0.5\t1\n");

    std::vector<FeatureAggregate> map{{0, 0.25, 0.5, 1}};
    std::ostringstream csv;
    write_map_csv(csv, map);
    CHECK(csv.str() == "feature,mean_importance,flagged_fraction\n0,0.25,0.5\n");
}
