#pragma once

// Gradient-based feature importance of the composed encoding + network map.
//
// R_{j->c} = |d y_c / d x_j| where y is the pre-detection field and x_j a raw
// feature (before prescaling). Derivatives come from forward-mode duals.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pel/autodiff.hpp"
#include "pel/encoding.hpp"
#include "pel/model.hpp"

namespace pel {

struct PointImportance {
    double value = 0.0;
    EvalFlags flags;
};

struct ImportanceResult {
    std::size_t n_features = 0;
    std::size_t n_outputs = 0;
    std::vector<double> per_output;         // row-major, feature x output
    std::vector<EvalFlags> feature_flags;   // one per feature
    std::vector<double> point;
    std::string encoding_id;
    std::string model_id;

    double at(std::size_t j, std::size_t c) const { return per_output[j * n_outputs + c]; }
    bool flagged(std::size_t j) const { return feature_flags[j].any(); }
};

/// Importance of every feature for every output at point x.
ImportanceResult importance_at(const PNNModel &model, const EncodingSpec &spec, std::span<const double> x);

PointImportance feature_importance(const PNNModel &model, const EncodingSpec &spec, std::span<const double> x,
                                   std::size_t j, std::size_t c);

struct RelativeImportanceResult {
    std::size_t j = 0;
    std::size_t k = 0;
    double ratio = 0.0;  // first informative output's ratio, +inf when unbounded
    bool unbounded = false;
    double analytic = 0.0;
    bool analytic_unbounded = false;
    std::vector<double> empirical_per_output;  // NaN where both importances vanish
    double max_spread = 0.0;                   // max_c |ratio_c - ratio| / ratio
    bool output_independent = true;            // max_spread < spread_tolerance
    bool network_holomorphic = true;           // cancellation premise of the model
    EvalFlags flags;

    static constexpr double spread_tolerance = 1e-6;
};

/// R_{j->c} / R_{k->c} for every output, with the encoding-only analytic value
/// alongside. j and k must share one input.
RelativeImportanceResult relative_importance_empirical(const PNNModel &model, const EncodingSpec &spec,
                                                       std::span<const double> x, std::size_t j, std::size_t k);

struct FeatureAggregate {
    std::size_t feature = 0;
    double mean_importance = 0.0;
    double flagged_fraction = 0.0;
    std::size_t flagged = 0;
};

/// Mean over samples and outputs of unflagged R_{j->c}, per feature.
std::vector<FeatureAggregate> importance_map(const PNNModel &model, const EncodingSpec &spec,
                                             std::span<const std::vector<double>> samples);

struct SweepPoint {
    double x = 0.0;
    std::vector<double> importance;  // one per output
    EvalFlags flags;
};

struct AxisSweep {
    std::size_t axis = 0;
    std::vector<SweepPoint> points;   // unflagged points
    std::vector<double> skipped;      // grid values skipped because they were flagged
};

/// Importance of feature `axis` at points on its own axis (all other features 0).
AxisSweep importance_axis_sweep(const PNNModel &model, const EncodingSpec &spec, std::size_t axis,
                                std::span<const double> grid);

/// Tab-separated: header "x_j  R_c0  R_c1 ...", one row per unflagged point.
void write_sweep_tsv(std::ostream &out, const AxisSweep &sweep);
/// CSV: feature,mean_importance,flagged_fraction.
void write_map_csv(std::ostream &out, std::span<const FeatureAggregate> map);

}  // namespace pel
