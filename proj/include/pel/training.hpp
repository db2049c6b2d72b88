#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pel/autodiff.hpp"
#include "pel/dataset.hpp"
#include "pel/encoding.hpp"
#include "pel/model.hpp"

namespace pel {

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    std::size_t epochs = 300;
    double learning_rate = 0.01;
    std::size_t batch_size = 16;
    OptimizerConfig optimizer;
    std::string loss = "softmax_cross_entropy_on_intensity";
    std::uint64_t seed = 0;

    void validate() const;
};

/// Network shape used by the experiments. Ports default to
/// max(encoded inputs, classes); every layer but the last uses the hidden
/// activation.
struct ArchitectureConfig {
    std::optional<std::size_t> ports;
    std::size_t depth = 2;
    LayerKind kind = LayerKind::svd_mesh;
    ActivationKind hidden_activation = ActivationKind::modrelu;
    ActivationKind output_activation = ActivationKind::identity;
    Detection detection = Detection::intensity;
    double activation_bias = 0.1;
    double svd_gain = 1.0;

    void validate() const;
};

PNNModel build_model(const ArchitectureConfig &arch, std::size_t encoded_inputs, int class_count,
                     std::uint64_t seed);

/// Softmax cross-entropy over the intensities of the first `class_count`
/// ports: loss = log(sum_c exp(I_c)) - I_label.
template <class T>
T intensity_cross_entropy(const BasicComplexVector<T> &field, int label, int class_count) {
    using std::exp;
    using std::log;
    const auto n = static_cast<std::size_t>(class_count);
    std::vector<T> intensity;
    intensity.reserve(n);
    double peak = -INFINITY;
    for (std::size_t c = 0; c < n; ++c) {
        intensity.push_back(modulus_sq(field[c]));
        peak = std::max(peak, value_of(intensity.back()));
    }
    T sum(0.0);
    for (const auto &v : intensity) {
        sum = sum + exp(v - T(peak));
    }
    return log(sum) + T(peak) - intensity[static_cast<std::size_t>(label)];
}

struct LossScores {
    double loss = 0.0;
    std::vector<double> scores;  // softmax over the first class_count intensities
};

LossScores loss_and_scores(const PNNModel &model, const ComplexVector &encoded_input, int label, int class_count);

/// Mean loss over the given samples and its gradient with respect to every
/// model parameter. `workspace` is reused between calls.
struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};

LossGradient loss_gradient(const PNNModel &model, std::span<const ComplexVector> inputs, std::span<const int> labels,
                           int class_count, GradTape *workspace = nullptr);

/// Encodes every sample of `data` and pads to the model's port count.
std::vector<ComplexVector> encode_for_model(const Dataset &data, const EncodingSpec &spec, std::size_t ports);

struct TrainResult {
    PNNModel model;
    std::vector<double> loss_history;  // mean sample loss per epoch
};

TrainResult train(PNNModel model, const Dataset &data, const EncodingSpec &spec, const TrainConfig &config);

/// Argmax class per sample (ties to the lowest index).
int predict(const RealizedModel<double> &layers, const ComplexVector &input, int class_count);
double evaluate(const PNNModel &model, const Dataset &data, const EncodingSpec &spec);

struct TrialRecord {
    std::string encoding_id;
    std::string pairing_id;
    std::uint64_t seed = 0;
    double final_train_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::vector<double> loss_history;
    bool failed = false;
    std::string error;
};

struct EncodingSummary {
    std::string encoding_id;
    std::string pairing_id;
    std::size_t trials = 0;
    std::size_t failed = 0;
    double mean_test = 0.0;
    double std_test = 0.0;  // sample standard deviation
    double min_test = 0.0;
    double max_test = 0.0;
    double mean_train = 0.0;

    double stderr_test() const;
};

struct TrialStudy {
    std::vector<TrialRecord> records;     // encoding-major, seed-minor
    std::vector<EncodingSummary> summary;  // sorted by mean test accuracy, descending
    std::size_t failed = 0;
};

struct TrialPlan {
    ArchitectureConfig architecture;
    TrainConfig train;
    double train_fraction = 0.8;
    std::size_t n_seeds = 1;
    std::uint64_t seed_offset = 0;
    std::size_t jobs = 1;
};

/// Seeds derived per trial from the trial seed s; identical across encodings.
struct TrialSeeds {
    std::uint64_t model;
    std::uint64_t split;
    std::uint64_t shuffle;
};
TrialSeeds trial_seeds(std::uint64_t s);

/// Runs every encoding for seeds s in [seed_offset, seed_offset + n_seeds).
/// Encoding prescales must already be fitted.
TrialStudy run_trials(const TrialPlan &plan, const Dataset &data, std::span<const EncodingSpec> encodings,
                      const std::function<void(const TrialRecord &)> &on_trial = {});

/// Single paired trial; exceptions are captured in the record.
TrialRecord run_trial(const TrialPlan &plan, const Dataset &data, const EncodingSpec &spec, std::uint64_t seed);

std::vector<EncodingSummary> summarize(std::span<const TrialRecord> records,
                                       std::span<const EncodingSpec> encodings);

void write_results_csv(std::ostream &out, std::span<const TrialRecord> records);
void write_summary_tsv(std::ostream &out, std::span<const EncodingSummary> summary);

}  // namespace pel
