#include "pel/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

namespace pel {

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw ValidationError("train.epochs must be at least 1");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("train.learning_rate must be a finite nonnegative number");
    }
    if (batch_size < 1) {
        throw ValidationError("train.batch_size must be at least 1");
    }
    if (loss != "softmax_cross_entropy_on_intensity") {
        throw ValidationError("train.loss '" + loss + "' is not supported");
    }
    if (optimizer.kind == OptimizerKind::adam &&
        !(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 && optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0 &&
          optimizer.epsilon > 0.0)) {
        throw ValidationError("train.optimizer: Adam needs beta1, beta2 in [0, 1) and epsilon > 0");
    }
}

void ArchitectureConfig::validate() const {
    if (depth < 1) {
        throw ValidationError("architecture.depth must be at least 1");
    }
    if (ports && *ports < 1) {
        throw ValidationError("architecture.ports must be at least 1");
    }
    if (!(svd_gain >= 0.0 && svd_gain <= svd_gain_max)) {
        throw ValidationError("architecture.svd_gain must lie in [0, 1]");
    }
}

PNNModel build_model(const ArchitectureConfig &arch, std::size_t encoded_inputs, int class_count,
                     std::uint64_t seed) {
    arch.validate();
    std::size_t n = arch.ports.value_or(std::max(encoded_inputs, static_cast<std::size_t>(class_count)));
    if (n < encoded_inputs || n < static_cast<std::size_t>(class_count)) {
        throw ValidationError("architecture.ports = " + std::to_string(n) + " is smaller than the " +
                              std::to_string(encoded_inputs) + " encoded inputs or " +
                              std::to_string(class_count) + " classes");
    }
    std::vector<LayerSpec> layers;
    for (std::size_t l = 0; l < arch.depth; ++l) {
        bool last = l + 1 == arch.depth;
        layers.push_back({arch.kind, n, n, last ? arch.output_activation : arch.hidden_activation});
    }
    ModelInit init;
    init.seed = seed;
    init.activation_bias = arch.activation_bias;
    init.svd_gain = arch.svd_gain;
    return PNNModel::random(std::move(layers), arch.detection, init);
}

LossScores loss_and_scores(const PNNModel &model, const ComplexVector &encoded_input, int label, int class_count) {
    if (class_count < 1 || static_cast<std::size_t>(class_count) > model.n_outputs()) {
        throw UsageError("class count " + std::to_string(class_count) + " exceeds the model's " +
                         std::to_string(model.n_outputs()) + " outputs");
    }
    if (label < 0 || label >= class_count) {
        throw UsageError("label " + std::to_string(label) + " outside [0, " + std::to_string(class_count) + ")");
    }
    ComplexVector field = model_field(model, encoded_input);
    LossScores out;
    out.loss = intensity_cross_entropy(field, label, class_count);
    auto intensity = detect_intensity(field);
    double peak = *std::max_element(intensity.begin(), intensity.begin() + class_count);
    double sum = 0.0;
    for (int c = 0; c < class_count; ++c) {
        out.scores.push_back(std::exp(intensity[static_cast<std::size_t>(c)] - peak));
        sum += out.scores.back();
    }
    for (auto &s : out.scores) {
        s /= sum;
    }
    return out;
}

LossGradient loss_gradient(const PNNModel &model, std::span<const ComplexVector> inputs, std::span<const int> labels,
                           int class_count, GradTape *workspace) {
    if (inputs.size() != labels.size() || inputs.empty()) {
        throw UsageError("loss gradient needs matching, nonempty inputs and labels");
    }
    auto program = [&](std::span<const Var> params) {
        auto layers = realize<Var>(model, params);
        Var total(0.0);
        for (std::size_t s = 0; s < inputs.size(); ++s) {
            BasicComplexVector<Var> x;
            x.reserve(inputs[s].size());
            for (const auto &z : inputs[s]) {
                x.emplace_back(Var(z.re), Var(z.im));
            }
            total = total + intensity_cross_entropy(forward_field(layers, x), labels[s], class_count);
        }
        return total / Var(static_cast<double>(inputs.size()));
    };
    auto vg = reverse_value_and_grad(program, model.params(), workspace);
    return {vg.value, std::move(vg.gradient)};
}

std::vector<ComplexVector> encode_for_model(const Dataset &data, const EncodingSpec &spec, std::size_t ports) {
    std::vector<ComplexVector> out;
    out.reserve(data.size());
    for (std::size_t s = 0; s < data.size(); ++s) {
        try {
            out.push_back(encode_sample<double>(spec, data.X[s], ports));
        } catch (const DomainError &e) {
            throw DomainError("sample " + std::to_string(s) + ", " + e.what());
        }
    }
    return out;
}

namespace {

class Optimizer {
  public:
    Optimizer(const TrainConfig &config, std::size_t n)
        : config_(config), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grad) {
        const double lr = config_.learning_rate;
        if (config_.optimizer.kind == OptimizerKind::sgd) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                params[i] -= lr * grad[i];
            }
            return;
        }
        const auto &o = config_.optimizer;
        ++t_;
        double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = o.beta1 * m_[i] + (1.0 - o.beta1) * grad[i];
            v_[i] = o.beta2 * v_[i] + (1.0 - o.beta2) * grad[i] * grad[i];
            double mhat = m_[i] / bc1;
            double vhat = v_[i] / bc2;
            params[i] -= lr * mhat / (std::sqrt(vhat) + o.epsilon);
        }
    }

  private:
    const TrainConfig &config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::uint64_t t_ = 0;
};

}  // namespace

TrainResult train(PNNModel model, const Dataset &data, const EncodingSpec &spec, const TrainConfig &config) {
    config.validate();
    if (data.size() == 0) {
        throw UsageError("cannot train on an empty dataset");
    }
    const auto inputs = encode_for_model(data, spec, model.n_inputs());
    const int classes = data.class_count;
    if (classes < 1 || static_cast<std::size_t>(classes) > model.n_outputs()) {
        throw UsageError("dataset has more classes than the model has outputs");
    }

    TrainResult result;
    result.loss_history.reserve(config.epochs);
    Optimizer opt(config, model.params().size());
    GradTape tape;
    std::vector<std::size_t> order(data.size());
    std::vector<ComplexVector> batch_inputs;
    std::vector<int> batch_labels;
    std::mt19937_64 rng(config.seed);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            std::size_t end = std::min(order.size(), start + config.batch_size);
            batch_inputs.clear();
            batch_labels.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch_inputs.push_back(inputs[order[i]]);
                batch_labels.push_back(data.y[order[i]]);
            }
            LossGradient lg;
            try {
                lg = loss_gradient(model, batch_inputs, batch_labels, classes, &tape);
            } catch (const NumericError &e) {
                throw NumericError("training diverged in epoch " + std::to_string(epoch) + ": " + e.what());
            }
            epoch_loss += lg.loss * static_cast<double>(end - start);
            opt.step(model.params(), lg.gradient);
            model.project();
        }
        double mean_loss = epoch_loss / static_cast<double>(data.size());
        if (!std::isfinite(mean_loss)) {
            throw NumericError("non-finite loss in epoch " + std::to_string(epoch));
        }
        result.loss_history.push_back(mean_loss);
    }
    result.model = std::move(model);
    return result;
}

int predict(const RealizedModel<double> &layers, const ComplexVector &input, int class_count) {
    auto intensity = detect_intensity(forward_field(layers, input));
    int best = 0;
    for (int c = 1; c < class_count; ++c) {
        if (intensity[static_cast<std::size_t>(c)] > intensity[static_cast<std::size_t>(best)]) {
            best = c;
        }
    }
    return best;
}

double evaluate(const PNNModel &model, const Dataset &data, const EncodingSpec &spec) {
    if (data.size() == 0) {
        return 0.0;
    }
    if (static_cast<std::size_t>(data.class_count) > model.n_outputs()) {
        throw UsageError("dataset has more classes than the model has outputs");
    }
    const auto layers = realize(model);
    const auto inputs = encode_for_model(data, spec, model.n_inputs());
    std::size_t correct = 0;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        if (predict(layers, inputs[s], data.class_count) == data.y[s]) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

TrialSeeds trial_seeds(std::uint64_t s) {
    return {splitmix64(3 * s), splitmix64(3 * s + 1), splitmix64(3 * s + 2)};
}

TrialRecord run_trial(const TrialPlan &plan, const Dataset &data, const EncodingSpec &spec, std::uint64_t seed) {
    TrialRecord rec;
    rec.encoding_id = spec.id.empty() ? spec.default_id() : spec.id;
    rec.pairing_id = spec.pairing.id();
    rec.seed = seed;
    try {
        const auto seeds = trial_seeds(seed);
        auto [train_set, test_set] = split(data, plan.train_fraction, seeds.split);
        PNNModel model = build_model(plan.architecture, spec.input_count(), data.class_count, seeds.model);
        TrainConfig cfg = plan.train;
        cfg.seed = seeds.shuffle;
        auto trained = train(std::move(model), train_set, spec, cfg);
        rec.loss_history = std::move(trained.loss_history);
        rec.final_train_accuracy = evaluate(trained.model, train_set, spec);
        rec.test_accuracy = evaluate(trained.model, test_set, spec);
    } catch (const std::exception &e) {
        rec.failed = true;
        rec.error = e.what();
        rec.final_train_accuracy = NAN;
        rec.test_accuracy = NAN;
    }
    return rec;
}

double EncodingSummary::stderr_test() const {
    std::size_t ok = trials - failed;
    return ok > 0 ? std_test / std::sqrt(static_cast<double>(ok)) : 0.0;
}

std::vector<EncodingSummary> summarize(std::span<const TrialRecord> records,
                                       std::span<const EncodingSpec> encodings) {
    std::vector<EncodingSummary> out;
    for (const auto &spec : encodings) {
        EncodingSummary s;
        s.encoding_id = spec.id.empty() ? spec.default_id() : spec.id;
        s.pairing_id = spec.pairing.id();
        if (std::any_of(out.begin(), out.end(), [&](const EncodingSummary &o) {
                return o.encoding_id == s.encoding_id && o.pairing_id == s.pairing_id;
            })) {
            continue;
        }
        std::vector<double> test;
        double train_sum = 0.0;
        for (const auto &r : records) {
            if (r.encoding_id != s.encoding_id || r.pairing_id != s.pairing_id) {
                continue;
            }
            ++s.trials;
            if (r.failed) {
                ++s.failed;
                continue;
            }
            test.push_back(r.test_accuracy);
            train_sum += r.final_train_accuracy;
        }
        if (!test.empty()) {
            double n = static_cast<double>(test.size());
            double sum = 0.0;
            for (double v : test) {
                sum += v;
            }
            s.mean_test = sum / n;
            s.mean_train = train_sum / n;
            double ss = 0.0;
            for (double v : test) {
                ss += (v - s.mean_test) * (v - s.mean_test);
            }
            s.std_test = test.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            s.min_test = *std::min_element(test.begin(), test.end());
            s.max_test = *std::max_element(test.begin(), test.end());
        }
        out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(), [](const EncodingSummary &a, const EncodingSummary &b) {
        if (a.mean_test != b.mean_test) {
            return a.mean_test > b.mean_test;
        }
        if (a.encoding_id != b.encoding_id) {
            return a.encoding_id < b.encoding_id;
        }
        return a.pairing_id < b.pairing_id;
    });
    return out;
}

TrialStudy run_trials(const TrialPlan &plan, const Dataset &data, std::span<const EncodingSpec> encodings,
                      const std::function<void(const TrialRecord &)> &on_trial) {
    if (plan.n_seeds < 1) {
        throw ValidationError("n_seeds must be at least 1");
    }
    plan.train.validate();
    plan.architecture.validate();
    const std::size_t total = encodings.size() * plan.n_seeds;
    TrialStudy study;
    study.records.resize(total);
    std::atomic<std::size_t> next{0};
    std::mutex report;
    auto worker = [&] {
        for (std::size_t t = next++; t < total; t = next++) {
            const auto &spec = encodings[t / plan.n_seeds];
            std::uint64_t seed = plan.seed_offset + t % plan.n_seeds;
            study.records[t] = run_trial(plan, data, spec, seed);
            if (on_trial) {
                std::lock_guard lock(report);
                on_trial(study.records[t]);
            }
        }
    };
    std::size_t jobs = std::clamp<std::size_t>(plan.jobs, 1, std::max<std::size_t>(total, 1));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < jobs; ++i) {
            pool.emplace_back(worker);
        }
    }
    for (const auto &r : study.records) {
        study.failed += r.failed ? 1 : 0;
    }
    study.summary = summarize(study.records, encodings);
    return study;
}

void write_results_csv(std::ostream &out, std::span<const TrialRecord> records) {
    out << "encoding_id,pairing_id,seed,train_acc,test_acc\n" << std::setprecision(17);
    for (const auto &r : records) {
        out << r.encoding_id << ',' << r.pairing_id << ',' << r.seed << ',' << r.final_train_accuracy << ','
            << r.test_accuracy << '\n';
    }
}

void write_summary_tsv(std::ostream &out, std::span<const EncodingSummary> summary) {
    out << "encoding_id\tpairing_id\tmean_test_acc\tstd_test_acc\tstderr_test_acc\tmin_test_acc\tmax_test_acc\tn\n"
        << std::setprecision(17);
    for (const auto &s : summary) {
        out << s.encoding_id << '\t' << s.pairing_id << '\t' << s.mean_test << '\t' << s.std_test << '\t'
            << s.stderr_test() << '\t' << s.min_test << '\t' << s.max_test << '\t' << (s.trials - s.failed) << '\n';
    }
}

}  // namespace pel
