// pel: run encoding experiments, importance reports and mesh decompositions.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "pel/config.hpp"
#include "pel/importance.hpp"
#include "pel/mesh.hpp"
#include "pel/training.hpp"

namespace fs = std::filesystem;
using namespace pel;

namespace {

struct ExperimentArgs {
    std::string config;
    std::size_t jobs = 0;
    std::uint64_t seed_offset = 0;
    std::string output;
    bool quiet = false;
};

struct ImportanceArgs {
    std::string config;
    std::optional<std::size_t> sweep;
    std::string grid;
    bool map = false;
    std::string output;
};

struct DecomposeArgs {
    std::string matrix_file;
    double tolerance = 1e-8;
};

std::ofstream open_output(const fs::path &file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw UsageError("cannot write '" + file.string() + "'");
    }
    return out;
}

void print_table(std::ostream &out, const TrialStudy &study) {
    out << std::left << std::setw(28) << "encoding" << std::setw(14) << "pairing" << std::right << std::setw(10)
        << "mean" << std::setw(10) << "stderr" << std::setw(8) << "n" << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto &s : study.summary) {
        out << std::left << std::setw(28) << s.encoding_id << std::setw(14) << s.pairing_id << std::right
            << std::setw(10) << s.mean_test << std::setw(10) << s.stderr_test() << std::setw(8)
            << (s.trials - s.failed) << '\n';
    }
    out << study.records.size() << " trials, " << study.failed << " failed\n";
    out.unsetf(std::ios::floatfield);
}

int cmd_experiment(const ExperimentArgs &args) {
    ExperimentConfig config = load_experiment_config(args.config);
    if (!args.output.empty()) {
        config.output_dir = args.output;
    }
    Dataset data = load_dataset(config.dataset);
    auto encodings = fit_encodings(config.encodings, data);

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) {
        throw ConfigError("output_dir", "cannot create '" + config.output_dir.string() + "': " + ec.message());
    }

    TrialPlan plan;
    plan.architecture = config.architecture;
    plan.train = config.train;
    plan.train_fraction = config.train_fraction;
    plan.n_seeds = config.n_seeds;
    plan.seed_offset = args.seed_offset;
    plan.jobs = args.jobs > 0 ? args.jobs : std::max(1u, std::thread::hardware_concurrency());

    std::size_t done = 0;
    const std::size_t total = encodings.size() * plan.n_seeds;
    auto progress = [&](const TrialRecord &r) {
        ++done;
        if (!args.quiet) {
            std::cerr << "\r[" << done << "/" << total << "] " << r.encoding_id << " " << r.pairing_id << " seed "
                      << r.seed << "          " << std::flush;
        }
        if (r.failed) {
            std::cerr << "\ntrial " << r.encoding_id << " " << r.pairing_id << " seed " << r.seed
                      << " failed: " << r.error << '\n';
        }
    };
    TrialStudy study = run_trials(plan, data, encodings, progress);
    if (!args.quiet) {
        std::cerr << '\n';
    }

    {
        auto out = open_output(config.output_dir / "results.csv");
        write_results_csv(out, study.records);
    }
    {
        auto out = open_output(config.output_dir / "summary.json");
        out << summary_to_json(study, config).dump(2) << '\n';
    }
    {
        auto out = open_output(config.output_dir / "plot.tsv");
        write_summary_tsv(out, study.summary);
    }
    print_table(std::cout, study);
    return 0;
}

std::vector<double> parse_grid(const std::string &text) {
    double lo = 0.0;
    double hi = 0.0;
    long steps = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%ld%c", &lo, &hi, &steps, &tail) != 3 || steps < 1 ||
        !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
        throw UsageError("--grid expects lo:hi:steps with lo <= hi and steps >= 1, got '" + text + "'");
    }
    std::vector<double> grid;
    for (long i = 0; i < steps; ++i) {
        grid.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1));
    }
    return grid;
}

int cmd_importance(const ImportanceArgs &args) {
    if (args.map == args.sweep.has_value()) {
        throw UsageError("give exactly one of --sweep and --map");
    }
    if (args.sweep && args.grid.empty()) {
        throw UsageError("--sweep needs --grid lo:hi:steps");
    }
    ImportanceConfig config = load_importance_config(args.config);
    std::optional<Dataset> data;
    if (config.dataset) {
        data = load_dataset(*config.dataset);
    }
    const std::size_t n_features = data ? data->feature_count() : config.n_features;
    EncodingSpec spec;
    if (data) {
        spec = fit_encodings(std::span(&config.encoding, 1), *data).front();
    } else {
        spec = config.encoding.spec;
        if (spec.kind.tag == EncodingTag::independent && spec.pairing.singles.empty()) {
            spec.pairing = FeaturePairing::all_singles(n_features);
        }
        try {
            spec.pairing.validate(n_features);
        } catch (const Error &e) {
            throw ConfigError("encoding", e.what());
        }
    }

    PNNModel model;
    switch (config.model.kind) {
    case ModelSource::Kind::identity:
        model = identity_model(spec.input_count());
        break;
    case ModelSource::Kind::random:
        model = build_model(config.model.architecture, spec.input_count(), data ? data->class_count : 1,
                            config.model.seed);
        break;
    case ModelSource::Kind::file:
        model = load_model(config.model.file);
        if (model.n_inputs() < spec.input_count()) {
            throw ConfigError("model", "model has " + std::to_string(model.n_inputs()) +
                                           " inputs but the encoding produces " +
                                           std::to_string(spec.input_count()));
        }
        break;
    }

    std::ofstream file;
    if (!args.output.empty()) {
        file = open_output(args.output);
    }
    std::ostream &out = args.output.empty() ? std::cout : file;

    if (args.sweep) {
        if (*args.sweep >= n_features) {
            throw UsageError("--sweep axis " + std::to_string(*args.sweep) + " out of range for " +
                             std::to_string(n_features) + " features");
        }
        auto grid = parse_grid(args.grid);
        AxisSweep sweep;
        try {
            sweep = importance_axis_sweep(model, spec, *args.sweep, grid);
        } catch (const DomainError &e) {
            throw UsageError(std::string("grid leaves the encoding domain: ") + e.what());
        }
        write_sweep_tsv(out, sweep);
        std::cerr << sweep.points.size() << " points, " << sweep.skipped.size() << " skipped as non-differentiable\n";
        return 0;
    }

    if (!data) {
        throw ConfigError("dataset", "--map needs a dataset");
    }
    auto map = importance_map(model, spec, data->X);
    write_map_csv(out, map);
    std::size_t flagged = 0;
    for (const auto &f : map) {
        flagged += f.flagged;
    }
    std::cerr << data->size() << " samples, " << flagged << " sentinel (non-differentiable) feature evaluations\n";
    return 0;
}

int cmd_decompose(const DecomposeArgs &args) {
    ComplexMatrix u = matrix_from_json(read_json_file(args.matrix_file));
    MeshDecomposition dec;
    try {
        dec = clements_decompose(u, args.tolerance);
    } catch (const NonUnitaryError &e) {
        std::cout << e.what() << '\n';
        throw;
    }
    ComplexMatrix rebuilt = mesh_matrix(dec.layout, dec.phases);
    double error = frobenius_distance(rebuilt, u);
    Json doc = decomposition_to_json(dec);
    doc["reconstruction_error"] = error;
    std::cout << doc.dump(2) << '\n';
    if (!(error < 1e-8)) {
        throw NumericError("reconstruction error " + std::to_string(error) + " exceeds 1e-8");
    }
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Photonic neural network encoding experiments"};
    app.require_subcommand(1);

    ExperimentArgs exp;
    auto *experiment = app.add_subcommand("experiment", "Train every configured encoding over a range of seeds");
    experiment->add_option("--config", exp.config, "Experiment config (JSON)")->required();
    experiment->add_option("--jobs", exp.jobs, "Parallel trials (default: number of processors)");
    experiment->add_option("--seed-offset", exp.seed_offset, "First trial seed");
    experiment->add_option("--output", exp.output, "Output directory (overrides output_dir)");
    experiment->add_flag("--quiet", exp.quiet, "No progress on stderr");

    ImportanceArgs imp;
    auto *importance = app.add_subcommand("importance", "Feature importance sweep or map");
    importance->add_option("--config", imp.config, "Importance config (JSON)")->required();
    auto *sweep = importance->add_option("--sweep", imp.sweep, "Sweep feature j along its own axis");
    importance->add_option("--grid", imp.grid, "Sweep grid lo:hi:steps");
    auto *map = importance->add_flag("--map", imp.map, "Mean importance per feature over the dataset");
    sweep->excludes(map);
    importance->add_option("--output", imp.output, "Write to this file instead of stdout");

    DecomposeArgs dec;
    auto *decompose = app.add_subcommand("decompose", "Clements decomposition of a unitary");
    decompose->add_option("matrix_file", dec.matrix_file, "JSON array of rows of [re, im] pairs")->required();
    decompose->add_option("--tolerance", dec.tolerance, "Unitarity tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return static_cast<int>(ExitCode::usage);
    }

    try {
        if (*experiment) {
            return cmd_experiment(exp);
        }
        if (*importance) {
            return cmd_importance(imp);
        }
        return cmd_decompose(dec);
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::numeric);
    }
}
