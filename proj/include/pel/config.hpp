#pragma once

// JSON documents: serialized models, experiment and importance configs, and
// readers for the files the experiment runner writes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pel/dataset.hpp"
#include "pel/encoding.hpp"
#include "pel/model.hpp"
#include "pel/training.hpp"

namespace pel {

using Json = nlohmann::json;

// Models ---------------------------------------------------------------------

/// {"n_inputs", "detection", "layers": [{kind, n_in, n_out, weights | mesh |
/// u/gains/v_dagger, bias, activation}]}. Doubles are written in the shortest
/// form that parses back to the same bits.
Json model_to_json(const PNNModel &model);
PNNModel model_from_json(const Json &doc, const std::string &path = "model");
void save_model(const std::filesystem::path &file, const PNNModel &model);
PNNModel load_model(const std::filesystem::path &file);

/// Square free-matrix identity network with field detection.
PNNModel identity_model(std::size_t ports);

// Encodings ------------------------------------------------------------------

struct EncodingEntry {
    EncodingSpec spec;  // prescale left empty until fitted
    PrescaleRule rule;
};

Json encoding_to_json(const EncodingEntry &entry);
EncodingEntry encoding_from_json(const Json &doc, const std::string &path);

// Datasets -------------------------------------------------------------------

struct DatasetConfig {
    enum class Source { iris, nsphere } source = Source::iris;
    std::optional<std::filesystem::path> path;  // iris; falls back to PEL_IRIS_PATH
    NSphereConfig nsphere;
};

Json dataset_config_to_json(const DatasetConfig &config);
DatasetConfig dataset_config_from_json(const Json &doc, const std::string &path,
                                       const std::filesystem::path &base_dir = {});
Dataset load_dataset(const DatasetConfig &config);

/// Fits every entry's prescale against the dataset's feature ranges and
/// checks the pairing covers the dataset's features.
std::vector<EncodingSpec> fit_encodings(std::span<const EncodingEntry> entries, const Dataset &data);

// Experiment -----------------------------------------------------------------

struct ExperimentConfig {
    DatasetConfig dataset;
    std::vector<EncodingEntry> encodings;
    ArchitectureConfig architecture;
    TrainConfig train;
    double train_fraction = 0.8;
    std::size_t n_seeds = 1;
    std::filesystem::path output_dir = "results";
};

Json architecture_to_json(const ArchitectureConfig &arch);
ArchitectureConfig architecture_from_json(const Json &doc, const std::string &path);
Json train_config_to_json(const TrainConfig &config);
TrainConfig train_config_from_json(const Json &doc, const std::string &path);

Json experiment_config_to_json(const ExperimentConfig &config);
/// Relative dataset paths are resolved against `base_dir`.
ExperimentConfig experiment_config_from_json(const Json &doc, const std::filesystem::path &base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path &file);

/// Parses a JSON file, reporting syntax errors as ConfigError.
Json read_json_file(const std::filesystem::path &file);

// Importance -----------------------------------------------------------------

struct ModelSource {
    enum class Kind { identity, random, file } kind = Kind::identity;
    ArchitectureConfig architecture;  // random
    std::uint64_t seed = 0;           // random
    std::filesystem::path file;       // file
};

struct ImportanceConfig {
    std::optional<DatasetConfig> dataset;
    EncodingEntry encoding;
    ModelSource model;
    std::size_t n_features = 0;  // used when no dataset is given
};

ImportanceConfig importance_config_from_json(const Json &doc, const std::filesystem::path &base_dir = {});
ImportanceConfig load_importance_config(const std::filesystem::path &file);

// Result files -----------------------------------------------------------------

Json summary_to_json(const TrialStudy &study, const ExperimentConfig &config);

struct SummaryFile {
    std::size_t trials = 0;
    std::size_t failed = 0;
    std::vector<EncodingSummary> encodings;
};
SummaryFile summary_from_json(const Json &doc);

std::vector<TrialRecord> read_results_csv(std::istream &in);

/// Writes a unitary's phase schedule as JSON.
Json decomposition_to_json(const MeshDecomposition &dec);

/// n x n complex matrix stored as rows of [re, im] pairs.
ComplexMatrix matrix_from_json(const Json &doc);

}  // namespace pel
