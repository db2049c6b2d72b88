#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace pel {

enum class Provenance { iris, nsphere, custom };

std::string to_string(Provenance p);

struct Dataset {
    std::vector<std::vector<double>> X;  // samples x features
    std::vector<int> y;
    std::vector<std::pair<double, double>> feature_ranges;  // (min, max) per feature
    int class_count = 0;
    Provenance provenance = Provenance::custom;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;

    std::size_t size() const { return X.size(); }
    std::size_t feature_count() const { return X.empty() ? feature_ranges.size() : X.front().size(); }

    /// Recomputes feature_ranges from X.
    void refresh_ranges();
    /// Labels in range, finite entries, consistent shapes and ranges.
    void validate() const;
    std::vector<std::size_t> class_counts() const;
};

/// Environment variable consulted for the Iris CSV location.
inline constexpr const char *iris_path_env = "PEL_IRIS_PATH";

/// Reads the Iris CSV (4 numeric columns + species name, optional header).
/// Species names with or without an "Iris-" prefix are accepted.
Dataset load_iris(const std::filesystem::path &path);
Dataset parse_iris(std::istream &in);

struct NSphereConfig {
    std::size_t n_dims = 4;
    std::size_t n_samples = 1000;
    /// Median of ||x|| for x uniform on [-1, 1]^4: balances the classes at n = 4.
    double radius_threshold = 1.139216816500281;
    std::uint64_t seed = 0;
};

/// Uniform samples on [-1, 1]^n; label 1 iff ||x||_2 < radius_threshold.
Dataset gen_nsphere(const NSphereConfig &config);

/// Affine map of one feature onto [-1, 1], recorded for inversion.
struct FeatureScaling {
    double min = 0.0;
    double max = 1.0;

    double apply(double v) const { return (v - min) / (max - min) * 2.0 - 1.0; }
    double invert(double u) const { return (u + 1.0) / 2.0 * (max - min) + min; }
};

struct Normalized {
    Dataset data;
    std::vector<FeatureScaling> scaling;
};

enum class NormalizeMode { minmax_symmetric };

Normalized normalize(const Dataset &dataset, NormalizeMode mode = NormalizeMode::minmax_symmetric);

/// Stratified, seeded split. Per class, round(train_fraction * count) samples
/// go to the training set.
std::pair<Dataset, Dataset> split(const Dataset &dataset, double train_fraction, std::uint64_t seed);

/// Same CSV shape as the Iris loader, with numeric labels.
void write_dataset_csv(std::ostream &out, const Dataset &dataset);

/// Deterministic Fisher-Yates shuffle driven by a 64-bit Mersenne Twister.
void seeded_shuffle(std::vector<std::size_t> &items, std::uint64_t seed);

}  // namespace pel
