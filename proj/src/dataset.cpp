#include "pel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "pel/errors.hpp"

namespace pel {

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::iris:
        return "iris";
    case Provenance::nsphere:
        return "nsphere";
    case Provenance::custom:
        return "custom";
    }
    return "custom";
}

void Dataset::refresh_ranges() {
    feature_ranges.clear();
    if (X.empty()) {
        return;
    }
    const std::size_t nf = X.front().size();
    feature_ranges.assign(nf, {INFINITY, -INFINITY});
    for (const auto &row : X) {
        for (std::size_t f = 0; f < nf; ++f) {
            feature_ranges[f].first = std::min(feature_ranges[f].first, row[f]);
            feature_ranges[f].second = std::max(feature_ranges[f].second, row[f]);
        }
    }
}

void Dataset::validate() const {
    if (X.size() != y.size()) {
        throw ValidationError("dataset has " + std::to_string(X.size()) + " samples but " +
                              std::to_string(y.size()) + " labels");
    }
    const std::size_t nf = feature_count();
    for (std::size_t s = 0; s < X.size(); ++s) {
        if (X[s].size() != nf) {
            throw ValidationError("sample " + std::to_string(s) + " has " + std::to_string(X[s].size()) +
                                  " features, expected " + std::to_string(nf));
        }
        for (std::size_t f = 0; f < nf; ++f) {
            if (!std::isfinite(X[s][f])) {
                throw ValidationError("sample " + std::to_string(s) + " feature " + std::to_string(f) +
                                      " is not finite");
            }
        }
        if (y[s] < 0 || y[s] >= class_count) {
            throw ValidationError("sample " + std::to_string(s) + " has label " + std::to_string(y[s]) +
                                  " outside [0, " + std::to_string(class_count) + ")");
        }
    }
    if (!X.empty()) {
        if (feature_ranges.size() != nf) {
            throw ValidationError("feature ranges do not match the feature count");
        }
        for (std::size_t f = 0; f < nf; ++f) {
            for (const auto &row : X) {
                if (row[f] < feature_ranges[f].first || row[f] > feature_ranges[f].second) {
                    throw ValidationError("feature " + std::to_string(f) + " lies outside its recorded range");
                }
            }
        }
    }
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(class_count, 0)), 0);
    for (int label : y) {
        ++counts.at(static_cast<std::size_t>(label));
    }
    return counts;
}

namespace {

std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        out.push_back(trim(field));
    }
    return out;
}

bool parse_double(const std::string &s, double &out) {
    if (s.empty()) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

int iris_class(const std::string &name) {
    std::string n = name;
    if (n.rfind("Iris-", 0) == 0) {
        n = n.substr(5);
    }
    if (n == "setosa") {
        return 0;
    }
    if (n == "versicolor") {
        return 1;
    }
    if (n == "virginica") {
        return 2;
    }
    return -1;
}

}  // namespace

Dataset parse_iris(std::istream &in) {
    Dataset d;
    d.provenance = Provenance::iris;
    d.class_count = 3;
    d.class_names = {"setosa", "versicolor", "virginica"};
    d.feature_names = {"sepal_length", "sepal_width", "petal_length", "petal_width"};
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_csv(line);
        double probe = 0.0;
        if (first && !fields.empty() && !parse_double(fields[0], probe)) {
            // header row
            first = false;
            continue;
        }
        first = false;
        if (fields.size() != 5) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 5 columns, found " +
                             std::to_string(fields.size()));
        }
        std::vector<double> row(4);
        for (std::size_t f = 0; f < 4; ++f) {
            if (!parse_double(fields[f], row[f])) {
                throw ParseError("line " + std::to_string(line_no) + ": column " + std::to_string(f + 1) +
                                 " is not a number: '" + fields[f] + "'");
            }
        }
        int label = iris_class(fields[4]);
        if (label < 0) {
            throw ValidationError("line " + std::to_string(line_no) + ": unknown class label '" + fields[4] + "'");
        }
        d.X.push_back(std::move(row));
        d.y.push_back(label);
    }
    if (d.X.empty()) {
        throw ParseError("no data rows in Iris file");
    }
    d.refresh_ranges();
    d.validate();
    return d;
}

Dataset load_iris(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open Iris file '" + path.string() + "'");
    }
    return parse_iris(in);
}

Dataset gen_nsphere(const NSphereConfig &config) {
    if (config.n_dims < 2) {
        throw ValidationError("n-sphere data needs at least 2 dimensions");
    }
    if (config.n_samples < 2) {
        throw ValidationError("n-sphere data needs at least 2 samples");
    }
    if (!(config.radius_threshold > 0.0)) {
        throw ValidationError("n-sphere radius threshold must be positive");
    }
    Dataset d;
    d.provenance = Provenance::nsphere;
    d.class_count = 2;
    d.class_names = {"outside", "inside"};
    for (std::size_t f = 0; f < config.n_dims; ++f) {
        d.feature_names.push_back("x" + std::to_string(f));
    }
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (std::size_t s = 0; s < config.n_samples; ++s) {
        std::vector<double> row(config.n_dims);
        double sq = 0.0;
        for (auto &v : row) {
            v = unif(rng);
            sq += v * v;
        }
        d.X.push_back(std::move(row));
        d.y.push_back(std::sqrt(sq) < config.radius_threshold ? 1 : 0);
    }
    auto counts = d.class_counts();
    if (counts[0] == 0 || counts[1] == 0) {
        std::ostringstream msg;
        msg << "n-sphere labels are all " << (counts[0] == 0 ? "inside" : "outside") << " for threshold "
            << config.radius_threshold << "; choose a threshold between 0 and sqrt(n_dims) = "
            << std::sqrt(static_cast<double>(config.n_dims));
        throw ValidationError(msg.str());
    }
    d.refresh_ranges();
    return d;
}

Normalized normalize(const Dataset &dataset, NormalizeMode) {
    Normalized out;
    out.data = dataset;
    const std::size_t nf = dataset.feature_count();
    for (std::size_t f = 0; f < nf; ++f) {
        auto [lo, hi] = dataset.feature_ranges.at(f);
        if (!(hi > lo)) {
            std::string name = f < dataset.feature_names.size() ? dataset.feature_names[f] : std::to_string(f);
            throw ValidationError("feature '" + name + "' is constant and cannot be normalized");
        }
        out.scaling.push_back({lo, hi});
    }
    for (auto &row : out.data.X) {
        for (std::size_t f = 0; f < nf; ++f) {
            row[f] = out.scaling[f].apply(row[f]);
        }
    }
    out.data.refresh_ranges();
    return out;
}

void seeded_shuffle(std::vector<std::size_t> &items, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::shuffle(items.begin(), items.end(), rng);
}

std::pair<Dataset, Dataset> split(const Dataset &dataset, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw UsageError("train fraction must lie in (0, 1)");
    }
    Dataset train = dataset;
    Dataset test = dataset;
    train.X.clear();
    train.y.clear();
    test.X.clear();
    test.y.clear();
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.class_count));
    for (std::size_t s = 0; s < dataset.size(); ++s) {
        by_class.at(static_cast<std::size_t>(dataset.y[s])).push_back(s);
    }
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto &members = by_class[c];
        if (members.size() < 2) {
            throw ValidationError("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                                  " samples; stratified splitting needs at least 2");
        }
        seeded_shuffle(members, seed + 0x9e3779b97f4a7c15ULL * (c + 1));
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
        train_idx.insert(train_idx.end(), members.begin(), members.begin() + static_cast<long>(n_train));
        test_idx.insert(test_idx.end(), members.begin() + static_cast<long>(n_train), members.end());
    }
    // Interleave classes in the output order.
    seeded_shuffle(train_idx, seed ^ 0x5bd1e995ULL);
    seeded_shuffle(test_idx, seed ^ 0x1b873593ULL);
    for (std::size_t s : train_idx) {
        train.X.push_back(dataset.X[s]);
        train.y.push_back(dataset.y[s]);
    }
    for (std::size_t s : test_idx) {
        test.X.push_back(dataset.X[s]);
        test.y.push_back(dataset.y[s]);
    }
    return {std::move(train), std::move(test)};
}

void write_dataset_csv(std::ostream &out, const Dataset &dataset) {
    for (std::size_t f = 0; f < dataset.feature_count(); ++f) {
        out << (f < dataset.feature_names.size() ? dataset.feature_names[f] : "x" + std::to_string(f)) << ',';
    }
    out << "label\n" << std::setprecision(17);
    for (std::size_t s = 0; s < dataset.size(); ++s) {
        for (double v : dataset.X[s]) {
            out << v << ',';
        }
        out << dataset.y[s] << '\n';
    }
}

}  // namespace pel
