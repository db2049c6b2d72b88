#include "pel/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "pel/mesh.hpp"

namespace pel {

namespace {

// Read-only view of a JSON value that remembers where it came from, so every
// diagnostic names the offending field.
class Node {
  public:
    Node(const Json &value, std::string path) : value_(&value), path_(std::move(path)) {}

    const std::string &path() const { return path_; }
    const Json &json() const { return *value_; }

    [[noreturn]] void fail(const std::string &what) const {
        throw ConfigError(path_.empty() ? "(root)" : path_, what);
    }

    void expect_object() const {
        if (!value_->is_object()) {
            fail("expected an object");
        }
    }

    bool has(const std::string &key) const { return value_->is_object() && value_->contains(key); }

    Node at(const std::string &key) const {
        expect_object();
        auto it = value_->find(key);
        if (it == value_->end()) {
            throw ConfigError(child_path(key), "required field is missing");
        }
        return Node(*it, child_path(key));
    }

    std::optional<Node> find(const std::string &key) const {
        expect_object();
        auto it = value_->find(key);
        if (it == value_->end() || it->is_null()) {
            return std::nullopt;
        }
        return Node(*it, child_path(key));
    }

    std::size_t size() const {
        if (!value_->is_array()) {
            fail("expected an array");
        }
        return value_->size();
    }

    Node operator[](std::size_t i) const {
        if (!value_->is_array() || i >= value_->size()) {
            fail("expected an array with at least " + std::to_string(i + 1) + " entries");
        }
        return Node((*value_)[i], path_ + "[" + std::to_string(i) + "]");
    }

    double number() const {
        if (!value_->is_number()) {
            fail("expected a number");
        }
        double v = value_->get<double>();
        if (!std::isfinite(v)) {
            fail("expected a finite number");
        }
        return v;
    }

    std::uint64_t unsigned_integer() const {
        if (!value_->is_number_integer() || (value_->is_number_integer() && !value_->is_number_unsigned() &&
                                             value_->get<std::int64_t>() < 0)) {
            fail("expected a nonnegative integer");
        }
        return value_->get<std::uint64_t>();
    }

    std::string string() const {
        if (!value_->is_string()) {
            fail("expected a string");
        }
        return value_->get<std::string>();
    }

    bool boolean() const {
        if (!value_->is_boolean()) {
            fail("expected true or false");
        }
        return value_->get<bool>();
    }

    std::vector<double> numbers() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i) {
            out.push_back((*this)[i].number());
        }
        return out;
    }

    ComplexValue complex() const {
        if (size() != 2) {
            fail("expected a [re, im] pair");
        }
        return {(*this)[0].number(), (*this)[1].number()};
    }

    // Only the listed keys may appear.
    void allow(std::initializer_list<const char *> keys) const {
        expect_object();
        for (const auto &item : value_->items()) {
            bool known = false;
            for (const char *k : keys) {
                known = known || item.key() == k;
            }
            if (!known) {
                throw ConfigError(child_path(item.key()), "unknown field");
            }
        }
    }

  private:
    std::string child_path(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json *value_;
    std::string path_;
};

// Translates a parse failure of an enum-like string into a config diagnostic.
template <class F>
auto parse_field(const Node &node, F &&parse) {
    std::string text = node.string();
    try {
        return parse(text);
    } catch (const Error &e) {
        node.fail(e.what());
    }
}

Json mesh_json(std::size_t n, std::span<const double> block) {
    std::size_t k = clements_mzi_count(n);
    Json mzi = Json::array();
    for (std::size_t i = 0; i < k; ++i) {
        mzi.push_back(Json::array({block[2 * i], block[2 * i + 1]}));
    }
    Json out = Json::array();
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(block[2 * k + i]);
    }
    return {{"ports", n}, {"mzi", mzi}, {"output_phases", out}};
}

void read_mesh(const Node &node, std::size_t n, std::span<double> block) {
    node.allow({"ports", "mzi", "output_phases"});
    if (node.at("ports").unsigned_integer() != n) {
        node.at("ports").fail("expected " + std::to_string(n) + " ports");
    }
    std::size_t k = clements_mzi_count(n);
    Node mzi = node.at("mzi");
    if (mzi.size() != k) {
        mzi.fail("expected " + std::to_string(k) + " [theta, phi] pairs");
    }
    for (std::size_t i = 0; i < k; ++i) {
        auto tp = mzi[i].numbers();
        if (tp.size() != 2) {
            mzi[i].fail("expected [theta, phi]");
        }
        block[2 * i] = tp[0];
        block[2 * i + 1] = tp[1];
    }
    auto out = node.at("output_phases").numbers();
    if (out.size() != n) {
        node.at("output_phases").fail("expected " + std::to_string(n) + " phases");
    }
    std::copy(out.begin(), out.end(), block.begin() + static_cast<long>(2 * k));
}

std::filesystem::path resolve(const std::filesystem::path &p, const std::filesystem::path &base) {
    if (p.is_absolute() || base.empty()) {
        return p;
    }
    return base / p;
}

}  // namespace

// Models ---------------------------------------------------------------------

Json model_to_json(const PNNModel &model) {
    Json layers = Json::array();
    for (std::size_t l = 0; l < model.depth(); ++l) {
        const auto &layer = model.layers()[l];
        const auto &spec = layer.spec;
        auto p = model.params();
        auto w = p.subspan(layer.offset, layer.weight_count());
        Json doc = {{"kind", to_string(spec.kind)}, {"n_in", spec.n_in}, {"n_out", spec.n_out}};
        switch (spec.kind) {
        case LayerKind::free_matrix: {
            Json rows = Json::array();
            for (std::size_t r = 0; r < spec.n_out; ++r) {
                Json row = Json::array();
                for (std::size_t c = 0; c < spec.n_in; ++c) {
                    std::size_t idx = 2 * (r * spec.n_in + c);
                    row.push_back(Json::array({w[idx], w[idx + 1]}));
                }
                rows.push_back(row);
            }
            doc["weights"] = rows;
            break;
        }
        case LayerKind::unitary_mesh:
            doc["mesh"] = mesh_json(spec.n_out, w);
            break;
        case LayerKind::svd_mesh: {
            std::size_t u_len = 2 * clements_mzi_count(spec.n_out) + spec.n_out;
            std::size_t s_len = std::min(spec.n_out, spec.n_in);
            doc["u"] = mesh_json(spec.n_out, w.subspan(0, u_len));
            doc["gains"] = std::vector<double>(w.begin() + static_cast<long>(u_len),
                                               w.begin() + static_cast<long>(u_len + s_len));
            doc["v_dagger"] = mesh_json(spec.n_in, w.subspan(u_len + s_len));
            break;
        }
        }
        Json bias = Json::array();
        for (std::size_t i = 0; i < spec.n_out; ++i) {
            bias.push_back(Json::array({p[layer.bias_offset() + 2 * i], p[layer.bias_offset() + 2 * i + 1]}));
        }
        doc["bias"] = bias;
        doc["activation"] = {{"type", to_string(spec.activation)}};
        if (spec.activation == ActivationKind::modrelu) {
            doc["activation"]["b"] = p[layer.activation_offset()];
        }
        layers.push_back(doc);
    }
    return {{"n_inputs", model.n_inputs()}, {"detection", to_string(model.detection())}, {"layers", layers}};
}

PNNModel model_from_json(const Json &doc, const std::string &path) {
    Node root(doc, path);
    root.allow({"n_inputs", "detection", "layers"});
    Detection detection = parse_field(root.at("detection"), parse_detection);
    Node layers_node = root.at("layers");
    if (layers_node.size() == 0) {
        layers_node.fail("a model needs at least one layer");
    }
    std::vector<LayerSpec> specs;
    for (std::size_t l = 0; l < layers_node.size(); ++l) {
        Node ln = layers_node[l];
        LayerSpec spec;
        spec.kind = parse_field(ln.at("kind"), parse_layer_kind);
        spec.n_in = ln.at("n_in").unsigned_integer();
        spec.n_out = ln.at("n_out").unsigned_integer();
        spec.activation = parse_field(ln.at("activation").at("type"), parse_activation);
        specs.push_back(spec);
    }
    std::size_t n_inputs = root.at("n_inputs").unsigned_integer();
    if (n_inputs != specs.front().n_in) {
        root.at("n_inputs").fail("does not match the first layer's n_in");
    }
    PNNModel model = [&] {
        try {
            return PNNModel(specs, detection);
        } catch (const Error &e) {
            layers_node.fail(e.what());
        }
    }();
    auto params = model.params();
    for (std::size_t l = 0; l < layers_node.size(); ++l) {
        Node ln = layers_node[l];
        const auto &layer = model.layers()[l];
        const auto &spec = layer.spec;
        auto w = params.subspan(layer.offset, layer.weight_count());
        switch (spec.kind) {
        case LayerKind::free_matrix: {
            ln.allow({"kind", "n_in", "n_out", "weights", "bias", "activation"});
            Node rows = ln.at("weights");
            if (rows.size() != spec.n_out) {
                rows.fail("expected " + std::to_string(spec.n_out) + " rows");
            }
            for (std::size_t r = 0; r < spec.n_out; ++r) {
                if (rows[r].size() != spec.n_in) {
                    rows[r].fail("expected " + std::to_string(spec.n_in) + " entries");
                }
                for (std::size_t c = 0; c < spec.n_in; ++c) {
                    auto z = rows[r][c].complex();
                    w[2 * (r * spec.n_in + c)] = z.re;
                    w[2 * (r * spec.n_in + c) + 1] = z.im;
                }
            }
            break;
        }
        case LayerKind::unitary_mesh:
            ln.allow({"kind", "n_in", "n_out", "mesh", "bias", "activation"});
            read_mesh(ln.at("mesh"), spec.n_out, w);
            break;
        case LayerKind::svd_mesh: {
            ln.allow({"kind", "n_in", "n_out", "u", "gains", "v_dagger", "bias", "activation"});
            std::size_t u_len = 2 * clements_mzi_count(spec.n_out) + spec.n_out;
            std::size_t s_len = std::min(spec.n_out, spec.n_in);
            read_mesh(ln.at("u"), spec.n_out, w.subspan(0, u_len));
            auto gains = ln.at("gains").numbers();
            if (gains.size() != s_len) {
                ln.at("gains").fail("expected " + std::to_string(s_len) + " gains");
            }
            for (std::size_t k = 0; k < s_len; ++k) {
                if (gains[k] < 0.0 || gains[k] > svd_gain_max) {
                    ln.at("gains")[k].fail("gain must lie in [0, 1]");
                }
                w[u_len + k] = gains[k];
            }
            read_mesh(ln.at("v_dagger"), spec.n_in, w.subspan(u_len + s_len));
            break;
        }
        }
        Node bias = ln.at("bias");
        if (bias.size() != spec.n_out) {
            bias.fail("expected " + std::to_string(spec.n_out) + " [re, im] pairs");
        }
        for (std::size_t i = 0; i < spec.n_out; ++i) {
            auto z = bias[i].complex();
            params[layer.bias_offset() + 2 * i] = z.re;
            params[layer.bias_offset() + 2 * i + 1] = z.im;
        }
        Node act = ln.at("activation");
        if (spec.activation == ActivationKind::modrelu) {
            act.allow({"type", "b"});
            params[layer.activation_offset()] = act.at("b").number();
        } else {
            act.allow({"type"});
        }
    }
    return model;
}

void save_model(const std::filesystem::path &file, const PNNModel &model) {
    std::ofstream out(file);
    if (!out) {
        throw UsageError("cannot write model file '" + file.string() + "'");
    }
    out << model_to_json(model).dump(2) << '\n';
}

PNNModel load_model(const std::filesystem::path &file) { return model_from_json(read_json_file(file)); }

PNNModel identity_model(std::size_t ports) {
    PNNModel model({{LayerKind::free_matrix, ports, ports, ActivationKind::identity}}, Detection::field);
    auto p = model.params();
    for (std::size_t i = 0; i < ports; ++i) {
        p[2 * (i * ports + i)] = 1.0;
    }
    return model;
}

// Encodings ------------------------------------------------------------------

Json encoding_to_json(const EncodingEntry &entry) {
    const auto &spec = entry.spec;
    Json doc = {{"kind", to_string(spec.kind.tag)}};
    if (!spec.id.empty()) {
        doc["id"] = spec.id;
    }
    if (spec.kind.tag == EncodingTag::engineered_radial) {
        doc["beta"] = spec.kind.beta;
    }
    if (spec.kind.is_hardware()) {
        doc["arcsin_premap"] = spec.kind.arcsin_premap;
    }
    Json pairs = Json::array();
    for (const auto &[j, k] : spec.pairing.pairs) {
        pairs.push_back(Json::array({j, k}));
    }
    doc["pairing"] = pairs;
    doc["singles"] = spec.pairing.singles;
    if (entry.rule.mode == PrescaleRule::Mode::none) {
        doc["prescale"] = {{"mode", "none"}};
    } else {
        doc["prescale"] = {{"mode", "minmax"}, {"phase_range", {entry.rule.phase_lo, entry.rule.phase_hi}}};
    }
    return doc;
}

EncodingEntry encoding_from_json(const Json &doc, const std::string &path) {
    Node node(doc, path);
    node.allow({"id", "kind", "beta", "arcsin_premap", "pairing", "singles", "prescale"});
    EncodingEntry entry;
    auto &spec = entry.spec;
    spec.kind.tag = parse_field(node.at("kind"), parse_encoding_tag);
    if (auto id = node.find("id")) {
        spec.id = id->string();
    }
    if (auto beta = node.find("beta")) {
        if (spec.kind.tag != EncodingTag::engineered_radial) {
            beta->fail("beta only applies to engineered_radial");
        }
        spec.kind.beta = beta->number();
    }
    if (auto premap = node.find("arcsin_premap")) {
        if (!spec.kind.is_hardware()) {
            premap->fail("arcsin_premap only applies to hw_linear and hw_exponential");
        }
        spec.kind.arcsin_premap = premap->boolean();
    }
    if (auto pairs = node.find("pairing")) {
        for (std::size_t i = 0; i < pairs->size(); ++i) {
            Node p = (*pairs)[i];
            if (p.size() != 2) {
                p.fail("expected a [j, k] feature pair");
            }
            spec.pairing.pairs.emplace_back(p[0].unsigned_integer(), p[1].unsigned_integer());
        }
    }
    if (auto singles = node.find("singles")) {
        for (std::size_t i = 0; i < singles->size(); ++i) {
            spec.pairing.singles.push_back((*singles)[i].unsigned_integer());
        }
    }
    if (spec.kind.tag == EncodingTag::independent && !spec.pairing.pairs.empty()) {
        node.at("pairing").fail("the independent encoding takes singles only");
    }
    if (spec.kind.tag != EncodingTag::independent && spec.pairing.pairs.empty()) {
        node.fail("a combining encoding needs at least one feature pair");
    }
    if (auto pre = node.find("prescale")) {
        pre->allow({"mode", "phase_range"});
        std::string mode = pre->at("mode").string();
        if (mode == "none") {
            entry.rule.mode = PrescaleRule::Mode::none;
        } else if (mode == "minmax") {
            entry.rule.mode = PrescaleRule::Mode::minmax;
        } else {
            pre->at("mode").fail("expected \"minmax\" or \"none\"");
        }
        if (auto range = pre->find("phase_range")) {
            auto r = range->numbers();
            if (r.size() != 2 || !(r[1] > r[0])) {
                range->fail("expected [lo, hi] with lo < hi");
            }
            entry.rule.phase_lo = r[0];
            entry.rule.phase_hi = r[1];
        }
    }
    return entry;
}

// Datasets -------------------------------------------------------------------

Json dataset_config_to_json(const DatasetConfig &config) {
    if (config.source == DatasetConfig::Source::iris) {
        Json doc = {{"type", "iris"}};
        if (config.path) {
            doc["path"] = config.path->string();
        }
        return doc;
    }
    const auto &n = config.nsphere;
    return {{"type", "nsphere"},
            {"n_dims", n.n_dims},
            {"n_samples", n.n_samples},
            {"radius_threshold", n.radius_threshold},
            {"seed", n.seed}};
}

DatasetConfig dataset_config_from_json(const Json &doc, const std::string &path,
                                       const std::filesystem::path &base_dir) {
    Node node(doc, path);
    DatasetConfig config;
    std::string type = node.at("type").string();
    if (type == "iris") {
        node.allow({"type", "path"});
        config.source = DatasetConfig::Source::iris;
        if (auto p = node.find("path")) {
            config.path = resolve(p->string(), base_dir);
        }
    } else if (type == "nsphere") {
        node.allow({"type", "n_dims", "n_samples", "radius_threshold", "seed"});
        config.source = DatasetConfig::Source::nsphere;
        auto &n = config.nsphere;
        if (auto v = node.find("n_dims")) {
            n.n_dims = v->unsigned_integer();
        }
        if (auto v = node.find("n_samples")) {
            n.n_samples = v->unsigned_integer();
        }
        if (auto v = node.find("radius_threshold")) {
            n.radius_threshold = v->number();
        }
        if (auto v = node.find("seed")) {
            n.seed = v->unsigned_integer();
        }
    } else {
        node.at("type").fail("expected \"iris\" or \"nsphere\"");
    }
    return config;
}

Dataset load_dataset(const DatasetConfig &config) {
    if (config.source == DatasetConfig::Source::nsphere) {
        return gen_nsphere(config.nsphere);
    }
    std::filesystem::path file;
    if (config.path) {
        file = *config.path;
    } else if (const char *env = std::getenv(iris_path_env)) {
        file = env;
    } else {
        throw ConfigError("dataset.path", std::string("no Iris path given and ") + iris_path_env + " is not set");
    }
    if (!std::filesystem::exists(file)) {
        throw ConfigError("dataset.path", "file '" + file.string() + "' does not exist");
    }
    return load_iris(file);
}

std::vector<EncodingSpec> fit_encodings(std::span<const EncodingEntry> entries, const Dataset &data) {
    std::vector<EncodingSpec> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string path = "encodings[" + std::to_string(i) + "]";
        EncodingSpec spec = entries[i].spec;
        if (spec.kind.tag == EncodingTag::independent && spec.pairing.singles.empty()) {
            spec.pairing = FeaturePairing::all_singles(data.feature_count());
        }
        try {
            spec.pairing.validate(data.feature_count());
            fit_prescale(spec, data.feature_ranges, entries[i].rule);
        } catch (const Error &e) {
            throw ConfigError(path, e.what());
        }
        out.push_back(std::move(spec));
    }
    return out;
}

// Experiment -----------------------------------------------------------------

Json architecture_to_json(const ArchitectureConfig &arch) {
    Json doc = {{"depth", arch.depth},
                {"kind", to_string(arch.kind)},
                {"hidden_activation", to_string(arch.hidden_activation)},
                {"output_activation", to_string(arch.output_activation)},
                {"detection", to_string(arch.detection)},
                {"activation_bias", arch.activation_bias},
                {"svd_gain", arch.svd_gain}};
    if (arch.ports) {
        doc["ports"] = *arch.ports;
    }
    return doc;
}

ArchitectureConfig architecture_from_json(const Json &doc, const std::string &path) {
    Node node(doc, path);
    node.allow({"ports", "depth", "kind", "hidden_activation", "output_activation", "detection", "activation_bias",
                "svd_gain"});
    ArchitectureConfig arch;
    if (auto v = node.find("ports")) {
        arch.ports = v->unsigned_integer();
    }
    if (auto v = node.find("depth")) {
        arch.depth = v->unsigned_integer();
    }
    if (auto v = node.find("kind")) {
        arch.kind = parse_field(*v, parse_layer_kind);
    }
    if (auto v = node.find("hidden_activation")) {
        arch.hidden_activation = parse_field(*v, parse_activation);
    }
    if (auto v = node.find("output_activation")) {
        arch.output_activation = parse_field(*v, parse_activation);
    }
    if (auto v = node.find("detection")) {
        arch.detection = parse_field(*v, parse_detection);
    }
    if (auto v = node.find("activation_bias")) {
        arch.activation_bias = v->number();
    }
    if (auto v = node.find("svd_gain")) {
        arch.svd_gain = v->number();
    }
    try {
        arch.validate();
    } catch (const Error &e) {
        node.fail(e.what());
    }
    return arch;
}

Json train_config_to_json(const TrainConfig &config) {
    Json opt = {{"kind", config.optimizer.kind == OptimizerKind::adam ? "adam" : "sgd"}};
    if (config.optimizer.kind == OptimizerKind::adam) {
        opt["beta1"] = config.optimizer.beta1;
        opt["beta2"] = config.optimizer.beta2;
        opt["epsilon"] = config.optimizer.epsilon;
    }
    return {{"epochs", config.epochs},
            {"learning_rate", config.learning_rate},
            {"batch_size", config.batch_size},
            {"optimizer", opt},
            {"loss", config.loss}};
}

TrainConfig train_config_from_json(const Json &doc, const std::string &path) {
    Node node(doc, path);
    node.allow({"epochs", "learning_rate", "batch_size", "optimizer", "loss"});
    TrainConfig config;
    if (auto v = node.find("epochs")) {
        config.epochs = v->unsigned_integer();
    }
    if (auto v = node.find("learning_rate")) {
        config.learning_rate = v->number();
    }
    if (auto v = node.find("batch_size")) {
        config.batch_size = v->unsigned_integer();
    }
    if (auto v = node.find("loss")) {
        config.loss = v->string();
    }
    if (auto v = node.find("optimizer")) {
        Node opt = *v;
        std::string kind = opt.json().is_string() ? opt.string() : opt.at("kind").string();
        if (kind == "adam") {
            config.optimizer.kind = OptimizerKind::adam;
        } else if (kind == "sgd") {
            config.optimizer.kind = OptimizerKind::sgd;
        } else {
            opt.fail("expected \"adam\" or \"sgd\"");
        }
        if (opt.json().is_object()) {
            opt.allow({"kind", "beta1", "beta2", "epsilon"});
            if (auto b = opt.find("beta1")) {
                config.optimizer.beta1 = b->number();
            }
            if (auto b = opt.find("beta2")) {
                config.optimizer.beta2 = b->number();
            }
            if (auto b = opt.find("epsilon")) {
                config.optimizer.epsilon = b->number();
            }
        }
    }
    try {
        config.validate();
    } catch (const Error &e) {
        node.fail(e.what());
    }
    return config;
}

Json experiment_config_to_json(const ExperimentConfig &config) {
    Json encodings = Json::array();
    for (const auto &e : config.encodings) {
        encodings.push_back(encoding_to_json(e));
    }
    return {{"dataset", dataset_config_to_json(config.dataset)},
            {"encodings", encodings},
            {"architecture", architecture_to_json(config.architecture)},
            {"train", train_config_to_json(config.train)},
            {"train_fraction", config.train_fraction},
            {"n_seeds", config.n_seeds},
            {"output_dir", config.output_dir.string()}};
}

ExperimentConfig experiment_config_from_json(const Json &doc, const std::filesystem::path &base_dir) {
    Node root(doc, "");
    root.allow({"dataset", "encodings", "architecture", "train", "train_fraction", "n_seeds", "output_dir"});
    ExperimentConfig config;
    config.dataset = dataset_config_from_json(root.at("dataset").json(), "dataset", base_dir);
    Node enc = root.at("encodings");
    if (enc.size() == 0) {
        enc.fail("list at least one encoding");
    }
    for (std::size_t i = 0; i < enc.size(); ++i) {
        config.encodings.push_back(encoding_from_json(enc[i].json(), enc[i].path()));
    }
    if (auto v = root.find("architecture")) {
        config.architecture = architecture_from_json(v->json(), "architecture");
    }
    if (auto v = root.find("train")) {
        config.train = train_config_from_json(v->json(), "train");
    }
    if (auto v = root.find("train_fraction")) {
        config.train_fraction = v->number();
        if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
            v->fail("must lie in (0, 1)");
        }
    }
    config.n_seeds = root.at("n_seeds").unsigned_integer();
    if (config.n_seeds == 0) {
        root.at("n_seeds").fail("must be at least 1");
    }
    if (auto v = root.find("output_dir")) {
        config.output_dir = v->string();
        if (config.output_dir.empty()) {
            v->fail("must not be empty");
        }
    }
    return config;
}

Json read_json_file(const std::filesystem::path &file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError(file.string(), "cannot open file");
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error &e) {
        throw ConfigError(file.string(), std::string("invalid JSON: ") + e.what());
    }
}

ExperimentConfig load_experiment_config(const std::filesystem::path &file) {
    return experiment_config_from_json(read_json_file(file), file.parent_path());
}

// Importance -----------------------------------------------------------------

ImportanceConfig importance_config_from_json(const Json &doc, const std::filesystem::path &base_dir) {
    Node root(doc, "");
    root.allow({"dataset", "encoding", "model", "n_features"});
    ImportanceConfig config;
    if (auto v = root.find("dataset")) {
        config.dataset = dataset_config_from_json(v->json(), "dataset", base_dir);
    }
    config.encoding = encoding_from_json(root.at("encoding").json(), "encoding");
    if (auto v = root.find("n_features")) {
        config.n_features = v->unsigned_integer();
    }
    if (!config.dataset && config.encoding.rule.mode == PrescaleRule::Mode::minmax) {
        root.at("encoding").fail("a minmax prescale needs a dataset; set prescale.mode to \"none\" or add one");
    }
    if (!config.dataset && config.n_features == 0) {
        config.n_features = config.encoding.spec.pairing.feature_count();
    }
    if (auto v = root.find("model")) {
        Node m = *v;
        std::string type = m.at("type").string();
        if (type == "identity") {
            m.allow({"type"});
            config.model.kind = ModelSource::Kind::identity;
        } else if (type == "random") {
            m.allow({"type", "architecture", "seed"});
            config.model.kind = ModelSource::Kind::random;
            if (auto a = m.find("architecture")) {
                config.model.architecture = architecture_from_json(a->json(), m.path() + ".architecture");
            }
            if (auto s = m.find("seed")) {
                config.model.seed = s->unsigned_integer();
            }
        } else if (type == "file") {
            m.allow({"type", "path"});
            config.model.kind = ModelSource::Kind::file;
            config.model.file = resolve(m.at("path").string(), base_dir);
        } else {
            m.at("type").fail("expected \"identity\", \"random\" or \"file\"");
        }
    }
    return config;
}

ImportanceConfig load_importance_config(const std::filesystem::path &file) {
    return importance_config_from_json(read_json_file(file), file.parent_path());
}

// Result files -----------------------------------------------------------------

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json summary_to_json(const TrialStudy &study, const ExperimentConfig &config) {
    Json rows = Json::array();
    for (const auto &s : study.summary) {
        rows.push_back({{"encoding_id", s.encoding_id},
                        {"pairing_id", s.pairing_id},
                        {"trials", s.trials},
                        {"failed", s.failed},
                        {"mean_test_acc", number_or_null(s.mean_test)},
                        {"std_test_acc", number_or_null(s.std_test)},
                        {"stderr_test_acc", number_or_null(s.stderr_test())},
                        {"min_test_acc", number_or_null(s.min_test)},
                        {"max_test_acc", number_or_null(s.max_test)},
                        {"mean_train_acc", number_or_null(s.mean_train)}});
    }
    return {{"trials", study.records.size()},
            {"failed", study.failed},
            {"encodings", rows},
            {"config", experiment_config_to_json(config)}};
}

SummaryFile summary_from_json(const Json &doc) {
    Node root(doc, "summary");
    SummaryFile out;
    out.trials = root.at("trials").unsigned_integer();
    out.failed = root.at("failed").unsigned_integer();
    Node rows = root.at("encodings");
    auto num = [](const Node &n) { return n.json().is_null() ? NAN : n.number(); };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Node r = rows[i];
        EncodingSummary s;
        s.encoding_id = r.at("encoding_id").string();
        s.pairing_id = r.at("pairing_id").string();
        s.trials = r.at("trials").unsigned_integer();
        s.failed = r.at("failed").unsigned_integer();
        s.mean_test = num(r.at("mean_test_acc"));
        s.std_test = num(r.at("std_test_acc"));
        s.min_test = num(r.at("min_test_acc"));
        s.max_test = num(r.at("max_test_acc"));
        s.mean_train = num(r.at("mean_train_acc"));
        out.encodings.push_back(s);
    }
    return out;
}

std::vector<TrialRecord> read_results_csv(std::istream &in) {
    std::vector<TrialRecord> out;
    std::string line;
    std::size_t line_no = 0;
    auto parse_number = [&](const std::string &s) {
        if (s == "nan") {
            return static_cast<double>(NAN);
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used != s.size() || s.empty()) {
            throw ParseError("results line " + std::to_string(line_no) + ": '" + s + "' is not a number");
        }
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "encoding_id,pairing_id,seed,train_acc,test_acc") {
                throw ParseError("results file has an unexpected header");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (f.size() != 5) {
            throw ParseError("results line " + std::to_string(line_no) + ": expected 5 columns");
        }
        TrialRecord r;
        r.encoding_id = f[0];
        r.pairing_id = f[1];
        r.seed = std::stoull(f[2]);
        r.final_train_accuracy = parse_number(f[3]);
        r.test_accuracy = parse_number(f[4]);
        r.failed = std::isnan(r.test_accuracy);
        out.push_back(std::move(r));
    }
    return out;
}

Json decomposition_to_json(const MeshDecomposition &dec) {
    Json mzis = Json::array();
    for (std::size_t i = 0; i < dec.layout.mzi_count(); ++i) {
        const auto &place = dec.layout.placements[i];
        mzis.push_back({{"column", place.column},
                        {"ports", {place.top_port, place.top_port + 1}},
                        {"theta", dec.phases[i].theta},
                        {"phi", dec.phases[i].phi}});
    }
    return {{"n", dec.layout.n}, {"mzis", mzis}, {"output_phases", dec.layout.output_phases}};
}

ComplexMatrix matrix_from_json(const Json &doc) {
    Node root(doc, "matrix");
    std::size_t n = root.size();
    if (n == 0) {
        root.fail("matrix is empty");
    }
    ComplexMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        if (root[r].size() != n) {
            root[r].fail("expected " + std::to_string(n) + " entries (square matrix)");
        }
        for (std::size_t c = 0; c < n; ++c) {
            m(r, c) = root[r][c].complex();
        }
    }
    return m;
}

}  // namespace pel
