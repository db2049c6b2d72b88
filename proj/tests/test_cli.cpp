#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pel/config.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using pel::Json;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "pel_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path &file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const fs::path &file, const std::string &text) {
    std::ofstream out(file, std::ios::binary);
    out << text;
}

Run pel_run(const std::string &args) {
    auto out = scratch() / "stdout.txt";
    std::string cmd = std::string("\"") + PEL_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
    int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    return r;
}

std::size_t line_count(const std::string &text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("cli: experiment writes results and reruns byte-identically") {
    auto doc = pel::read_json_file(PEL_SOURCE_DIR "/configs/nsphere-demo.json");
    doc["dataset"]["n_samples"] = 200;
    doc["train"]["epochs"] = 5;
    doc["output_dir"] = "first";
    auto cfg = scratch() / "demo.json";
    write(cfg, doc.dump(2));

    auto a = pel_run("experiment --quiet --jobs 2 --config " + cfg.string() + " --output " + (scratch() / "a").string());
    REQUIRE(a.status == 0);
    CHECK(a.out.find("40 trials, 0 failed") != std::string::npos);
    auto results = slurp(scratch() / "a" / "results.csv");
    CHECK(line_count(results) == 41);
    CHECK(fs::exists(scratch() / "a" / "summary.json"));
    CHECK(fs::exists(scratch() / "a" / "plot.tsv"));
    auto summary = pel::summary_from_json(pel::read_json_file(scratch() / "a" / "summary.json"));
    CHECK(summary.trials == 40);
    CHECK(summary.encodings.size() == 4);

    auto b = pel_run("experiment --quiet --jobs 1 --config " + cfg.string() + " --output " + (scratch() / "b").string());
    REQUIRE(b.status == 0);
    CHECK(slurp(scratch() / "b" / "results.csv") == results);
    // summaries differ only in the recorded output_dir
    auto ja = pel::read_json_file(scratch() / "a" / "summary.json");
    auto jb = pel::read_json_file(scratch() / "b" / "summary.json");
    CHECK(ja["config"]["output_dir"] != jb["config"]["output_dir"]);
    ja["config"].erase("output_dir");
    jb["config"].erase("output_dir");
    CHECK(ja.dump() == jb.dump());
    CHECK(slurp(scratch() / "b" / "plot.tsv") == slurp(scratch() / "a" / "plot.tsv"));
}

TEST_CASE("cli: configuration errors exit 2") {
    auto cfg = scratch() / "iris_missing.json";
    write(cfg, R"({"dataset": {"type": "iris", "path": "nowhere.csv"},
                   "encodings": [{"kind": "independent"}], "n_seeds": 1})");
    CHECK(pel_run("experiment --quiet --config " + cfg.string()).status == 2);
    CHECK(pel_run("experiment --quiet --config " + (scratch() / "absent.json").string()).status == 2);
    CHECK(pel_run("experiment").status == 2);
    CHECK(pel_run("transmogrify").status == 2);
    CHECK(pel_run("--help").status == 0);
}

TEST_CASE("cli: importance sweep and map") {
    auto cfg = scratch() / "imp.json";
    write(cfg, R"({"encoding": {"kind": "linear", "pairing": [[0, 1]], "prescale": {"mode": "none"}},
                   "model": {"type": "identity"}})");
    auto r = pel_run("importance --config " + cfg.string() + " --sweep 0 --grid -1:1:5");
    REQUIRE(r.status == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);  // header
    int rows = 0;
    while (std::getline(in, line)) {
        auto tab = line.rfind('\t');
        CHECK(std::stod(line.substr(tab + 1)) == 1.0);
        ++rows;
    }
    CHECK(rows == 5);

    CHECK(pel_run("importance --config " + cfg.string() + " --sweep 0 --grid -1:1:5 --map").status == 2);
    CHECK(pel_run("importance --config " + cfg.string() + " --sweep 0").status == 2);

    auto hw = scratch() / "hw.json";
    write(hw, R"({"encoding": {"kind": "hw_linear", "pairing": [[0, 1]], "prescale": {"mode": "none"}}})");
    CHECK(pel_run("importance --config " + hw.string() + " --sweep 0 --grid -2:2:5").status == 2);

    auto map = pel_run("importance --config " PEL_SOURCE_DIR "/configs/importance-exponential-iris.json --map");
    CHECK(map.status == 0);
    CHECK(line_count(map.out) == 5);
}

TEST_CASE("cli: decompose") {
    auto id = scratch() / "id2.json";
    write(id, "[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]");
    auto r = pel_run("decompose " + id.string());
    REQUIRE(r.status == 0);
    auto doc = Json::parse(r.out);
    CHECK(doc["reconstruction_error"].get<double>() < 1e-10);

    auto ones = scratch() / "ones.json";
    write(ones, "[[[1, 0], [1, 0]], [[1, 0], [1, 0]]]");
    CHECK(pel_run("decompose " + ones.string()).status == 3);

    testing::Rng rng(77);
    auto u = testing::haar_unitary(6, rng);
    Json m = Json::array();
    for (const auto &row : u) {
        Json jr = Json::array();
        for (auto z : row) {
            jr.push_back({z.real(), z.imag()});
        }
        m.push_back(jr);
    }
    auto haar = scratch() / "haar6.json";
    write(haar, m.dump());
    auto h = pel_run("decompose " + haar.string());
    REQUIRE(h.status == 0);
    auto hd = Json::parse(h.out);
    CHECK(hd["mzis"].size() == 15);
    CHECK(hd["reconstruction_error"].get<double>() < 1e-8);
}
