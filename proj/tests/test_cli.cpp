#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "argos/io.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using namespace argos;
using io::Json;

namespace {

struct Result {
    int status = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "argos");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.status = cli::run(int(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "argos_test_cli" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::size_t file_count(const fs::path& d) {
    return std::size_t(std::distance(fs::directory_iterator(d), fs::directory_iterator()));
}

// Every CSV and JSON artifact re-serialises to the same bytes.
void check_round_trip(const fs::path& dir) {
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string text = io::read_file(entry.path());
        const auto ext = entry.path().extension();
        if (ext == ".csv") {
            CHECK(io::to_csv(io::parse_csv(text)) == text);
        } else if (ext == ".json") {
            CHECK(io::dump(Json::parse(text)) == text);
        } else if (ext == ".jsonl") {
            CHECK(io::to_jsonl(io::parse_jsonl(text)) == text);
        }
    }
}

}  // namespace

TEST_CASE("identify example finds x1 and x2") {
    const fs::path d = fresh_dir("identify");
    const Result r = run({"identify", "--system", "linear2d", "--n", "1000", "--snr", "49", "--method", "lasso",
                          "--seed", "7", "--out", d.string()});
    REQUIRE(r.status == 0);
    const Json model = Json::parse(io::read_file(d / "model.json"));
    std::vector<std::string> names;
    for (const auto& [name, term] : model.at("equations")[0].at("terms").items()) names.push_back(name);
    CHECK(names == std::vector<std::string>{"x1", "x2"});
    CHECK(model.at("config").at("seed") == 7);
    CHECK(model.at("master_seed") == 7);
    CHECK(model.at("provenance").at("snr_db") == 49);
    CHECK(fs::exists(d / "residuals_x1.csv"));
    CHECK(fs::exists(d / "residuals_x2.meta.json"));
    check_round_trip(d);
}

TEST_CASE("simulate is byte-identical across runs; identify reads it back") {
    const fs::path a = fresh_dir("sim_a");
    const fs::path b = fresh_dir("sim_b");
    for (const auto& d : {a, b}) {
        REQUIRE(run({"simulate", "--system", "lorenz", "--n", "100", "--seed", "1", "--out", d.string()}).status == 0);
    }
    const std::string csv = io::read_file(a / "trajectory.csv");
    CHECK(csv == io::read_file(b / "trajectory.csv"));
    CHECK(io::parse_csv(csv).rows.size() == 100);
    const Json side = Json::parse(io::read_file(a / "trajectory.json"));
    CHECK(side.at("system") == "lorenz");
    CHECK(side.at("snr_db") == 49);
    CHECK(side.at("config").at("n") == 100);
    check_round_trip(a);

    const fs::path c = fresh_dir("sim_identify");
    REQUIRE(run({"simulate", "--system", "linear2d", "--n", "400", "--seed", "3", "--out", c.string()}).status == 0);
    const fs::path out = c / "model";
    const Result r = run({"identify", "--input", (c / "trajectory.csv").string(), "--bootstrap", "50", "--seed", "3",
                          "--out", out.string()});
    REQUIRE(r.status == 0);
    const Json model = Json::parse(io::read_file(out / "model.json"));
    CHECK(model.at("provenance").at("snr_db") == 49);
    CHECK(model.at("provenance").at("n") == 400);
    CHECK(model.at("provenance").at("dt") == doctest::Approx(0.01));
}

TEST_CASE("sweep-snr over the default grid writes 22 axis rows") {
    const fs::path d = fresh_dir("sweep_snr");
    const Result r = run({"sweep-snr", "--system", "linear2d", "--seeds", "1", "--n", "100", "--bootstrap", "5",
                          "--master-seed", "4", "--out", d.string()});
    REQUIRE(r.status == 0);
    const auto summary = io::parse_csv(io::read_file(d / "sweep_snr_summary.csv"));
    CHECK(summary.header == std::vector<std::string>{"axis_value", "success_rate", "n_seeds"});
    REQUIRE(summary.rows.size() == 22);
    CHECK(summary.rows.front()[0] == "1");
    CHECK(summary.rows[20][0] == "61");
    CHECK(summary.rows.back()[0] == "inf");
    const auto records = io::parse_jsonl(io::read_file(d / "sweep_snr_records.jsonl"));
    CHECK(records.size() == 22);
    const Json meta = Json::parse(io::read_file(d / "sweep_snr_records.meta.json"));
    CHECK(meta.at("master_seed") == 4);
    CHECK(meta.at("config").at("n") == 100);
    check_round_trip(d);
}

TEST_CASE("sweep-n with an explicit grid and timing") {
    const fs::path d = fresh_dir("sweep_n");
    REQUIRE(run({"sweep-n", "--system", "linear2d", "--seeds", "2", "--grid", "150,200", "--bootstrap", "5", "--out",
                 d.string()})
                .status == 0);
    const auto freq = io::parse_csv(io::read_file(d / "sweep_n_frequency.csv"));
    CHECK(freq.header == std::vector<std::string>{"axis_value", "equation", "term", "count", "is_correct"});
    CHECK(io::parse_csv(io::read_file(d / "sweep_n_summary.csv")).rows.size() == 2);
    CHECK(io::parse_csv(io::read_file(d / "sweep_n_wall_times.csv")).rows.size() == 4);
    check_round_trip(d);

    const fs::path t = fresh_dir("timing");
    REQUIRE(run({"timing", "--system", "linear2d", "--reps", "2", "--grid", "100,150", "--bootstrap", "5", "--out",
                 t.string()})
                .status == 0);
    CHECK(io::parse_csv(io::read_file(t / "timing.csv")).rows.size() == 4);
    CHECK(Json::parse(io::read_file(t / "timing_fit.json")).contains("slope"));
    check_round_trip(t);
    CHECK(run({"timing", "--system", "duffing", "--out", t.string()}).status == 2);
}

TEST_CASE("errors are one JSON line with nonzero exit and no leftovers") {
    const fs::path d = fresh_dir("errors");
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"simulate", "--system", "pendulum", "--out", d.string()},
             {"simulate", "--system", "lorenz", "--n", "5", "--out", d.string()},
             {"identify", "--system", "lorenz", "--method", "ridge", "--out", d.string()},
             {"identify", "--system", "lorenz", "--d", "11", "--out", d.string()},
             {"identify", "--input", (d / "missing.csv").string(), "--out", d.string()},
             {"simulate", "--bogus"},
             {"simulate", "--system", "lorenz", "--snr", "loud", "--out", d.string()},
         }) {
        const Result r = run(args);
        CHECK(r.status == 2);
        REQUIRE(!r.err.empty());
        CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
        const Json j = Json::parse(r.err);
        CHECK(j.contains("error"));
        CHECK(j.contains("message"));
    }
    CHECK(file_count(d) == 0);

    // a runtime failure (too few rows for cross-validation) removes what was written
    const fs::path in = fresh_dir("short_input");
    REQUIRE(run({"simulate", "--system", "linear2d", "--n", "15", "--out", in.string()}).status == 0);
    const fs::path out = fresh_dir("short_output");
    const Result r = run({"identify", "--input", (in / "trajectory.csv").string(), "--out", out.string()});
    CHECK(r.status == 1);
    CHECK(Json::parse(r.err).contains("error"));
    CHECK(file_count(out) == 0);
}

TEST_CASE("config file precedence and validation") {
    const fs::path d = fresh_dir("config");
    io::write_file(d / "cfg.json", R"({"system": "duffing", "n": 50, "seed": 2})");
    REQUIRE(run({"simulate", "--config", (d / "cfg.json").string(), "--out", (d / "a").string()}).status == 0);
    CHECK(io::parse_csv(io::read_file(d / "a" / "trajectory.csv")).rows.size() == 50);
    CHECK(Json::parse(io::read_file(d / "a" / "trajectory.json")).at("system") == "duffing");

    REQUIRE(run({"simulate", "--config", (d / "cfg.json").string(), "--n", "60", "--out", (d / "b").string()}).status ==
            0);
    CHECK(io::parse_csv(io::read_file(d / "b" / "trajectory.csv")).rows.size() == 60);

    io::write_file(d / "bad.json", R"({"system": "duffing", "colour": "red"})");
    const Result bad = run({"simulate", "--config", (d / "bad.json").string(), "--out", (d / "c").string()});
    CHECK(bad.status == 2);
    CHECK(Json::parse(bad.err).contains("error"));

    io::write_file(d / "broken.json", "{not json");
    CHECK(run({"simulate", "--config", (d / "broken.json").string(), "--out", (d / "c").string()}).status == 2);
}

TEST_CASE("output directory from the environment") {
    const fs::path d = fresh_dir("env");
    ::setenv("ARGOS_OUTPUT_DIR", d.string().c_str(), 1);
    const Result r = run({"simulate", "--system", "linear2d", "--n", "30"});
    ::unsetenv("ARGOS_OUTPUT_DIR");
    CHECK(r.status == 0);
    CHECK(fs::exists(d / "trajectory.csv"));
}

TEST_CASE("version and help") {
    const Result v = run({"--version"});
    CHECK(v.status == 0);
    CHECK(v.out.rfind("argos ", 0) == 0);
    const Result h = run({"--help"});
    CHECK(h.status == 0);
    CHECK(h.out.find("sweep-snr") != std::string::npos);
}
