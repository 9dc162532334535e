#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "argos/bench.hpp"
#include "argos/error.hpp"
#include "argos/io.hpp"
#include "argos/pipeline.hpp"
#include "argos/rng.hpp"
#include "argos/systems.hpp"

#ifndef ARGOS_VERSION
#define ARGOS_VERSION "unknown"
#endif
#ifndef ARGOS_BUILD_TYPE
#define ARGOS_BUILD_TYPE "unknown"
#endif

namespace argos::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

// Raw option values; an option counts as given when its CLI11 count is
// nonzero or the config file sets it.
struct Options {
    std::string system, method, input, out, grid, snr, config;
    long long n = 0;
    double dt = 0.0;
    std::uint64_t seed = 0, master_seed = 0;
    int seeds = 0, d = 0, jobs = 0, bootstrap = 0, reps = 0;
};

struct Resolved {
    std::string command;
    std::optional<SystemId> system;
    sparse::Method method = sparse::Method::Lasso;
    std::string input;
    fs::path out;
    Index n = 0;
    double dt = 0.0;  // 0: system default / inferred
    double snr_db = 49.0;
    bool snr_given = false;
    std::uint64_t seed = 0;
    std::uint64_t master_seed = 0;
    int seeds = 20;
    int d = 5;
    int jobs = 1;
    int bootstrap = 2000;
    int reps = 30;
    std::string grid;
};

std::string version_text() {
    std::ostringstream s;
    s << "argos " << ARGOS_VERSION << " (" << ARGOS_BUILD_TYPE << ", " <<
#if defined(__clang__)
        "clang " << __clang_version__
#elif defined(__GNUC__)
        "gcc " << __VERSION__
#else
        "unknown compiler"
#endif
      << ", C++ " << __cplusplus << ")";
    return s.str();
}

void error_line(std::ostream& err, const std::string& code, const std::string& message) {
    Json j;
    j["error"] = code;
    j["message"] = message;
    err << j.dump() << '\n';
}

// Parses "a,b,c" into numbers; "inf" allowed.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::size_t p = 0;
    while (p <= text.size()) {
        const std::size_t q = text.find(',', p);
        const std::string cell = text.substr(p, q == std::string::npos ? std::string::npos : q - p);
        if (cell.empty()) throw InvalidArgument("--grid: empty entry in '" + text + "'");
        out.push_back(io::parse_number(cell));
        if (q == std::string::npos) break;
        p = q + 1;
    }
    return out;
}

std::vector<Index> integer_grid(const std::string& text) {
    std::vector<Index> out;
    for (double v : parse_grid(text)) {
        if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
            throw InvalidArgument("--grid: n values must be positive integers");
        }
        out.push_back(static_cast<Index>(v));
    }
    return out;
}

template <typename T>
T json_value(const Json& file, const char* key) {
    try {
        return file.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

Resolved resolve(const std::string& command, const Options& o, const CLI::App& sub) {
    Json file = Json::object();
    if (sub.count("--config")) {
        try {
            file = Json::parse(io::read_file(o.config));
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument("config: " + std::string(e.what()));
        }
        if (!file.is_object()) throw InvalidArgument("config: top level must be an object");
        static const std::vector<std::string> known = {"system", "method", "input", "out", "n", "dt", "snr",
                                                       "seed", "master_seed", "seeds", "d", "jobs",
                                                       "bootstrap", "reps", "grid"};
        for (const auto& [k, v] : file.items()) {
            if (std::find(known.begin(), known.end(), k) == known.end()) {
                throw InvalidArgument("config: unknown key '" + k + "'");
            }
        }
    }
    auto given = [&](const char* flag) { return sub.get_option_no_throw(flag) && sub.count(flag) > 0; };
    auto in_file = [&](const char* key) { return file.contains(key); };

    Resolved r;
    r.command = command;
    auto pick_string = [&](const char* flag, const char* key, const std::string& flag_value,
                           const std::string& fallback) -> std::string {
        if (given(flag)) return flag_value;
        if (in_file(key)) return json_value<std::string>(file, key);
        return fallback;
    };
    const std::string system = pick_string("--system", "system", o.system, "");
    if (!system.empty()) r.system = parse_system_id(system);
    r.method = parse_method(pick_string("--method", "method", o.method, "lasso"));
    r.input = pick_string("--input", "input", o.input, "");
    const char* env_out = std::getenv("ARGOS_OUTPUT_DIR");
    r.out = pick_string("--out", "out", o.out, env_out && *env_out ? env_out : ".");
    r.grid = pick_string("--grid", "grid", o.grid, "");

    auto pick = [&](const char* flag, const char* key, auto flag_value, auto fallback) {
        using T = decltype(fallback);
        if (given(flag)) return static_cast<T>(flag_value);
        if (in_file(key)) return json_value<T>(file, key);
        return fallback;
    };
    const Index default_n = command == "sweep-snr" ? 5000 : 1000;
    r.n = pick("--n", "n", o.n, static_cast<long long>(default_n));
    r.dt = pick("--dt", "dt", o.dt, 0.0);
    r.seed = pick("--seed", "seed", o.seed, std::uint64_t{0});
    r.master_seed = pick("--master-seed", "master_seed", o.master_seed, std::uint64_t{0});
    r.seeds = pick("--seeds", "seeds", o.seeds, 20);
    r.d = pick("--d", "d", o.d, 5);
    r.jobs = pick("--jobs", "jobs", o.jobs, 1);
    r.bootstrap = pick("--bootstrap", "bootstrap", o.bootstrap, 2000);
    r.reps = pick("--reps", "reps", o.reps, 30);
    if (given("--snr")) {
        r.snr_db = io::parse_number(o.snr);
        r.snr_given = true;
    } else if (in_file("snr")) {
        r.snr_db = io::number_from_json(file.at("snr"));
        r.snr_given = true;
    }

    // validation happens before any work starts
    const bool needs_system = command != "identify" || r.input.empty();
    if (needs_system && !r.system) throw InvalidArgument(command + ": --system is required");
    if (command == "timing" && r.system != SystemId::Linear2D && r.system != SystemId::Lorenz) {
        throw InvalidArgument("timing: --system must be linear2d or lorenz");
    }
    if (r.n < 13) throw InvalidArgument("--n must be at least 13");
    if (!(r.dt >= 0.0) || !std::isfinite(r.dt)) throw InvalidArgument("--dt must be positive");
    if (std::isnan(r.snr_db)) throw InvalidArgument("--snr must be a number or inf");
    if (r.seeds < 1) throw InvalidArgument("--seeds must be positive");
    if (r.d < 1 || r.d > 10) throw InvalidArgument("--d must be between 1 and 10");
    if (r.jobs < 1) throw InvalidArgument("--jobs must be positive");
    if (r.bootstrap < 1) throw InvalidArgument("--bootstrap must be positive");
    if (r.reps < 1) throw InvalidArgument("--reps must be positive");
    if (!r.input.empty() && !fs::exists(r.input)) throw InvalidArgument("--input: no such file " + r.input);
    if (!r.grid.empty()) parse_grid(r.grid);
    return r;
}

Json config_json(const Resolved& r) {
    Json j;
    j["command"] = r.command;
    if (r.system) j["system"] = to_string(*r.system);
    const bool sweep = r.command == "sweep-n" || r.command == "sweep-snr" || r.command == "timing";
    if (r.command != "simulate") j["method"] = to_string(r.method);
    if (!r.input.empty()) j["input"] = r.input;
    if (r.command != "sweep-n" && r.command != "timing") j["n"] = r.n;
    j["dt"] = r.dt > 0.0 ? io::number_json(r.dt) : Json("default");
    if (r.command != "sweep-snr") j["snr_db"] = io::number_json(r.snr_db);
    if (!sweep) j["seed"] = r.seed;
    if (r.command == "sweep-n" || r.command == "sweep-snr") j["seeds"] = r.seeds;
    if (r.command == "timing") j["reps"] = r.reps;
    if (r.command != "simulate") {
        j["d"] = r.d;
        j["bootstrap"] = r.bootstrap;
    }
    if (!r.grid.empty()) j["grid"] = r.grid;
    j["jobs"] = r.command == "timing" ? 1 : r.jobs;
    j["master_seed"] = sweep ? r.master_seed : r.seed;
    j["version"] = ARGOS_VERSION;
    return j;
}

// Collects written files so a failed run can remove them.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, std::string_view contents) {
        const fs::path p = dir_ / name;
        written_.push_back(p);
        io::write_file(p, contents);
    }

    void csv(const std::string& stem, const io::CsvTable& table, const Json& config) {
        write(stem + ".csv", io::to_csv(table));
        meta(stem, config);
    }

    void meta(const std::string& stem, const Json& config) {
        Json m;
        m["config"] = config;
        m["master_seed"] = config.at("master_seed");
        write(stem + ".meta.json", io::dump(m));
    }

    void rollback() noexcept {
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        written_.clear();
    }

    const std::vector<fs::path>& written() const { return written_; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

struct Simulated {
    SystemDescriptor descriptor;
    Trajectory clean;
    MatrixXd noisy;
    double dt = 0.0;
};

Simulated simulate(const Resolved& r) {
    Simulated s;
    s.descriptor = make_system(*r.system);
    s.dt = r.dt > 0.0 ? r.dt : s.descriptor.default_dt;
    const StateVector x0 = sample_initial_conditions(s.descriptor, 1, r.seed).front();
    s.clean = integrate(s.descriptor, x0, static_cast<std::size_t>(r.n), s.dt);
    s.clean.seed = r.seed;
    s.noisy = add_noise(s.clean.states, NoiseSpec{r.snr_db, derive_seed(r.seed, {tag("noise")})});
    return s;
}

void run_simulate(const Resolved& r, Outputs& out) {
    const Simulated s = simulate(r);
    const Json config = config_json(r);
    out.write("trajectory.csv", io::to_csv(io::trajectory_table(s.clean.times, s.noisy)));
    Json side = io::trajectory_sidecar(s.descriptor, s.dt, r.seed, r.snr_db);
    side["config"] = config;
    side["master_seed"] = config.at("master_seed");
    out.write("trajectory.json", io::dump(side));
}

void run_identify(const Resolved& r, Outputs& out, std::ostream& log) {
    MatrixXd states;
    double dt = r.dt;
    double snr = r.snr_db;
    if (!r.input.empty()) {
        const io::TrajectoryData data = io::trajectory_from_table(io::parse_csv(io::read_file(r.input)));
        states = data.states;
        if (dt == 0.0) dt = io::infer_dt(data.times);
        if (!r.snr_given) {
            snr = std::numeric_limits<double>::infinity();
            const fs::path side = fs::path(r.input).replace_extension(".json");
            if (fs::exists(side)) {
                const Json j = Json::parse(io::read_file(side));
                if (j.contains("snr_db")) snr = io::number_from_json(j.at("snr_db"));
            }
        }
    } else {
        const Simulated s = simulate(r);
        states = s.noisy;
        dt = s.dt;
    }
    PipelineOptions options;
    options.method = r.method;
    options.max_degree = r.d;
    options.bootstrap_samples = r.bootstrap;
    options.seed = r.seed;
    options.workers = r.jobs;
    IdentifiedSystem sys = identify_system(states, dt, options);
    sys.provenance.snr_db = snr;

    const Json config = config_json(r);
    Json model = io::to_json(sys);
    model["config"] = config;
    model["master_seed"] = config.at("master_seed");
    out.write("model.json", io::dump(model));
    for (std::size_t j = 0; j < sys.equations.size(); ++j) {
        out.csv("residuals_x" + std::to_string(j + 1), io::residual_table(sys.equations[j]), config);
    }
    for (std::size_t j = 0; j < sys.equations.size(); ++j) {
        log << "x" << j + 1 << "' =";
        const auto& eq = sys.equations[j];
        if (eq.support.empty()) log << " 0";
        for (Index k : eq.support) {
            log << ' ' << io::format_number(eq.coefficients[k]) << '*' << eq.term_names[static_cast<std::size_t>(k)];
        }
        log << '\n';
    }
}

void write_sweep(const std::string& prefix, const bench::SweepSummary& s, const Json& config, Outputs& out,
                 std::ostream& log) {
    out.csv(prefix + "_summary", io::summary_table(s), config);
    out.csv(prefix + "_frequency", io::frequency_table(s), config);
    out.write(prefix + "_records.jsonl", io::to_jsonl(s.records));
    out.meta(prefix + "_records", config);
    out.csv(prefix + "_wall_times", io::wall_time_table(s), config);
    for (const auto& rec : s.records) {
        if (!rec.error.empty()) {
            log << "run n=" << rec.n << " snr=" << io::format_number(rec.snr_db) << " seed=" << rec.seed
                << " failed: " << rec.error << '\n';
        }
    }
    for (std::size_t g = 0; g < s.grid.size(); ++g) {
        log << bench::to_string(s.axis) << '=' << io::format_number(s.grid[g]) << " success "
            << io::format_number(s.success_rate[g]) << " (" << s.n_seeds[g] << " seeds)\n";
    }
}

bench::SweepOptions sweep_options(const Resolved& r) {
    bench::SweepOptions o;
    o.system = *r.system;
    o.method = r.method;
    o.seeds = r.seeds;
    o.master_seed = r.master_seed;
    o.jobs = r.jobs;
    o.bootstrap_samples = r.bootstrap;
    o.max_degree = r.d;
    o.dt = r.dt;
    return o;
}

void run_timing(const Resolved& r, Outputs& out, std::ostream& log) {
    const auto grid = r.grid.empty() ? bench::default_timing_grid() : integer_grid(r.grid);
    const bench::TimingResult t =
        bench::timing_run(*r.system, r.method, grid, r.reps, r.master_seed, r.bootstrap, r.snr_db);
    const Json config = config_json(r);
    out.csv("timing", io::timing_table(t), config);
    out.csv("timing_quantiles", io::timing_quantile_table(t), config);
    Json fit = io::timing_fit_json(t.fit);
    fit["config"] = config;
    fit["master_seed"] = config.at("master_seed");
    out.write("timing_fit.json", io::dump(fit));
    log << "slope " << io::format_number(t.fit.slope) << " [" << io::format_number(t.fit.slope_lo) << ", "
        << io::format_number(t.fit.slope_hi) << "]\n";
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "JSON file with option values (flags take precedence)");
    sub->add_option("--out", o.out, "output directory (default $ARGOS_OUTPUT_DIR or .)");
    sub->add_option("--system", o.system, "linear2d, linear3d, cubic2d, lotka-volterra, rossler, lorenz, vanderpol, duffing");
    sub->add_option("--dt", o.dt, "time step (default: the system's)");
    sub->add_option("--snr", o.snr, "signal-to-noise ratio in dB, or inf");
}

void add_pipeline(CLI::App* sub, Options& o) {
    sub->add_option("--method", o.method, "lasso or alasso");
    sub->add_option("--d", o.d, "maximum monomial degree (default 5)");
    sub->add_option("--bootstrap", o.bootstrap, "bootstrap samples (default 2000)");
    sub->add_option("--jobs", o.jobs, "worker threads (default 1)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse ODE identification from noisy trajectories"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_text());
    Options o;

    auto* simulate_cmd = app.add_subcommand("simulate", "integrate a benchmark system and write a trajectory CSV");
    add_common(simulate_cmd, o);
    simulate_cmd->add_option("--n", o.n, "number of samples (default 1000)");
    simulate_cmd->add_option("--seed", o.seed, "seed for the initial condition and noise");

    auto* identify_cmd = app.add_subcommand("identify", "identify a model from a trajectory CSV or a fresh simulation");
    add_common(identify_cmd, o);
    add_pipeline(identify_cmd, o);
    identify_cmd->add_option("--input", o.input, "trajectory CSV with header t,x1,...,xm");
    identify_cmd->add_option("--n", o.n, "samples when simulating inline (default 1000)");
    identify_cmd->add_option("--seed", o.seed, "seed for simulation and pipeline");

    auto* sweep_n_cmd = app.add_subcommand("sweep-n", "success rate over time-series length");
    add_common(sweep_n_cmd, o);
    add_pipeline(sweep_n_cmd, o);
    sweep_n_cmd->add_option("--seeds", o.seeds, "initial conditions per grid value (default 20)");
    sweep_n_cmd->add_option("--master-seed", o.master_seed, "root of every random stream");
    sweep_n_cmd->add_option("--grid", o.grid, "comma-separated n values (default 10^2..10^5 in steps of 10^0.1)");

    auto* sweep_snr_cmd = app.add_subcommand("sweep-snr", "success rate over noise level");
    add_common(sweep_snr_cmd, o);
    add_pipeline(sweep_snr_cmd, o);
    sweep_snr_cmd->add_option("--n", o.n, "samples per run (default 5000)");
    sweep_snr_cmd->add_option("--seeds", o.seeds, "initial conditions per grid value (default 20)");
    sweep_snr_cmd->add_option("--master-seed", o.master_seed, "root of every random stream");
    sweep_snr_cmd->add_option("--grid", o.grid, "comma-separated SNR values in dB, inf allowed (default 1,4,...,61,inf)");

    auto* timing_cmd = app.add_subcommand("timing", "single-thread wall time of identification over n");
    add_common(timing_cmd, o);
    add_pipeline(timing_cmd, o);
    timing_cmd->add_option("--reps", o.reps, "repetitions per n (default 30)");
    timing_cmd->add_option("--master-seed", o.master_seed, "root of every random stream");
    timing_cmd->add_option("--grid", o.grid, "comma-separated n values (default 10^2..10^5 in steps of 10^0.5)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << version_text() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        error_line(err, "invalid-argument", e.what());
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    Resolved r;
    try {
        r = resolve(command, o, *sub);
    } catch (const Error& e) {
        error_line(err, e.code(), e.what());
        return 2;
    }

    Outputs outputs(r.out);
    try {
        if (command == "simulate") {
            run_simulate(r, outputs);
        } else if (command == "identify") {
            run_identify(r, outputs, out);
        } else if (command == "sweep-n") {
            const auto grid = r.grid.empty() ? bench::default_n_grid() : integer_grid(r.grid);
            write_sweep("sweep_n", bench::sweep_n(sweep_options(r), grid, r.snr_db), config_json(r), outputs, out);
        } else if (command == "sweep-snr") {
            const auto grid = r.grid.empty() ? bench::default_snr_grid() : parse_grid(r.grid);
            write_sweep("sweep_snr", bench::sweep_snr(sweep_options(r), grid, r.n), config_json(r), outputs, out);
        } else if (command == "timing") {
            run_timing(r, outputs, out);
        }
    } catch (const Error& e) {
        outputs.rollback();
        error_line(err, e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        outputs.rollback();
        error_line(err, "internal", e.what());
        return 1;
    }
    for (const auto& p : outputs.written()) out << "wrote " << p.string() << '\n';
    return 0;
}

}  // namespace argos::cli
