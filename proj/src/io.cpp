#include "argos/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "argos/error.hpp"

namespace argos::io {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_17g(double v) {
    if (!std::isfinite(v)) return format_number(v);
    char buf[64];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

double parse_number(std::string_view text) {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw InvalidArgument("not a number: '" + std::string(text) + "'");
    }
    return v;
}

Json number_json(double v) {
    if (std::isfinite(v)) return Json(v);
    return Json(format_number(v));
}

double number_from_json(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_number(j.get<std::string>());
    throw InvalidArgument("expected a number, got " + j.dump());
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    return out;
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    bool first = true;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = end + 1;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t p = 0;
        for (;;) {
            const std::size_t q = line.find(',', p);
            cells.emplace_back(line.substr(p, q == std::string_view::npos ? std::string_view::npos : q - p));
            if (q == std::string_view::npos) break;
            p = q + 1;
        }
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != table.header.size()) {
                throw InvalidArgument("csv: row " + std::to_string(table.rows.size() + 1) + " has " +
                                      std::to_string(cells.size()) + " cells, header has " +
                                      std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(cells));
        }
    }
    if (first) throw InvalidArgument("csv: empty input");
    return table;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InvalidArgument("write failed: " + path.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

CsvTable trajectory_table(const std::vector<double>& times, const MatrixXd& states) {
    if (static_cast<Index>(times.size()) != states.rows()) {
        throw InvalidArgument("trajectory: time column and states differ in length");
    }
    CsvTable t;
    t.header.push_back("t");
    for (Index j = 0; j < states.cols(); ++j) t.header.push_back("x" + std::to_string(j + 1));
    t.rows.reserve(times.size());
    for (Index i = 0; i < states.rows(); ++i) {
        std::vector<std::string> row;
        row.push_back(format_17g(times[static_cast<std::size_t>(i)]));
        for (Index j = 0; j < states.cols(); ++j) row.push_back(format_17g(states(i, j)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

TrajectoryData trajectory_from_table(const CsvTable& table) {
    if (table.header.size() < 2 || table.header[0] != "t") {
        throw InvalidArgument("trajectory csv: header must be t,x1,...,xm");
    }
    for (std::size_t j = 1; j < table.header.size(); ++j) {
        if (table.header[j] != "x" + std::to_string(j)) {
            throw InvalidArgument("trajectory csv: column " + std::to_string(j + 1) + " must be named x" +
                                  std::to_string(j));
        }
    }
    TrajectoryData d;
    const auto n = static_cast<Index>(table.rows.size());
    const auto m = static_cast<Index>(table.header.size() - 1);
    d.states.resize(n, m);
    for (Index i = 0; i < n; ++i) {
        const auto& r = table.rows[static_cast<std::size_t>(i)];
        d.times.push_back(parse_number(r[0]));
        for (Index j = 0; j < m; ++j) d.states(i, j) = parse_number(r[static_cast<std::size_t>(j + 1)]);
    }
    return d;
}

double infer_dt(const std::vector<double>& times) {
    if (times.size() < 2) throw InsufficientData("trajectory: need at least two samples to infer dt");
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) throw InvalidArgument("trajectory: times must increase");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs(times[i] - times[i - 1] - dt) > 1e-6 * dt) {
            throw InvalidArgument("trajectory: non-uniform time step at row " + std::to_string(i + 1));
        }
    }
    return dt;
}

Json trajectory_sidecar(const SystemDescriptor& descriptor, double dt, std::uint64_t seed, double snr_db) {
    Json j;
    j["system"] = to_string(descriptor.id);
    Json params = Json::object();
    for (const auto& [k, v] : descriptor.parameters) params[k] = number_json(v);
    j["parameters"] = params;
    j["dt"] = number_json(dt);
    j["seed"] = seed;
    j["snr_db"] = number_json(snr_db);
    return j;
}

// ---------------------------------------------------------------------------

Json to_json(const IdentifiedSystem& system) {
    Json j;
    Json eqs = Json::array();
    for (std::size_t e = 0; e < system.equations.size(); ++e) {
        const EquationModel& m = system.equations[e];
        Json eq;
        eq["variable"] = "x" + std::to_string(e + 1);
        Json terms = Json::object();
        for (Index k : m.support) {
            terms[m.term_names[static_cast<std::size_t>(k)]] = {
                {"coefficient", number_json(m.coefficients[k])},
                {"ci", {number_json(m.ci_lower[k]), number_json(m.ci_upper[k])}}};
        }
        eq["terms"] = terms;
        eq["trimmed_degree"] = m.trimmed_degree;
        eq["bic"] = number_json(m.bic);
        eq["max_kkt_violation"] = number_json(m.max_kkt_violation);
        Json cands = Json::object();
        for (std::size_t k = 0; k < m.term_names.size(); ++k) {
            const auto ki = static_cast<Index>(k);
            cands[m.term_names[k]] = {{"point_estimate", number_json(m.point_estimate[ki])},
                                      {"ci", {number_json(m.ci_lower[ki]), number_json(m.ci_upper[ki])}}};
        }
        eq["candidates"] = cands;
        eqs.push_back(eq);
    }
    j["equations"] = eqs;
    const Provenance& p = system.provenance;
    Json prov;
    prov["dt"] = number_json(p.dt);
    prov["n"] = p.n;
    prov["snr_db"] = number_json(p.snr_db);
    prov["seed"] = p.seed;
    prov["method"] = to_string(p.method);
    prov["max_degree"] = p.max_degree;
    prov["bootstrap_samples"] = p.bootstrap_samples;
    prov["alpha"] = number_json(p.alpha);
    prov["windows"] = p.windows;
    prov["trimmed_degrees"] = system.trimmed_degrees;
    Json timings;
    timings["smoothing_seconds"] = number_json(p.smoothing_seconds);
    Json eq_secs = Json::array();
    for (double s : p.equation_seconds) eq_secs.push_back(number_json(s));
    timings["equation_seconds"] = eq_secs;
    timings["total_seconds"] = number_json(p.total_seconds);
    prov["timings"] = timings;
    j["provenance"] = prov;
    return j;
}

CsvTable residual_table(const EquationModel& equation) {
    if (equation.fitted.size() != equation.residuals.size()) {
        throw InvalidArgument("residuals: fitted and residual lengths differ");
    }
    CsvTable t;
    t.header = {"fitted", "residual"};
    for (Index i = 0; i < equation.fitted.size(); ++i) {
        t.rows.push_back({format_number(equation.fitted[i]), format_number(equation.residuals[i])});
    }
    return t;
}

// ---------------------------------------------------------------------------

Json to_json(const bench::BenchmarkRecord& r) {
    Json j;
    j["system"] = to_string(r.system);
    j["method"] = to_string(r.method);
    j["n"] = r.n;
    j["snr_db"] = number_json(r.snr_db);
    j["seed"] = r.seed;
    j["success"] = r.success;
    j["selected_terms"] = r.selected_terms;
    j["max_kkt_violation"] = number_json(r.max_kkt_violation);
    j["error"] = r.error;
    return j;
}

bench::BenchmarkRecord record_from_json(const Json& j) {
    bench::BenchmarkRecord r;
    try {
        r.system = parse_system_id(j.at("system").get<std::string>());
        r.method = parse_method(j.at("method").get<std::string>());
        r.n = j.at("n").get<Index>();
        r.snr_db = number_from_json(j.at("snr_db"));
        r.seed = j.at("seed").get<int>();
        r.success = j.at("success").get<bool>();
        r.selected_terms = j.at("selected_terms").get<bench::TermSets>();
        r.max_kkt_violation = number_from_json(j.at("max_kkt_violation"));
        r.error = j.at("error").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("benchmark record: ") + e.what());
    }
    return r;
}

std::string to_jsonl(const std::vector<bench::BenchmarkRecord>& records) {
    std::string out;
    for (const auto& r : records) out += to_json(r).dump() + "\n";
    return out;
}

std::vector<bench::BenchmarkRecord> parse_jsonl(std::string_view text) {
    std::vector<bench::BenchmarkRecord> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        try {
            out.push_back(record_from_json(Json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument("records line " + std::to_string(out.size() + 1) + ": " + e.what());
        }
    }
    return out;
}

namespace {

std::string axis_cell(const bench::SweepSummary& s, std::size_t g) {
    return s.axis == bench::Axis::N ? std::to_string(static_cast<long long>(s.grid[g])) : format_number(s.grid[g]);
}

}  // namespace

CsvTable summary_table(const bench::SweepSummary& s) {
    CsvTable t;
    t.header = {"axis_value", "success_rate", "n_seeds"};
    for (std::size_t g = 0; g < s.grid.size(); ++g) {
        t.rows.push_back({axis_cell(s, g), format_number(s.success_rate[g]), std::to_string(s.n_seeds[g])});
    }
    return t;
}

CsvTable frequency_table(const bench::SweepSummary& s) {
    CsvTable t;
    t.header = {"axis_value", "equation", "term", "count", "is_correct"};
    for (std::size_t g = 0; g < s.grid.size(); ++g) {
        for (const auto& c : s.term_frequency[g]) {
            t.rows.push_back({axis_cell(s, g), std::to_string(c.equation + 1), c.term, std::to_string(c.count),
                              c.is_correct ? "true" : "false"});
        }
    }
    return t;
}

CsvTable wall_time_table(const bench::SweepSummary& s) {
    CsvTable t;
    t.header = {"n", "snr_db", "seed", "wall_seconds"};
    for (const auto& r : s.records) {
        t.rows.push_back({std::to_string(r.n), format_number(r.snr_db), std::to_string(r.seed), format_number(r.wall_seconds)});
    }
    return t;
}

CsvTable timing_table(const bench::TimingResult& result) {
    CsvTable t;
    t.header = {"n", "rep", "wall_seconds"};
    for (const auto& r : result.rows) {
        t.rows.push_back({std::to_string(r.n), std::to_string(r.rep), format_number(r.wall_seconds)});
    }
    return t;
}

CsvTable timing_quantile_table(const bench::TimingResult& result) {
    CsvTable t;
    t.header = {"n", "q1", "median", "q3"};
    for (const auto& q : result.quantiles) {
        t.rows.push_back({std::to_string(q.n), format_number(q.q1), format_number(q.median), format_number(q.q3)});
    }
    return t;
}

Json timing_fit_json(const bench::LogLogFit& fit) {
    Json j;
    j["slope"] = number_json(fit.slope);
    j["intercept"] = number_json(fit.intercept);
    j["slope_ci95"] = {number_json(fit.slope_lo), number_json(fit.slope_hi)};
    return j;
}

}  // namespace argos::io
