#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "argos/bench.hpp"
#include "argos/pipeline.hpp"
#include "argos/systems.hpp"

namespace argos::io {

using Json = nlohmann::ordered_json;

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan"
/// for non-finite values.
std::string format_number(double v);
/// 17 significant digits (%.17g); used for trajectory samples.
std::string format_17g(double v);
/// Inverse of both formatters. Throws InvalidArgument on junk.
double parse_number(std::string_view text);

/// Finite values become JSON numbers, others the strings of format_number.
Json number_json(double v);
double number_from_json(const Json& j);

/// Comma-separated table of raw cells; no quoting (no cell contains commas).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
/// Pretty JSON with two-space indent and a trailing newline.
std::string dump(const Json& j);

// Trajectories ---------------------------------------------------------------

/// Header t,x1,...,xm; every value in %.17g.
CsvTable trajectory_table(const std::vector<double>& times, const MatrixXd& states);
struct TrajectoryData {
    std::vector<double> times;
    MatrixXd states;
};
TrajectoryData trajectory_from_table(const CsvTable& table);
/// Step inferred from the time column; throws if it is not uniform.
double infer_dt(const std::vector<double>& times);

/// Descriptor id and parameters, dt, seed and snr_db of a trajectory file.
Json trajectory_sidecar(const SystemDescriptor& descriptor, double dt, std::uint64_t seed, double snr_db);

// Identification results ---------------------------------------------------

Json to_json(const IdentifiedSystem& system);
/// Header fitted,residual for one equation.
CsvTable residual_table(const EquationModel& equation);

// Benchmarks ------------------------------------------------------------------

/// One JSON-lines record; wall time is left out so reruns compare equal.
Json to_json(const bench::BenchmarkRecord& record);
bench::BenchmarkRecord record_from_json(const Json& j);
std::string to_jsonl(const std::vector<bench::BenchmarkRecord>& records);
std::vector<bench::BenchmarkRecord> parse_jsonl(std::string_view text);

/// axis_value,success_rate,n_seeds
CsvTable summary_table(const bench::SweepSummary& summary);
/// axis_value,equation,term,count,is_correct (equation is 1-based)
CsvTable frequency_table(const bench::SweepSummary& summary);
/// n,seed,wall_seconds per record
CsvTable wall_time_table(const bench::SweepSummary& summary);

/// n,rep,wall_seconds
CsvTable timing_table(const bench::TimingResult& result);
/// n,q1,median,q3
CsvTable timing_quantile_table(const bench::TimingResult& result);
Json timing_fit_json(const bench::LogLogFit& fit);

}  // namespace argos::io
