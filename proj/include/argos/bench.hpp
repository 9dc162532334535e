#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "argos/pipeline.hpp"
#include "argos/systems.hpp"

namespace argos::bench {

using TermSets = std::vector<std::vector<std::string>>;

struct BenchmarkRecord {
    SystemId system = SystemId::Linear2D;
    sparse::Method method = sparse::Method::Lasso;
    Index n = 0;
    double snr_db = 0.0;
    int seed = 0;  // seed index within the sweep
    bool success = false;
    TermSets selected_terms;  // per equation, canonical term names in basis order
    double wall_seconds = 0.0;
    double max_kkt_violation = 0.0;
    std::string error;  // error code of a failed run, empty otherwise
};

/// True support names per equation, in basis order.
TermSets true_terms(const SystemDescriptor& truth);

/// Selected support names per equation, in basis order.
TermSets selected_terms(const IdentifiedSystem& identified);

/// Exact support-set equality per equation; coefficients are ignored.
bool judge_success(const TermSets& selected, const SystemDescriptor& truth);
bool judge_success(const IdentifiedSystem& identified, const SystemDescriptor& truth);

enum class Axis { N, Snr };
std::string to_string(Axis axis);

struct TermCount {
    int equation = 0;  // 0-based
    std::string term;
    int count = 0;
    bool is_correct = false;
};

struct SweepSummary {
    Axis axis = Axis::N;
    std::vector<double> grid;
    std::vector<double> success_rate;
    std::vector<int> n_seeds;
    std::vector<std::vector<TermCount>> term_frequency;  // per grid value
    std::vector<BenchmarkRecord> records;                // grid-major, then seed
};

/// n = ceil(10^e) for e = 2.0, 2.1, ..., 5.0.
std::vector<Index> default_n_grid();
/// 1, 4, ..., 61 dB and the noiseless case.
std::vector<double> default_snr_grid();
/// n = ceil(10^e) for e = 2.0, 2.5, ..., 5.0.
std::vector<Index> default_timing_grid();

struct SweepOptions {
    SystemId system = SystemId::Linear2D;
    sparse::Method method = sparse::Method::Lasso;
    int seeds = 20;
    std::uint64_t master_seed = 0;
    int jobs = 1;
    int bootstrap_samples = 2000;
    int max_degree = 5;
    double dt = 0.0;  // 0 selects the system's default step
};

/// One simulate-noise-identify-judge run. Never throws for pipeline
/// failures; they come back as an unsuccessful record with `error` set.
BenchmarkRecord run_one(const SystemDescriptor& truth, const StateVector& x0, Index n, double dt,
                        double snr_db, sparse::Method method, std::uint64_t noise_seed,
                        std::uint64_t pipeline_seed, int bootstrap_samples, int max_degree);

/// Aggregates records into success rates and term frequencies.
SweepSummary summarize(Axis axis, const std::vector<double>& grid, std::vector<BenchmarkRecord> records,
                       const SystemDescriptor& truth);

SweepSummary sweep_n(const SweepOptions& options, const std::vector<Index>& n_grid, double snr_db = 49.0);
SweepSummary sweep_snr(const SweepOptions& options, const std::vector<double>& snr_grid, Index n = 5000);

struct TimingRow {
    Index n = 0;
    int rep = 0;
    double wall_seconds = 0.0;
};

struct TimingQuantiles {
    Index n = 0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

/// ln(seconds) = intercept + slope ln(n), with a 95% interval on the slope.
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_lo = 0.0;
    double slope_hi = 0.0;
};

struct TimingResult {
    std::vector<TimingRow> rows;
    std::vector<TimingQuantiles> quantiles;
    LogLogFit fit;
};

/// Type-7 sample quantile of unsorted values.
double quantile(std::vector<double> values, double q);
LogLogFit fit_log_log(const std::vector<TimingRow>& rows);

/// Times identify_system alone on a single worker for every (n, rep).
TimingResult timing_run(SystemId system, sparse::Method method, const std::vector<Index>& n_grid, int reps,
                        std::uint64_t master_seed, int bootstrap_samples = 2000, double snr_db = 49.0);

}  // namespace argos::bench
