#include "argos/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "argos/design.hpp"
#include "argos/error.hpp"
#include "argos/parallel.hpp"
#include "argos/rng.hpp"
#include "argos/savgol.hpp"

namespace argos::bench {

namespace {

using Clock = std::chrono::steady_clock;

void sort_in_basis_order(std::vector<std::string>& names, int m) {
    int degree = 1;
    for (const auto& s : names) degree = std::max(degree, design::total_degree(design::parse_term_name(s, m)));
    const auto order = design::enumerate_monomials(m, degree).names();
    auto rank = [&](const std::string& s) { return std::find(order.begin(), order.end(), s) - order.begin(); };
    std::stable_sort(names.begin(), names.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
}

std::vector<Index> power_grid(double lo, double hi, double step) {
    std::vector<Index> out;
    const int count = static_cast<int>(std::lround((hi - lo) / step)) + 1;
    for (int i = 0; i < count; ++i) {
        // tolerance keeps exact powers of ten from rounding up
        out.push_back(static_cast<Index>(std::ceil(std::pow(10.0, lo + step * i) - 1e-9)));
    }
    return out;
}

std::uint64_t run_seed(const SweepOptions& o, int seed_index, std::size_t grid_index, std::string_view stage) {
    return derive_seed(o.master_seed, {tag(argos::to_string(o.system)), static_cast<std::uint64_t>(seed_index),
                                       static_cast<std::uint64_t>(grid_index), tag(stage)});
}

void validate(const SweepOptions& o) {
    if (o.seeds < 1) throw InvalidArgument("sweep: seeds must be positive");
    if (o.jobs < 1) throw InvalidArgument("sweep: jobs must be positive");
    if (o.bootstrap_samples < 1) throw InvalidArgument("sweep: bootstrap samples must be positive");
    if (o.max_degree < 1) throw InvalidArgument("sweep: max degree must be positive");
    if (!(o.dt >= 0.0) || !std::isfinite(o.dt)) throw InvalidArgument("sweep: dt must be finite and non-negative");
}

// Runs every (grid index, seed) pair; point(g) gives (n, snr) for grid index g.
template <typename Point>
std::vector<BenchmarkRecord> run_grid(const SweepOptions& o, std::size_t grid_size, Point&& point) {
    const SystemDescriptor truth = make_system(o.system);
    const double dt = o.dt > 0.0 ? o.dt : truth.default_dt;
    const auto ics = sample_initial_conditions(
        truth, static_cast<std::size_t>(o.seeds), derive_seed(o.master_seed, {tag("sweep-ic"), tag(argos::to_string(o.system))}));
    const std::size_t seeds = static_cast<std::size_t>(o.seeds);
    std::vector<BenchmarkRecord> records(grid_size * seeds);
    parallel_for(records.size(), o.jobs, [&](std::size_t i) {
        const std::size_t g = i / seeds;
        const int s = static_cast<int>(i % seeds);
        const auto [n, snr] = point(g);
        BenchmarkRecord r = run_one(truth, ics[static_cast<std::size_t>(s)], n, dt, snr, o.method,
                                    run_seed(o, s, g, "noise"), run_seed(o, s, g, "pipeline"),
                                    o.bootstrap_samples, o.max_degree);
        r.seed = s;
        records[i] = std::move(r);
    });
    return records;
}

}  // namespace

TermSets true_terms(const SystemDescriptor& truth) {
    TermSets out;
    for (const auto& eq : truth.true_support) {
        std::vector<std::string> names;
        for (const auto& t : eq) names.push_back(design::term_name(t.exponents));
        sort_in_basis_order(names, truth.dimension);
        out.push_back(std::move(names));
    }
    return out;
}

TermSets selected_terms(const IdentifiedSystem& identified) {
    TermSets out;
    for (const auto& eq : identified.equations) {
        std::vector<Index> support = eq.support;
        std::sort(support.begin(), support.end());
        std::vector<std::string> names;
        for (Index k : support) names.push_back(eq.term_names[static_cast<std::size_t>(k)]);
        out.push_back(std::move(names));
    }
    return out;
}

bool judge_success(const TermSets& selected, const SystemDescriptor& truth) {
    if (selected.size() != truth.true_support.size()) {
        throw InvalidArgument("judge_success: " + std::to_string(selected.size()) + " equations vs " +
                              std::to_string(truth.true_support.size()) + " in the truth");
    }
    const TermSets expected = true_terms(truth);
    for (std::size_t j = 0; j < selected.size(); ++j) {
        const std::set<std::string> a(selected[j].begin(), selected[j].end());
        const std::set<std::string> b(expected[j].begin(), expected[j].end());
        if (a != b) return false;
    }
    return true;
}

bool judge_success(const IdentifiedSystem& identified, const SystemDescriptor& truth) {
    return judge_success(selected_terms(identified), truth);
}

std::string to_string(Axis axis) { return axis == Axis::N ? "n" : "snr"; }

std::vector<Index> default_n_grid() { return power_grid(2.0, 5.0, 0.1); }

std::vector<double> default_snr_grid() {
    std::vector<double> out;
    for (int s = 1; s <= 61; s += 3) out.push_back(s);
    out.push_back(std::numeric_limits<double>::infinity());
    return out;
}

std::vector<Index> default_timing_grid() { return power_grid(2.0, 5.0, 0.5); }

BenchmarkRecord run_one(const SystemDescriptor& truth, const StateVector& x0, Index n, double dt,
                        double snr_db, sparse::Method method, std::uint64_t noise_seed,
                        std::uint64_t pipeline_seed, int bootstrap_samples, int max_degree) {
    BenchmarkRecord r;
    r.system = truth.id;
    r.method = method;
    r.n = n;
    r.snr_db = snr_db;
    const auto t0 = Clock::now();
    try {
        const Trajectory traj = integrate(truth, x0, static_cast<std::size_t>(n), dt);
        const MatrixXd noisy = add_noise(traj.states, NoiseSpec{snr_db, noise_seed});
        PipelineOptions options;
        options.method = method;
        options.max_degree = max_degree;
        options.bootstrap_samples = bootstrap_samples;
        options.seed = pipeline_seed;
        const IdentifiedSystem sys = identify_system(noisy, dt, options);
        r.selected_terms = selected_terms(sys);
        r.success = judge_success(r.selected_terms, truth);
        for (const auto& eq : sys.equations) r.max_kkt_violation = std::max(r.max_kkt_violation, eq.max_kkt_violation);
    } catch (const Error& e) {
        r.success = false;
        r.selected_terms.assign(static_cast<std::size_t>(truth.dimension), {});
        r.error = e.code();
    }
    r.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

SweepSummary summarize(Axis axis, const std::vector<double>& grid, std::vector<BenchmarkRecord> records,
                       const SystemDescriptor& truth) {
    SweepSummary out;
    out.axis = axis;
    out.grid = grid;
    const TermSets expected = true_terms(truth);
    std::map<double, std::size_t> slot;
    for (std::size_t g = 0; g < grid.size(); ++g) slot.emplace(grid[g], g);
    std::vector<int> successes(grid.size(), 0);
    out.n_seeds.assign(grid.size(), 0);
    std::vector<std::vector<std::map<std::string, int>>> counts(
        grid.size(), std::vector<std::map<std::string, int>>(expected.size()));
    for (const auto& r : records) {
        const double key = axis == Axis::N ? static_cast<double>(r.n) : r.snr_db;
        const auto it = slot.find(key);
        if (it == slot.end()) throw InvalidArgument("summarize: record outside the grid");
        const std::size_t g = it->second;
        ++out.n_seeds[g];
        if (r.success) ++successes[g];
        for (std::size_t j = 0; j < r.selected_terms.size() && j < expected.size(); ++j) {
            for (const auto& t : r.selected_terms[j]) ++counts[g][j][t];
        }
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        out.success_rate.push_back(out.n_seeds[g] > 0 ? static_cast<double>(successes[g]) / out.n_seeds[g] : 0.0);
        std::vector<TermCount> rows;
        for (std::size_t j = 0; j < expected.size(); ++j) {
            std::vector<std::string> names = expected[j];
            for (const auto& [t, c] : counts[g][j]) {
                if (std::find(names.begin(), names.end(), t) == names.end()) names.push_back(t);
            }
            sort_in_basis_order(names, truth.dimension);
            for (const auto& t : names) {
                const auto c = counts[g][j].find(t);
                const bool correct = std::find(expected[j].begin(), expected[j].end(), t) != expected[j].end();
                rows.push_back({static_cast<int>(j), t, c == counts[g][j].end() ? 0 : c->second, correct});
            }
        }
        out.term_frequency.push_back(std::move(rows));
    }
    out.records = std::move(records);
    return out;
}

SweepSummary sweep_n(const SweepOptions& options, const std::vector<Index>& n_grid, double snr_db) {
    validate(options);
    if (n_grid.empty()) throw InvalidArgument("sweep-n: empty n grid");
    for (Index n : n_grid) {
        if (n < savgol::kMinWindow) {
            throw InvalidArgument("sweep-n: n = " + std::to_string(n) + " is below the minimum of " +
                                  std::to_string(savgol::kMinWindow));
        }
    }
    auto records = run_grid(options, n_grid.size(), [&](std::size_t g) { return std::pair{n_grid[g], snr_db}; });
    std::vector<double> grid(n_grid.begin(), n_grid.end());
    return summarize(Axis::N, grid, std::move(records), make_system(options.system));
}

SweepSummary sweep_snr(const SweepOptions& options, const std::vector<double>& snr_grid, Index n) {
    validate(options);
    if (snr_grid.empty()) throw InvalidArgument("sweep-snr: empty SNR grid");
    if (n < savgol::kMinWindow) throw InvalidArgument("sweep-snr: n is below the minimum of 13");
    for (double s : snr_grid) {
        if (std::isnan(s)) throw InvalidArgument("sweep-snr: SNR must not be NaN");
    }
    auto records = run_grid(options, snr_grid.size(), [&](std::size_t g) { return std::pair{n, snr_grid[g]}; });
    return summarize(Axis::Snr, snr_grid, std::move(records), make_system(options.system));
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidArgument("quantile: no values");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

LogLogFit fit_log_log(const std::vector<TimingRow>& rows) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : rows) {
        if (r.wall_seconds > 0.0 && r.n > 0) {
            xs.push_back(std::log(static_cast<double>(r.n)));
            ys.push_back(std::log(r.wall_seconds));
        }
    }
    const auto count = static_cast<double>(xs.size());
    if (xs.size() < 3) throw InsufficientData("timing fit: need at least 3 positive timings");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw InsufficientData("timing fit: need at least two distinct n");
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - fit.intercept - fit.slope * xs[i];
        sse += e * e;
    }
    const double se = std::sqrt(sse / (count - 2.0) / sxx);
    const boost::math::students_t dist(count - 2.0);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.slope_lo = fit.slope - t * se;
    fit.slope_hi = fit.slope + t * se;
    return fit;
}

TimingResult timing_run(SystemId system, sparse::Method method, const std::vector<Index>& n_grid, int reps,
                        std::uint64_t master_seed, int bootstrap_samples, double snr_db) {
    if (reps < 1) throw InvalidArgument("timing: reps must be positive");
    if (n_grid.empty()) throw InvalidArgument("timing: empty n grid");
    for (Index n : n_grid) {
        if (n < savgol::kMinWindow) throw InvalidArgument("timing: n is below the minimum of 13");
    }
    const SystemDescriptor truth = make_system(system);
    const auto ics = sample_initial_conditions(truth, static_cast<std::size_t>(reps),
                                               derive_seed(master_seed, {tag("timing-ic"), tag(argos::to_string(system))}));
    TimingResult out;
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        const Index n = n_grid[g];
        std::vector<double> times;
        for (int rep = 0; rep < reps; ++rep) {
            const std::uint64_t run = derive_seed(
                master_seed, {tag(argos::to_string(system)), static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(g)});
            const Trajectory traj = integrate(truth, ics[static_cast<std::size_t>(rep)], static_cast<std::size_t>(n),
                                              truth.default_dt);
            const MatrixXd noisy = add_noise(traj.states, NoiseSpec{snr_db, derive_seed(run, {tag("noise")})});
            PipelineOptions options;
            options.method = method;
            options.bootstrap_samples = bootstrap_samples;
            options.seed = derive_seed(run, {tag("pipeline")});
            options.workers = 1;
            const auto t0 = Clock::now();
            try {
                identify_system(noisy, truth.default_dt, options);
            } catch (const Error&) {
                // a failed identification still costs the time it took
            }
            const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            out.rows.push_back({n, rep, secs});
            times.push_back(secs);
        }
        out.quantiles.push_back({n, quantile(times, 0.25), quantile(times, 0.5), quantile(times, 0.75)});
    }
    if (n_grid.size() >= 2 && out.rows.size() >= 3) out.fit = fit_log_log(out.rows);
    return out;
}

}  // namespace argos::bench
