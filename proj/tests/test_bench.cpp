#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "argos/bench.hpp"
#include "argos/error.hpp"

using namespace argos;
using namespace argos::bench;

namespace {

EquationModel equation(std::vector<std::string> names, std::vector<Index> support, VectorXd coef) {
    EquationModel e;
    e.term_names = std::move(names);
    e.support = std::move(support);
    e.coefficients = std::move(coef);
    return e;
}

BenchmarkRecord record(Index n, bool success, TermSets terms) {
    BenchmarkRecord r;
    r.n = n;
    r.success = success;
    r.selected_terms = std::move(terms);
    return r;
}

}  // namespace

TEST_CASE("true terms in basis order") {
    CHECK(true_terms(make_system(SystemId::Linear2D)) == TermSets{{"x1", "x2"}, {"x1", "x2"}});
    CHECK(true_terms(make_system(SystemId::Duffing)) == TermSets{{"x2"}, {"x1", "x2", "x1^3"}});
    const auto lorenz = true_terms(make_system(SystemId::Lorenz));
    CHECK(lorenz == TermSets{{"x1", "x2"}, {"x1", "x2", "x1*x3"}, {"x3", "x1*x2"}});
}

TEST_CASE("judge_success") {
    const auto truth = make_system(SystemId::Linear2D);
    CHECK(judge_success(TermSets{{"x1", "x2"}, {"x2", "x1"}}, truth));
    CHECK_FALSE(judge_success(TermSets{{"x1", "x2"}, {"x1", "x2", "x1^2"}}, truth));
    CHECK_FALSE(judge_success(TermSets{{"x1", "x2"}, {"x1"}}, truth));
    CHECK_FALSE(judge_success(TermSets{{"1", "x1", "x2"}, {"x1", "x2"}}, truth));
    CHECK_THROWS_AS(judge_success(TermSets{{"x1"}}, truth), InvalidArgument);

    // coefficients 30% off still count as success
    IdentifiedSystem sys;
    const std::vector<std::string> names{"1", "x1", "x2", "x1^2", "x1*x2", "x2^2"};
    sys.equations.push_back(equation(names, {2, 1}, (VectorXd(6) << 0, -0.13, 2.6, 0, 0, 0).finished()));
    sys.equations.push_back(equation(names, {1, 2}, (VectorXd(6) << 0, -1.4, -0.07, 0, 0, 0).finished()));
    CHECK(selected_terms(sys) == TermSets{{"x1", "x2"}, {"x1", "x2"}});
    CHECK(judge_success(sys, truth));
    sys.equations[0].support.push_back(4);
    CHECK_FALSE(judge_success(sys, truth));
}

TEST_CASE("judge_success is symmetric under relabelling") {
    // Duffing with variables and equations swapped
    SystemDescriptor swapped = make_system(SystemId::Duffing);
    std::swap(swapped.true_support[0], swapped.true_support[1]);
    for (auto& eq : swapped.true_support)
        for (auto& t : eq) std::swap(t.exponents[0], t.exponents[1]);
    const TermSets original{{"x2"}, {"x1", "x2", "x1^3"}};
    const TermSets relabelled{{"x1", "x2", "x2^3"}, {"x1"}};
    CHECK(judge_success(original, make_system(SystemId::Duffing)));
    CHECK(judge_success(relabelled, swapped));
    CHECK_FALSE(judge_success(original, swapped));
}

TEST_CASE("default grids") {
    const auto n = default_n_grid();
    REQUIRE(n.size() == 31);
    CHECK(n.front() == 100);
    CHECK(n[6] == 399);
    CHECK(n[10] == 1000);
    CHECK(n.back() == 100000);
    for (std::size_t i = 1; i < n.size(); ++i) CHECK(n[i] > n[i - 1]);

    const auto s = default_snr_grid();
    REQUIRE(s.size() == 22);
    CHECK(s.front() == 1.0);
    CHECK(s[20] == 61.0);
    CHECK(std::isinf(s.back()));

    CHECK(default_timing_grid() == std::vector<Index>{100, 317, 1000, 3163, 10000, 31623, 100000});
}

TEST_CASE("summarize bookkeeping") {
    const auto truth = make_system(SystemId::Linear2D);
    std::vector<BenchmarkRecord> records = {
        record(100, true, {{"x1", "x2"}, {"x1", "x2"}}),
        record(100, false, {{"x1", "x2", "x1^2"}, {"x1", "x2"}}),
        record(100, false, {{}, {}}),
        record(200, true, {{"x1", "x2"}, {"x1", "x2"}}),
        record(200, true, {{"x1", "x2"}, {"x1", "x2"}}),
    };
    const SweepSummary s = summarize(Axis::N, {100, 200}, records, truth);
    CHECK(s.success_rate[0] == doctest::Approx(1.0 / 3.0));
    CHECK(s.success_rate[1] == 1.0);
    CHECK(s.n_seeds == std::vector<int>{3, 2});
    CHECK(s.records.size() == 5);

    const auto& f = s.term_frequency[0];
    // eq 0: x1, x2, x1^2; eq 1: x1, x2
    REQUIRE(f.size() == 5);
    CHECK(f[0].equation == 0);
    CHECK(f[0].term == "x1");
    CHECK(f[0].count == 2);
    CHECK(f[0].is_correct);
    CHECK(f[2].term == "x1^2");
    CHECK(f[2].count == 1);
    CHECK_FALSE(f[2].is_correct);
    CHECK(f[3].equation == 1);
    for (const auto& row : f) CHECK(row.count <= s.n_seeds[0]);
    // correct terms appear even when never selected
    const SweepSummary empty = summarize(Axis::N, {100}, {record(100, false, {{}, {}})}, truth);
    CHECK(empty.term_frequency[0].size() == 4);
    for (const auto& row : empty.term_frequency[0]) CHECK(row.count == 0);

    CHECK_THROWS_AS(summarize(Axis::N, {300}, records, truth), InvalidArgument);
    CHECK(to_string(Axis::N) == "n");
    CHECK(to_string(Axis::Snr) == "snr");
}

TEST_CASE("quantile is type 7") {
    CHECK(quantile({4, 1, 3, 2}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
    CHECK(quantile({7}, 0.3) == 7.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u;
    std::vector<double> v(101);
    for (auto& x : v) x = u(rng);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(quantile(v, 0.5) == sorted[50]);
    CHECK(quantile(v, 0.25) == sorted[25]);
    CHECK_THROWS_AS(quantile({}, 0.5), InvalidArgument);
}

TEST_CASE("log-log fit") {
    std::vector<TimingRow> exact;
    for (Index n : {100, 1000, 10000}) exact.push_back({n, 0, std::exp(-3.0) * std::pow(double(n), 1.5)});
    const LogLogFit f = fit_log_log(exact);
    CHECK(f.slope == doctest::Approx(1.5));
    CHECK(f.intercept == doctest::Approx(-3.0));
    CHECK(f.slope_hi - f.slope_lo < 1e-6);

    // 12 points -> 10 degrees of freedom; t_{0.975,10} = 2.2281388519649
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0.0, 0.2);
    std::vector<TimingRow> rows;
    std::vector<double> xs, ys;
    for (int i = 0; i < 12; ++i) {
        const Index n = 100 + 150 * i;
        const double secs = std::exp(0.5 + 1.2 * std::log(double(n)) + z(rng));
        rows.push_back({n, i, secs});
        xs.push_back(std::log(double(n)));
        ys.push_back(std::log(secs));
    }
    // least squares via the 2x2 normal equations
    Eigen::MatrixXd a(12, 2);
    Eigen::VectorXd b(12);
    for (int i = 0; i < 12; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = xs[i];
        b[i] = ys[i];
    }
    const Eigen::VectorXd coef = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    const double sigma2 = (b - a * coef).squaredNorm() / 10.0;
    const double se = std::sqrt(sigma2 * (a.transpose() * a).inverse()(1, 1));
    const LogLogFit g = fit_log_log(rows);
    CHECK(g.slope == doctest::Approx(coef[1]));
    CHECK(g.intercept == doctest::Approx(coef[0]));
    CHECK(g.slope_lo == doctest::Approx(coef[1] - 2.2281388519649 * se));
    CHECK(g.slope_hi == doctest::Approx(coef[1] + 2.2281388519649 * se));

    CHECK_THROWS_AS(fit_log_log({{100, 0, 1.0}, {200, 0, 2.0}}), InsufficientData);
    CHECK_THROWS_AS(fit_log_log({{100, 0, 1.0}, {100, 1, 2.0}, {100, 2, 3.0}}), InsufficientData);
}

TEST_CASE("small sweeps: determinism, job count, bookkeeping") {
    SweepOptions o;
    o.system = SystemId::Linear2D;
    o.seeds = 3;
    o.master_seed = 77;
    o.bootstrap_samples = 40;
    const SweepSummary a = sweep_n(o, {300, 500});
    o.jobs = 2;
    const SweepSummary b = sweep_n(o, {300, 500});
    REQUIRE(a.records.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(a.records[i].selected_terms == b.records[i].selected_terms);
        CHECK(a.records[i].max_kkt_violation == b.records[i].max_kkt_violation);
        CHECK(a.records[i].seed == int(i % 3));
        CHECK(a.records[i].n == (i < 3 ? 300 : 500));
        CHECK(a.records[i].snr_db == 49.0);
        CHECK(a.records[i].error.empty());
        CHECK(a.records[i].max_kkt_violation <= sparse::kKktTol);
    }
    for (std::size_t g = 0; g < 2; ++g) {
        double mean = 0.0;
        for (std::size_t s = 0; s < 3; ++s) mean += a.records[g * 3 + s].success ? 1.0 : 0.0;
        CHECK(a.success_rate[g] == mean / 3.0);
        for (const auto& row : a.term_frequency[g]) CHECK(row.count <= 3);
    }

    o.jobs = 1;
    const SweepSummary clean = sweep_snr(o, {std::numeric_limits<double>::infinity()}, 400);
    REQUIRE(clean.records.size() == 3);
    CHECK(std::isinf(clean.records[0].snr_db));
    CHECK(clean.axis == Axis::Snr);

    CHECK_THROWS_AS(sweep_n(o, {12}), InvalidArgument);
    CHECK_THROWS_AS(sweep_n(o, {}), InvalidArgument);
    CHECK_THROWS_AS(sweep_snr(o, {10.0}, 12), InvalidArgument);
    o.seeds = 0;
    CHECK_THROWS_AS(sweep_n(o, {100}), InvalidArgument);
}

TEST_CASE("run_one turns failures into records") {
    const auto truth = make_system(SystemId::Linear2D);
    // too short for 10-fold CV with two rows per fold
    const BenchmarkRecord r = run_one(truth, (VectorXd(2) << 1.0, 0.5).finished(), 15, 0.01, 49.0,
                                      sparse::Method::Lasso, 1, 2, 10, 5);
    CHECK_FALSE(r.success);
    CHECK(r.error == "invalid-argument");
    CHECK(r.selected_terms == TermSets{{}, {}});
}

TEST_CASE("timing_run shape") {
    const TimingResult t = timing_run(SystemId::Linear2D, sparse::Method::Lasso, {100, 200}, 2, 3, 10);
    CHECK(t.rows.size() == 4);
    REQUIRE(t.quantiles.size() == 2);
    CHECK(t.quantiles[0].n == 100);
    for (const auto& q : t.quantiles) {
        CHECK(q.q1 <= q.median);
        CHECK(q.median <= q.q3);
    }
    for (const auto& r : t.rows) CHECK(r.wall_seconds > 0.0);
    CHECK(std::isfinite(t.fit.slope));
    CHECK_THROWS_AS(timing_run(SystemId::Linear2D, sparse::Method::Lasso, {100}, 0, 3), InvalidArgument);
}
