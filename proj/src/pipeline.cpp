#include "argos/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "argos/error.hpp"
#include "argos/parallel.hpp"
#include "argos/rng.hpp"
#include "argos/savgol.hpp"

namespace argos {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

MatrixXd predictors_of(const design::DesignMatrix& d) { return d.values.rightCols(d.values.cols() - 1); }

// Point estimate on a predictor matrix (design without its constant column).
PointEstimate estimate(const MatrixXd& x, const VectorXd& y, sparse::Method method, std::uint64_t seed,
                       int folds) {
    const Index n = x.rows();
    const Index q = x.cols();
    if (n < folds) throw InsufficientData("point estimate: fewer rows than folds");
    const sparse::FoldedProblem prob(x, y, sparse::assign_folds(n, folds, seed));
    const sparse::SparseFit fit = sparse::fit_sparse(prob, method);

    PointEstimate out;
    out.kkt_violation = fit.max_kkt_violation;
    out.lambda_star = fit.lambda_star;
    out.eta_supports = threshold_supports(fit.beta);

    struct Candidate {
        bool feasible = false;
        sparse::OlsFit ols;
        double bic = 0.0;
    };
    std::map<std::vector<Index>, Candidate> cache;
    double best_bic = std::numeric_limits<double>::infinity();
    const Candidate* best = nullptr;
    for (std::size_t i = 0; i < out.eta_supports.size(); ++i) {
        const auto& support = out.eta_supports[i];
        auto [it, inserted] = cache.try_emplace(support);
        Candidate& c = it->second;
        if (inserted) {
            try {
                c.ols = sparse::ols_on_support(x, y, support, prob.full());
                c.bic = bic_score(c.ols.rss, n, static_cast<Index>(support.size()) + 1);
                c.feasible = true;
            } catch (const SingularFit&) {
                c.feasible = false;
            }
        }
        // larger eta wins ties: it is the sparser (or identical) model
        if (c.feasible && (best == nullptr || c.bic <= best_bic)) {
            best = &c;
            best_bic = c.bic;
            out.eta_index = static_cast<int>(i);
        }
    }

    sparse::OlsFit chosen;
    if (best != nullptr) {
        chosen = best->ols;
        out.bic = best->bic;
        out.support.clear();
        for (Index k : out.eta_supports[static_cast<std::size_t>(out.eta_index)]) out.support.push_back(k + 1);
    } else {
        chosen = sparse::ols_on_support(x, y, {}, prob.full());
        out.bic = bic_score(chosen.rss, n, 1);
        out.eta_index = -1;
    }
    out.coefficients = VectorXd::Zero(q + 1);
    out.coefficients[0] = chosen.intercept;
    out.coefficients.tail(q) = chosen.beta;
    out.residuals = std::move(chosen.residuals);
    return out;
}

}  // namespace

std::string to_string(sparse::Method method) {
    return method == sparse::Method::Lasso ? "lasso" : "alasso";
}

sparse::Method parse_method(const std::string& name) {
    if (name == "lasso") return sparse::Method::Lasso;
    if (name == "alasso" || name == "adaptive-lasso" || name == "adaptive_lasso") {
        return sparse::Method::AdaptiveLasso;
    }
    throw InvalidArgument("unknown method '" + name + "' (expected lasso or alasso)");
}

double bic_score(double rss, Index n, Index k) {
    if (!(rss >= 0.0)) throw InvalidArgument("bic: rss must be non-negative");
    if (n <= k || k < 0) throw InvalidArgument("bic: need n > k >= 0");
    if (rss == 0.0) return -std::numeric_limits<double>::infinity();
    const double nn = static_cast<double>(n);
    return nn * std::log(rss / nn) + static_cast<double>(k) * std::log(nn);
}

std::vector<std::vector<Index>> threshold_supports(const VectorXd& beta) {
    std::vector<std::vector<Index>> out;
    out.reserve(kEtaGrid.size());
    for (double eta : kEtaGrid) {
        std::vector<Index> s;
        for (Index k = 0; k < beta.size(); ++k) {
            if (std::abs(beta[k]) >= eta) s.push_back(k);
        }
        out.push_back(std::move(s));
    }
    return out;
}

PointEstimate point_estimate(const design::DesignMatrix& trimmed, const VectorXd& xdot,
                             sparse::Method method, std::uint64_t seed, int folds) {
    if (xdot.size() != trimmed.values.rows()) throw InvalidArgument("point_estimate: length mismatch");
    return estimate(predictors_of(trimmed), xdot, method, seed, folds);
}

PercentileRanks percentile_ranks(int B, double alpha) {
    if (B < 1) throw InvalidArgument("bootstrap: B must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("bootstrap: alpha must lie in (0, 1)");
    int lo = static_cast<int>(std::floor(B * alpha / 2.0 + 1e-9));
    lo = std::max(lo, 1);
    return {lo, B - lo + 1};
}

BootstrapResult bootstrap_ci(const design::DesignMatrix& trimmed, const VectorXd& xdot,
                             sparse::Method method, int B, double alpha, std::uint64_t seed, int folds,
                             int workers) {
    const Index n = trimmed.values.rows();
    if (n < 20) throw InsufficientData("bootstrap: need at least 20 rows");
    if (xdot.size() != n) throw InvalidArgument("bootstrap: length mismatch");
    const PercentileRanks ranks = percentile_ranks(B, alpha);
    const MatrixXd x = predictors_of(trimmed);
    const Index p = trimmed.values.cols();
    const int max_draws = 3 * B;

    BootstrapResult out;
    out.samples = MatrixXd::Zero(B, p);
    std::vector<int> attempts(static_cast<std::size_t>(B), 0);
    std::vector<double> kkt(static_cast<std::size_t>(B), 0.0);
    std::atomic<int> draws{0};

    parallel_for(static_cast<std::size_t>(B), workers, [&](std::size_t r) {
        MatrixXd xb(n, x.cols());
        VectorXd yb(n);
        for (int attempt = 0;; ++attempt) {
            if (draws.fetch_add(1) >= max_draws) {
                throw Error("bootstrap-failure", "bootstrap: exceeded " + std::to_string(max_draws) +
                                                     " resampling draws");
            }
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(attempt)}));
            std::uniform_int_distribution<Index> pick(0, n - 1);
            for (Index i = 0; i < n; ++i) {
                const Index src = pick(rng);
                xb.row(i) = x.row(src);
                yb[i] = xdot[src];
            }
            try {
                const PointEstimate pe = estimate(xb, yb, method, derive_seed(seed, {tag("folds"), r, static_cast<std::uint64_t>(attempt)}), folds);
                out.samples.row(static_cast<Index>(r)) = pe.coefficients.transpose();
                kkt[r] = pe.kkt_violation;
                attempts[r] = attempt + 1;
                return;
            } catch (const NonConvergence&) {
            } catch (const DegenerateGrid&) {
            } catch (const InvalidArgument&) {
            }
        }
    });

    out.draws = 0;
    for (int a : attempts) out.draws += a;
    out.max_kkt_violation = *std::max_element(kkt.begin(), kkt.end());
    out.lower.resize(p);
    out.upper.resize(p);
    std::vector<double> column(static_cast<std::size_t>(B));
    for (Index k = 0; k < p; ++k) {
        for (int r = 0; r < B; ++r) column[static_cast<std::size_t>(r)] = out.samples(r, k);
        std::sort(column.begin(), column.end());
        out.lower[k] = column[static_cast<std::size_t>(ranks.lower - 1)];
        out.upper[k] = column[static_cast<std::size_t>(ranks.upper - 1)];
    }
    return out;
}

std::vector<std::string> EquationModel::support_names() const {
    std::vector<std::string> out;
    for (Index k : support) out.push_back(term_names[static_cast<std::size_t>(k)]);
    return out;
}

EquationModel select_final(const VectorXd& point, const VectorXd& lower, const VectorXd& upper) {
    if (point.size() != lower.size() || point.size() != upper.size()) {
        throw InvalidArgument("select_final: misaligned term lists");
    }
    EquationModel m;
    m.point_estimate = point;
    m.ci_lower = lower;
    m.ci_upper = upper;
    m.coefficients = VectorXd::Zero(point.size());
    for (Index k = 0; k < point.size(); ++k) {
        const bool excludes_zero = lower[k] > 0.0 || upper[k] < 0.0;
        const bool contains_point = lower[k] <= point[k] && point[k] <= upper[k];
        if (excludes_zero && contains_point) {
            m.support.push_back(k);
            m.coefficients[k] = point[k];
        }
    }
    m.intercept = point.size() > 0 ? m.coefficients[0] : 0.0;
    return m;
}

EquationModel identify_equation(const design::DesignMatrix& theta0, const VectorXd& xdot, int equation,
                                const PipelineOptions& options) {
    const std::uint64_t eq_seed = derive_seed(options.seed, {static_cast<std::uint64_t>(equation)});

    const sparse::SparseFit initial =
        sparse::fit_sparse(predictors_of(theta0), xdot, options.method, derive_seed(eq_seed, {tag("initial")}),
                           options.folds);
    VectorXd full = VectorXd::Zero(theta0.values.cols());
    full.tail(initial.beta.size()) = initial.beta;
    const int degree = design::trim_degree(full, theta0.basis);
    const design::DesignMatrix theta1 = design::truncate(theta0, degree);

    const PointEstimate pe =
        point_estimate(theta1, xdot, options.method, derive_seed(eq_seed, {tag("point")}), options.folds);
    const BootstrapResult boot =
        bootstrap_ci(theta1, xdot, options.method, options.bootstrap_samples, options.alpha,
                     derive_seed(eq_seed, {tag("bootstrap")}), options.folds, options.workers);

    EquationModel model = select_final(pe.coefficients, boot.lower, boot.upper);
    model.term_names = theta1.column_names;
    model.bic = pe.bic;
    model.method = options.method;
    model.trimmed_degree = degree;
    model.max_kkt_violation =
        std::max({initial.max_kkt_violation, pe.kkt_violation, boot.max_kkt_violation});
    model.fitted = theta1.values * model.coefficients;
    model.residuals = xdot - model.fitted;
    return model;
}

IdentifiedSystem identify_system(const MatrixXd& noisy_states, double dt, const PipelineOptions& options) {
    const auto t_start = Clock::now();
    const Index n = noisy_states.rows();
    const Index m = noisy_states.cols();
    if (n < savgol::kMinWindow) {
        throw InsufficientData("identify: need at least " + std::to_string(savgol::kMinWindow) + " rows");
    }
    if (m < 1) throw InvalidArgument("identify: no state columns");
    if (!noisy_states.allFinite()) throw InvalidArgument("identify: states must be finite");

    IdentifiedSystem sys;
    sys.provenance.dt = dt;
    sys.provenance.n = n;
    sys.provenance.seed = options.seed;
    sys.provenance.method = options.method;
    sys.provenance.max_degree = options.max_degree;
    sys.provenance.bootstrap_samples = options.bootstrap_samples;
    sys.provenance.alpha = options.alpha;
    sys.provenance.snr_db = std::numeric_limits<double>::infinity();

    MatrixXd smooth(n, m);
    MatrixXd deriv(n, m);
    for (Index j = 0; j < m; ++j) {
        const savgol::SmoothedSignal s = savgol::auto_smooth(noisy_states.col(j), dt);
        smooth.col(j) = s.x_smooth;
        deriv.col(j) = s.x_dot;
        sys.provenance.windows.push_back(s.chosen_window);
    }
    sys.provenance.smoothing_seconds = seconds_since(t_start);

    sys.basis_initial = design::enumerate_monomials(static_cast<int>(m), options.max_degree);
    const design::DesignMatrix theta0 = design::build_design(smooth, sys.basis_initial);

    for (Index j = 0; j < m; ++j) {
        const auto t_eq = Clock::now();
        try {
            sys.equations.push_back(identify_equation(theta0, deriv.col(j), static_cast<int>(j), options));
        } catch (const Error& e) {
            throw Error(e.code(), "equation " + std::to_string(j + 1) + ": " + e.what());
        }
        sys.trimmed_degrees.push_back(sys.equations.back().trimmed_degree);
        sys.provenance.equation_seconds.push_back(seconds_since(t_eq));
    }
    sys.provenance.total_seconds = seconds_since(t_start);
    return sys;
}

}  // namespace argos
