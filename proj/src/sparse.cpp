#include "argos/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "argos/error.hpp"
#include "argos/rng.hpp"

namespace argos::sparse {

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

VectorXd unit_weights_if_empty(const VectorXd& w, Index p) {
    if (w.size() == 0) return VectorXd::Ones(p);
    if (w.size() != p) throw InvalidArgument("penalty weights have the wrong length");
    if ((w.array() < 0.0).any() || !w.allFinite()) {
        throw InvalidArgument("penalty weights must be finite and non-negative");
    }
    return w;
}

std::vector<double> log_spaced(double hi, double lo, int K) {
    std::vector<double> grid(static_cast<std::size_t>(K));
    if (K == 1) {
        grid[0] = hi;
        return grid;
    }
    const double lhi = std::log(hi);
    const double llo = std::log(lo);
    for (int i = 0; i < K; ++i) {
        grid[static_cast<std::size_t>(i)] = std::exp(lhi + (llo - lhi) * i / (K - 1));
    }
    grid.front() = hi;
    grid.back() = lo;
    return grid;
}

// Problem scaled to unit-sd predictors and response.
struct ScaledProblem {
    MatrixXd gram;
    VectorXd corr;
    VectorXd x_scale;  // 0 for excluded columns
    VectorXd x_mean;
    double y_scale = 0.0;
    double y_mean = 0.0;
    bool degenerate = false;
};

ScaledProblem scale_problem(const CrossProducts& s) {
    ScaledProblem out;
    const Index p = s.xx.rows();
    const double n = s.count;
    out.x_mean = s.x_mean;
    out.y_mean = s.y_mean;
    out.x_scale = VectorXd::Zero(p);
    for (Index k = 0; k < p; ++k) {
        const double sd = std::sqrt(std::max(0.0, s.xx(k, k)) / n);
        if (sd > 0.0 && sd > 1e-13 * std::abs(s.x_mean[k])) out.x_scale[k] = sd;
    }
    out.y_scale = std::sqrt(std::max(0.0, s.yy) / n);
    out.gram = MatrixXd::Zero(p, p);
    out.corr = VectorXd::Zero(p);
    bool any = false;
    for (Index i = 0; i < p; ++i) {
        if (out.x_scale[i] == 0.0) continue;
        any = true;
        for (Index j = 0; j < p; ++j) {
            if (out.x_scale[j] == 0.0) continue;
            out.gram(i, j) = s.xx(i, j) / (n * out.x_scale[i] * out.x_scale[j]);
        }
        out.gram(i, i) = 1.0;
        if (out.y_scale > 0.0) out.corr[i] = s.xy[i] / (n * out.x_scale[i] * out.y_scale);
    }
    out.degenerate = !any || out.y_scale == 0.0 || out.y_scale <= 1e-13 * std::abs(s.y_mean);
    return out;
}

// Ridge solutions over a lambda path via one eigendecomposition.
class RidgePath {
public:
    explicit RidgePath(const ScaledProblem& sp) {
        for (Index k = 0; k < sp.gram.rows(); ++k) {
            if (sp.x_scale[k] != 0.0) valid_.push_back(k);
        }
        const auto a = static_cast<Index>(valid_.size());
        MatrixXd g(a, a);
        VectorXd c(a);
        for (Index i = 0; i < a; ++i) {
            c[i] = sp.corr[valid_[i]];
            for (Index j = 0; j < a; ++j) g(i, j) = sp.gram(valid_[i], valid_[j]);
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(g);
        vectors_ = es.eigenvectors();
        values_ = es.eigenvalues();
        projected_ = vectors_.transpose() * c;
        p_ = sp.gram.rows();
    }

    VectorXd solve(double lambda) const {
        VectorXd out = VectorXd::Zero(p_);
        const VectorXd scaled = projected_.array() / (values_.array() + lambda);
        const VectorXd sol = vectors_ * scaled;
        for (std::size_t i = 0; i < valid_.size(); ++i) out[valid_[i]] = sol[static_cast<Index>(i)];
        return out;
    }

private:
    std::vector<Index> valid_;
    MatrixXd vectors_;
    VectorXd values_;
    VectorXd projected_;
    Index p_ = 0;
};

// Scaled-space solution -> original-scale coefficients and intercept.
void to_original(const ScaledProblem& sp, const VectorXd& beta_scaled, Coefficients& c) {
    c.beta.resize(beta_scaled.size());
    for (Index k = 0; k < beta_scaled.size(); ++k) {
        c.beta[k] = sp.x_scale[k] != 0.0 ? beta_scaled[k] * sp.y_scale / sp.x_scale[k] : 0.0;
    }
    c.intercept = sp.y_mean - sp.x_mean.dot(c.beta);
}

double holdout_sse(const CrossProducts& h, const Coefficients& c) {
    double quad = 0.0;
    for (Index j = 0; j < c.beta.size(); ++j) {
        if (c.beta[j] == 0.0) continue;
        quad += c.beta[j] * h.xx.col(j).dot(c.beta);
    }
    const double offset = h.y_mean - c.intercept - h.x_mean.dot(c.beta);
    const double sse = h.yy - 2.0 * c.beta.dot(h.xy) + quad + h.count * offset * offset;
    return std::max(0.0, sse);
}

}  // namespace

// ---------------------------------------------------------------------------

StandardizedData standardize(const MatrixXd& predictors, const VectorXd& y) {
    const Index n = predictors.rows();
    if (n < 2) throw InvalidArgument("standardize: need at least 2 rows");
    if (y.size() != n) throw InvalidArgument("standardize: response length mismatch");
    StandardizedData out;
    out.info.column_means = predictors.colwise().mean().transpose();
    out.info.column_scales = VectorXd::Zero(predictors.cols());
    out.info.response_mean = y.mean();
    out.x = predictors.rowwise() - out.info.column_means.transpose();
    for (Index k = 0; k < predictors.cols(); ++k) {
        const double sd = std::sqrt(out.x.col(k).squaredNorm() / static_cast<double>(n));
        if (sd > 0.0 && sd > 1e-13 * std::abs(out.info.column_means[k])) {
            out.info.column_scales[k] = sd;
            out.x.col(k) /= sd;
        } else {
            out.x.col(k).setZero();
        }
    }
    out.y = y.array() - out.info.response_mean;
    return out;
}

Coefficients destandardize(const VectorXd& beta_std, const Standardization& info) {
    Coefficients c;
    c.beta = VectorXd::Zero(beta_std.size());
    for (Index k = 0; k < beta_std.size(); ++k) {
        if (!info.is_constant(k)) c.beta[k] = beta_std[k] / info.column_scales[k];
    }
    c.intercept = info.response_mean - info.column_means.dot(c.beta);
    return c;
}

std::vector<double> lambda_grid(const MatrixXd& std_x, const VectorXd& centered_y, int K,
                                const VectorXd& weights) {
    if (K < 1) throw InvalidArgument("lambda_grid: K must be positive");
    const Index n = std_x.rows();
    const Index p = std_x.cols();
    const VectorXd w = unit_weights_if_empty(weights, p);
    const VectorXd corr = std_x.transpose() * centered_y / static_cast<double>(n);
    double lmax = 0.0;
    for (Index k = 0; k < p; ++k) {
        if (w[k] > 0.0) lmax = std::max(lmax, std::abs(corr[k]) / w[k]);
    }
    if (!(lmax > 0.0)) throw DegenerateGrid("lambda_grid: lambda_max is zero (constant response)");
    return log_spaced(lmax, lmax * (n > p ? 1e-4 : 1e-2), K);
}

std::vector<double> refine_lambda(double lambda0_star) {
    if (!(lambda0_star > 0.0) || !std::isfinite(lambda0_star)) {
        throw InvalidArgument("refine_lambda: lambda must be positive");
    }
    return log_spaced(1.1 * lambda0_star, lambda0_star / 10.0, kGridSize);
}

VectorXd adaptive_weights(const VectorXd& pilot, double nu) {
    VectorXd w(pilot.size());
    for (Index k = 0; k < pilot.size(); ++k) {
        const double a = std::abs(pilot[k]);
        w[k] = a == 0.0 ? kWeightCap : std::min(1.0 / std::pow(a, nu), kWeightCap);
    }
    return w;
}

// ---------------------------------------------------------------------------

double kkt_violation(const MatrixXd& gram, const VectorXd& corr, const VectorXd& beta, double lambda,
                     const VectorXd& weights) {
    const VectorXd grad = corr - gram * beta;
    double worst = 0.0;
    for (Index k = 0; k < beta.size(); ++k) {
        if (gram(k, k) <= 0.0) continue;
        const double t = lambda * weights[k];
        const double v = beta[k] == 0.0 ? std::max(0.0, std::abs(grad[k]) - t)
                                        : std::abs(grad[k] - t * sign(beta[k]));
        worst = std::max(worst, v);
    }
    return worst;
}

namespace {

// Coordinate descent on one Gram problem with reusable buffers, so a path
// of warm-started solves does not allocate.
class CdSolver {
public:
    CdSolver(const MatrixXd& gram, const VectorXd& corr, const VectorXd& weights)
        : gram_(gram), corr_(corr), w_(weights) {
        const Index p = corr.size();
        grad_.resize(p);
        fitted_.resize(p);
        cand_.resize(p);
        rhs_.resize(p);
        chol_.resize(p, p);
        active_.reserve(static_cast<std::size_t>(p));
        pattern_.resize(static_cast<std::size_t>(p));
        previous_.resize(static_cast<std::size_t>(p));
        tried_.resize(static_cast<std::size_t>(p));
    }

    // Solves in place from the warm start in beta; returns the sweep count.
    // Consecutive calls on an untouched beta reuse the running gradient.
    long solve(double lambda, VectorXd& beta) {
        const Index p = corr_.size();
        if (beta.data() != synced_) {
            for (Index k = 0; k < p; ++k) {
                if (gram_(k, k) <= 0.0) beta[k] = 0.0;
            }
            grad_ = corr_;
            for (Index k = 0; k < p; ++k) {
                if (beta[k] != 0.0) grad_.noalias() -= beta[k] * gram_.col(k);
            }
        }
        synced_ = nullptr;
        const long sweeps = descend(lambda, beta);
        synced_ = beta.data();
        return sweeps;
    }

    double kkt(double lambda, const VectorXd& beta) {
        fitted_.noalias() = gram_ * beta;
        double worst = 0.0;
        for (Index k = 0; k < beta.size(); ++k) {
            if (gram_(k, k) <= 0.0) continue;
            const double g = corr_[k] - fitted_[k];
            const double t = lambda * w_[k];
            const double v = beta[k] == 0.0 ? std::max(0.0, std::abs(g) - t) : std::abs(g - t * sign(beta[k]));
            worst = std::max(worst, v);
        }
        return worst;
    }

private:
    long descend(double lambda, VectorXd& beta) {
        const Index p = corr_.size();
        // The exact solve on the signed active set is tried once per pattern,
        // after the pattern survives a full sweep unchanged.
        std::fill(previous_.begin(), previous_.end(), 2);
        std::fill(tried_.begin(), tried_.end(), 2);
        for (long sweep = 1; sweep <= kMaxSweeps; ++sweep) {
            double max_change = 0.0;
            for (Index k = 0; k < p; ++k) {
                const double gkk = gram_(k, k);
                if (gkk <= 0.0) continue;
                const double old = beta[k];
                const double updated = soft_threshold(grad_[k] + gkk * old, lambda * w_[k]) / gkk;
                const double delta = updated - old;
                if (delta != 0.0) {
                    grad_.noalias() -= delta * gram_.col(k);
                    beta[k] = updated;
                    max_change = std::max(max_change, std::abs(delta));
                }
            }
            if (max_change < kConvergenceTol) return sweep;

            for (Index k = 0; k < p; ++k) pattern_[static_cast<std::size_t>(k)] = static_cast<signed char>(sign(beta[k]));
            if (pattern_ == previous_ && pattern_ != tried_) {
                tried_ = pattern_;
                if (exact(lambda, beta)) return sweep;
            }
            std::swap(previous_, pattern_);
        }
        const double v = kkt(lambda, beta);
        throw NonConvergence(v, "lasso: no convergence after " + std::to_string(kMaxSweeps) +
                                    " sweeps (max KKT violation " + std::to_string(v) + ")");
    }

    // Active-set finish from the current signed support; true when the
    // result passes the KKT check.
    bool exact(double lambda, VectorXd& beta) {
        active_.clear();
        for (Index k = 0; k < beta.size(); ++k) {
            if (beta[k] != 0.0) active_.push_back(k);
        }
        bool moved = false;
        for (;;) {
            if (!face_solve(lambda, beta)) {
                if (moved) {
                    fitted_.noalias() = gram_ * beta;
                    grad_ = corr_ - fitted_;
                }
                return false;
            }
            // A sign flip means the face minimiser lies outside the orthant:
            // step toward it until the first coefficient reaches zero, drop
            // that coordinate and solve again on the smaller face.
            double step = 1.0;
            for (Index ki : active_) {
                if (sign(cand_[ki]) != sign(beta[ki])) step = std::min(step, beta[ki] / (beta[ki] - cand_[ki]));
            }
            if (step >= 1.0) break;
            moved = true;
            std::size_t kept = 0;
            for (Index ki : active_) {
                const double s0 = sign(beta[ki]);
                const double v = beta[ki] + step * (cand_[ki] - beta[ki]);
                const bool crossed = sign(cand_[ki]) != s0 && beta[ki] / (beta[ki] - cand_[ki]) <= step;
                if (crossed || sign(v) != s0) {
                    beta[ki] = 0.0;
                } else {
                    beta[ki] = v;
                    active_[kept++] = ki;
                }
            }
            active_.resize(kept);
        }
        // The candidate minimises over the current face; keep it and let CD
        // pick up any violating inactive coordinates.
        const bool optimal = kkt(lambda, cand_) <= 1e-10;
        beta = cand_;
        grad_ = corr_ - fitted_;
        return optimal;
    }

    // Cholesky solve of the stationarity equations on active_ with the signs
    // of beta, refined against the exact Gram, into cand_.
    bool face_solve(double lambda, const VectorXd& beta) {
        const auto a = static_cast<Index>(active_.size());
        for (Index i = 0; i < a; ++i) {
            const Index ki = active_[static_cast<std::size_t>(i)];
            rhs_[i] = corr_[ki] - lambda * w_[ki] * sign(beta[ki]);
            for (Index j = 0; j <= i; ++j) chol_(i, j) = gram_(ki, active_[static_cast<std::size_t>(j)]);
        }
        for (Index j = 0; j < a; ++j) {
            double d = chol_(j, j);
            for (Index k = 0; k < j; ++k) d -= chol_(j, k) * chol_(j, k);
            if (!(d > 1e-12 * gram_(active_[static_cast<std::size_t>(j)], active_[static_cast<std::size_t>(j)]))) {
                return false;
            }
            d = std::sqrt(d);
            chol_(j, j) = d;
            for (Index i = j + 1; i < a; ++i) {
                double v = chol_(i, j);
                for (Index k = 0; k < j; ++k) v -= chol_(i, k) * chol_(j, k);
                chol_(i, j) = v / d;
            }
        }
        substitute(a);
        cand_.setZero();
        for (Index i = 0; i < a; ++i) cand_[active_[static_cast<std::size_t>(i)]] = rhs_[i];
        for (int round = 0;; ++round) {
            fitted_.noalias() = gram_ * cand_;
            if (round == 3) break;
            double worst = 0.0;
            for (Index i = 0; i < a; ++i) {
                const Index ki = active_[static_cast<std::size_t>(i)];
                rhs_[i] = corr_[ki] - lambda * w_[ki] * sign(beta[ki]) - fitted_[ki];
                worst = std::max(worst, std::abs(rhs_[i]));
            }
            if (worst <= 1e-14) break;
            substitute(a);
            for (Index i = 0; i < a; ++i) cand_[active_[static_cast<std::size_t>(i)]] += rhs_[i];
        }
        return cand_.allFinite();
    }

    // rhs_ <- (L L')^{-1} rhs_ on the leading a entries
    void substitute(Index a) {
        for (Index i = 0; i < a; ++i) {
            double v = rhs_[i];
            for (Index k = 0; k < i; ++k) v -= chol_(i, k) * rhs_[k];
            rhs_[i] = v / chol_(i, i);
        }
        for (Index i = a - 1; i >= 0; --i) {
            double v = rhs_[i];
            for (Index k = i + 1; k < a; ++k) v -= chol_(k, i) * rhs_[k];
            rhs_[i] = v / chol_(i, i);
        }
    }

    const MatrixXd& gram_;
    const VectorXd& corr_;
    const VectorXd& w_;
    VectorXd grad_;
    VectorXd fitted_;
    VectorXd cand_;
    VectorXd rhs_;
    MatrixXd chol_;
    std::vector<Index> active_;
    std::vector<signed char> pattern_;
    std::vector<signed char> previous_;
    std::vector<signed char> tried_;
    const double* synced_ = nullptr;
};

}  // namespace

LassoSolution lasso_gram(const MatrixXd& gram, const VectorXd& corr, double lambda,
                         const VectorXd& weights_in, const VectorXd& warm_start) {
    const Index p = corr.size();
    if (!(lambda >= 0.0)) throw InvalidArgument("lasso: lambda must be non-negative");
    const VectorXd w = unit_weights_if_empty(weights_in, p);
    LassoSolution out;
    out.beta = warm_start.size() == p ? warm_start : VectorXd::Zero(p);
    CdSolver solver(gram, corr, w);
    out.sweeps = solver.solve(lambda, out.beta);
    out.kkt_violation = solver.kkt(lambda, out.beta);
    return out;
}

VectorXd lasso_cd(const MatrixXd& std_x, const VectorXd& centered_y, double lambda,
                  const VectorXd& weights, const VectorXd& warm_start) {
    const double n = static_cast<double>(std_x.rows());
    const MatrixXd gram = std_x.transpose() * std_x / n;
    const VectorXd corr = std_x.transpose() * centered_y / n;
    return lasso_gram(gram, corr, lambda, weights, warm_start).beta;
}

VectorXd ridge_closed_form(const MatrixXd& std_x, const VectorXd& centered_y, double lambda) {
    if (!(lambda >= 0.0)) throw InvalidArgument("ridge: lambda must be non-negative");
    const double n = static_cast<double>(std_x.rows());
    const Index p = std_x.cols();
    const MatrixXd a = std_x.transpose() * std_x / n + lambda * MatrixXd::Identity(p, p);
    const VectorXd b = std_x.transpose() * centered_y / n;
    if (lambda == 0.0) {
        Eigen::ColPivHouseholderQR<MatrixXd> qr(std_x);
        if (qr.rank() < p) throw SingularFit("ridge: lambda = 0 with rank-deficient design");
        return qr.solve(centered_y);
    }
    Eigen::LLT<MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw SingularFit("ridge: system is not positive definite");
    return llt.solve(b);
}

// ---------------------------------------------------------------------------

CrossProducts summarize(const MatrixXd& x, const VectorXd& y, const std::vector<Index>& rows) {
    CrossProducts s;
    const Index p = x.cols();
    const auto r = static_cast<Index>(rows.size());
    s.count = static_cast<double>(r);
    if (r == 0) {
        s.x_mean = VectorXd::Zero(p);
        s.xx = MatrixXd::Zero(p, p);
        s.xy = VectorXd::Zero(p);
        return s;
    }
    MatrixXd xs(r, p);
    VectorXd ys(r);
    for (Index i = 0; i < r; ++i) {
        xs.row(i) = x.row(rows[static_cast<std::size_t>(i)]);
        ys[i] = y[rows[static_cast<std::size_t>(i)]];
    }
    s.x_mean = xs.colwise().mean().transpose();
    s.y_mean = ys.mean();
    xs.rowwise() -= s.x_mean.transpose();
    ys.array() -= s.y_mean;
    s.xx = MatrixXd::Zero(p, p);
    s.xx.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose());
    s.xx.triangularView<Eigen::StrictlyUpper>() = s.xx.transpose();
    s.xy = xs.transpose() * ys;
    s.yy = ys.squaredNorm();
    return s;
}

CrossProducts merge(const std::vector<const CrossProducts*>& parts) {
    if (parts.empty()) throw InvalidArgument("merge: no parts");
    const Index p = parts.front()->xx.rows();
    CrossProducts s;
    s.x_mean = VectorXd::Zero(p);
    for (const auto* q : parts) {
        s.count += q->count;
        s.x_mean += q->count * q->x_mean;
        s.y_mean += q->count * q->y_mean;
    }
    s.x_mean /= s.count;
    s.y_mean /= s.count;
    s.xx = MatrixXd::Zero(p, p);
    s.xy = VectorXd::Zero(p);
    for (const auto* q : parts) {
        const VectorXd dx = q->x_mean - s.x_mean;
        const double dy = q->y_mean - s.y_mean;
        s.xx += q->xx;
        s.xx.noalias() += q->count * dx * dx.transpose();
        s.xy += q->xy + q->count * dy * dx;
        s.yy += q->yy + q->count * dy * dy;
    }
    return s;
}

std::vector<int> assign_folds(Index n, int folds, std::uint64_t seed) {
    if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % folds);
    Rng rng(derive_seed(seed, {tag("folds")}));
    // Fisher-Yates with an explicit uniform draw keeps the permutation
    // independent of the standard library's shuffle implementation.
    for (std::size_t i = labels.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(labels[i - 1], labels[pick(rng)]);
    }
    return labels;
}

FoldedProblem::FoldedProblem(const MatrixXd& x, const VectorXd& y, std::vector<int> fold_of_row)
    : n_(x.rows()), p_(x.cols()), fold_of_row_(std::move(fold_of_row)) {
    if (y.size() != n_) throw InvalidArgument("cross-validation: response length mismatch");
    if (static_cast<Index>(fold_of_row_.size()) != n_) {
        throw InvalidArgument("cross-validation: fold labels length mismatch");
    }
    const int folds = fold_of_row_.empty() ? 0 : *std::max_element(fold_of_row_.begin(), fold_of_row_.end()) + 1;
    std::vector<std::vector<Index>> rows(static_cast<std::size_t>(folds));
    for (Index i = 0; i < n_; ++i) rows[static_cast<std::size_t>(fold_of_row_[static_cast<std::size_t>(i)])].push_back(i);
    for (int f = 0; f < folds; ++f) {
        if (rows[static_cast<std::size_t>(f)].size() < 2) {
            throw InvalidArgument("cross-validation: fold " + std::to_string(f) + " has fewer than 2 rows (n = " +
                                  std::to_string(n_) + ")");
        }
    }
    holdout_.reserve(static_cast<std::size_t>(folds));
    for (const auto& r : rows) holdout_.push_back(summarize(x, y, r));
    std::vector<const CrossProducts*> all;
    for (const auto& h : holdout_) all.push_back(&h);
    full_ = merge(all);
    for (int f = 0; f < folds; ++f) {
        std::vector<const CrossProducts*> others;
        for (int g = 0; g < folds; ++g) {
            if (g != f) others.push_back(&holdout_[static_cast<std::size_t>(g)]);
        }
        training_.push_back(merge(others));
    }
}

bool FoldedProblem::degenerate() const { return scale_problem(full_).degenerate; }

std::vector<double> FoldedProblem::default_grid(const PenaltySpec& spec, int K) const {
    const ScaledProblem sp = scale_problem(full_);
    if (sp.degenerate) throw DegenerateGrid("lambda_grid: constant response or predictors");
    const VectorXd w = spec.kind == PenaltyKind::Ridge ? VectorXd::Ones(p_) : unit_weights_if_empty(spec.weights, p_);
    double lmax = 0.0;
    for (Index k = 0; k < p_; ++k) {
        if (sp.x_scale[k] == 0.0 || w[k] <= 0.0) continue;
        lmax = std::max(lmax, std::abs(sp.corr[k]) * sp.y_scale / w[k]);
    }
    if (!(lmax > 0.0)) throw DegenerateGrid("lambda_grid: lambda_max is zero");
    return log_spaced(lmax, lmax * (n_ > p_ ? 1e-4 : 1e-2), K);
}

PathFit FoldedProblem::fit_path(const PenaltySpec& spec, const std::vector<double>& lambdas, bool full_path) const {
    const auto K = static_cast<Index>(lambdas.size());
    if (K == 0) throw InvalidArgument("fit_path: empty lambda grid");
    const bool ridge = spec.kind == PenaltyKind::Ridge;
    const VectorXd w = ridge ? VectorXd::Ones(p_) : unit_weights_if_empty(spec.weights, p_);

    PathFit out;
    out.lambdas = lambdas;
    out.coefficients = MatrixXd::Zero(p_, K);
    out.intercepts = VectorXd::Zero(K);
    out.cv_mse = VectorXd::Zero(K);
    out.cv_se = VectorXd::Zero(K);
    out.kkt_violation = VectorXd::Zero(K);

    // Solves one scaled problem along grid points 0..last; visit(i, coefficients, kkt).
    Coefficients c;
    auto run = [&](const ScaledProblem& sp, Index last, auto&& visit) {
        if (sp.degenerate) {
            c.beta = VectorXd::Zero(p_);
            c.intercept = sp.y_mean;
            for (Index i = 0; i <= last; ++i) visit(i, c, 0.0);
            return;
        }
        if (ridge) {
            const RidgePath path(sp);
            for (Index i = 0; i <= last; ++i) {
                to_original(sp, path.solve(lambdas[static_cast<std::size_t>(i)]), c);
                visit(i, c, 0.0);
            }
            return;
        }
        VectorXd beta = VectorXd::Zero(p_);
        CdSolver solver(sp.gram, sp.corr, w);
        for (Index i = 0; i <= last; ++i) {
            const double lam = lambdas[static_cast<std::size_t>(i)] / sp.y_scale;
            if (!(lam >= 0.0)) throw InvalidArgument("lasso: lambda must be non-negative");
            solver.solve(lam, beta);
            to_original(sp, beta, c);
            visit(i, c, solver.kkt(lam, beta));
        }
    };

    const int F = folds();
    MatrixXd fold_mse(F, K);
    for (int f = 0; f < F; ++f) {
        const auto& h = holdout_[static_cast<std::size_t>(f)];
        run(scale_problem(training_[static_cast<std::size_t>(f)]), K - 1, [&](Index i, const Coefficients& c, double kkt) {
            out.max_kkt_violation = std::max(out.max_kkt_violation, kkt);
            const double sse = holdout_sse(h, c);
            out.cv_mse[i] += sse;
            fold_mse(f, i) = sse / h.count;
        });
    }
    const double N = full_.count;
    out.cv_mse /= N;
    for (Index i = 0; i < K; ++i) {
        double var = 0.0;
        for (int f = 0; f < F; ++f) {
            const double d = fold_mse(f, i) - out.cv_mse[i];
            var += holdout_[static_cast<std::size_t>(f)].count * d * d;
        }
        out.cv_se[i] = F > 1 ? std::sqrt(var / N / (F - 1)) : 0.0;
    }

    // lambdas descend, so the first minimiser is the largest lambda among ties
    out.star_index = 0;
    for (Index i = 1; i < K; ++i) {
        if (out.cv_mse[i] < out.cv_mse[out.star_index]) out.star_index = i;
    }
    out.lambda_star = lambdas[static_cast<std::size_t>(out.star_index)];

    run(scale_problem(full_), full_path ? K - 1 : out.star_index, [&](Index i, const Coefficients& c, double kkt) {
        out.coefficients.col(i) = c.beta;
        out.intercepts[i] = c.intercept;
        out.kkt_violation[i] = kkt;
        out.max_kkt_violation = std::max(out.max_kkt_violation, kkt);
    });
    return out;
}

PathFit cross_validate(const MatrixXd& x, const VectorXd& y, const PenaltySpec& spec, int folds,
                       std::uint64_t seed) {
    if (x.rows() < folds) throw InvalidArgument("cross_validate: fewer rows than folds");
    const FoldedProblem prob(x, y, assign_folds(x.rows(), folds, seed));
    return prob.fit_path(spec, prob.default_grid(spec));
}

// ---------------------------------------------------------------------------

SparseFit fit_sparse(const FoldedProblem& prob, Method method) {
    SparseFit out;
    const Index p = prob.cols();
    out.weights = VectorXd::Ones(p);
    if (prob.degenerate()) {
        out.beta = VectorXd::Zero(p);
        out.intercept = prob.full().y_mean;
        return out;
    }
    if (method == Method::AdaptiveLasso) {
        const PenaltySpec ridge{PenaltyKind::Ridge, {}};
        const PathFit coarse = prob.fit_path(ridge, prob.default_grid(ridge), false);
        const PathFit fine = prob.fit_path(ridge, refine_lambda(coarse.lambda_star), false);
        out.weights = adaptive_weights(fine.coefficients.col(fine.star_index));
    }
    const PenaltySpec lasso{PenaltyKind::Lasso, out.weights};
    const PathFit coarse = prob.fit_path(lasso, prob.default_grid(lasso), false);
    const PathFit fine = prob.fit_path(lasso, refine_lambda(coarse.lambda_star), false);
    out.beta = fine.coefficients.col(fine.star_index);
    out.intercept = fine.intercepts[fine.star_index];
    out.lambda_star = fine.lambda_star;
    out.kkt_violation = fine.kkt_violation[fine.star_index];
    out.max_kkt_violation = std::max(coarse.max_kkt_violation, fine.max_kkt_violation);
    return out;
}

SparseFit fit_sparse(const MatrixXd& x, const VectorXd& y, Method method, std::uint64_t seed, int folds) {
    if (x.rows() < folds) throw InvalidArgument("fit_sparse: fewer rows than folds");
    const FoldedProblem prob(x, y, assign_folds(x.rows(), folds, seed));
    return fit_sparse(prob, method);
}

// ---------------------------------------------------------------------------

OlsFit ols_on_support(const MatrixXd& x, const VectorXd& y, const std::vector<Index>& support) {
    std::vector<Index> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), Index{0});
    return ols_on_support(x, y, support, summarize(x, y, rows));
}

OlsFit ols_on_support(const MatrixXd& x, const VectorXd& y, const std::vector<Index>& support,
                      const CrossProducts& stats) {
    const Index n = x.rows();
    const auto k = static_cast<Index>(support.size());
    if (k >= n) throw SingularFit("ols: support size must be below the number of rows");
    OlsFit out;
    out.beta = VectorXd::Zero(x.cols());
    if (k > 0) {
        VectorXd scale(k);
        for (Index i = 0; i < k; ++i) {
            const Index c = support[static_cast<std::size_t>(i)];
            if (c < 0 || c >= x.cols()) throw InvalidArgument("ols: support index out of range");
            scale[i] = std::sqrt(stats.xx(c, c));
            if (!(scale[i] > 0.0) || scale[i] <= 1e-13 * std::sqrt(stats.count) * std::abs(stats.x_mean[c])) {
                throw SingularFit("ols: constant column in support");
            }
        }
        MatrixXd a(k, k);
        VectorXd b(k);
        for (Index i = 0; i < k; ++i) {
            const Index ci = support[static_cast<std::size_t>(i)];
            b[i] = stats.xy[ci] / scale[i];
            for (Index j = 0; j < k; ++j) {
                a(i, j) = stats.xx(ci, support[static_cast<std::size_t>(j)]) / (scale[i] * scale[j]);
            }
        }
        Eigen::LDLT<MatrixXd> ldlt(a);
        const VectorXd d = ldlt.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 1e-12 * dmax)) {
            throw SingularFit("ols: support columns are linearly dependent");
        }
        const VectorXd sol = ldlt.solve(b);
        for (Index i = 0; i < k; ++i) out.beta[support[static_cast<std::size_t>(i)]] = sol[i] / scale[i];
    }
    out.intercept = stats.y_mean - stats.x_mean.dot(out.beta);
    out.residuals = y.array() - out.intercept;
    for (Index i = 0; i < k; ++i) {
        const Index c = support[static_cast<std::size_t>(i)];
        out.residuals.noalias() -= out.beta[c] * x.col(c);
    }
    out.rss = out.residuals.squaredNorm();
    return out;
}

}  // namespace argos::sparse
