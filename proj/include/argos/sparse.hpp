#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace argos::sparse {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kConvergenceTol = 1e-9;
inline constexpr long kMaxSweeps = 100000;
inline constexpr double kKktTol = 1e-6;
inline constexpr double kWeightCap = 1e8;
inline constexpr int kGridSize = 100;
inline constexpr int kDefaultFolds = 10;

/// Column centring/scaling of a predictor matrix (no intercept column).
/// A scale of 0 marks a constant column; it is excluded from every fit.
struct Standardization {
    VectorXd column_means;
    VectorXd column_scales;
    double response_mean = 0.0;

    bool is_constant(Index k) const { return column_scales[k] == 0.0; }
};

struct StandardizedData {
    MatrixXd x;  // centred, unit (n-denominator) sd; constant columns zeroed
    VectorXd y;  // centred
    Standardization info;
};

StandardizedData standardize(const MatrixXd& predictors, const VectorXd& y);

struct Coefficients {
    VectorXd beta;  // original scale
    double intercept = 0.0;
};

Coefficients destandardize(const VectorXd& beta_std, const Standardization& info);

/// K log-spaced values from lambda_max down to lambda_max * ratio, where
/// lambda_max = max_k |<x_k, y>| / (n w_k) and ratio = 1e-4 (n > p) or 1e-2.
std::vector<double> lambda_grid(const MatrixXd& std_x, const VectorXd& centered_y, int K = kGridSize,
                                const VectorXd& weights = VectorXd());

/// 100 log-spaced points on [lambda0 / 10, 1.1 lambda0], descending.
std::vector<double> refine_lambda(double lambda0_star);

/// w_k = min(1 / |pilot_k|^nu, 1e8).
VectorXd adaptive_weights(const VectorXd& pilot, double nu = 1.0);

// ---------------------------------------------------------------------------
// Gram-level solvers. The problem is
//   min_b  1/2 b'Gb - c'b + lambda * sum_k w_k |b_k|
// which for G = X'X/n, c = X'y/n equals 1/(2n)||y - Xb||^2 + penalty up to a
// constant. Coordinates with G_kk == 0 are held at zero.

struct LassoSolution {
    VectorXd beta;
    long sweeps = 0;
    double kkt_violation = 0.0;
};

LassoSolution lasso_gram(const MatrixXd& gram, const VectorXd& corr, double lambda,
                         const VectorXd& weights, const VectorXd& warm_start);

/// Largest violation of the lasso optimality conditions at beta.
double kkt_violation(const MatrixXd& gram, const VectorXd& corr, const VectorXd& beta, double lambda,
                     const VectorXd& weights);

/// Cyclic coordinate descent on standardized data. Throws NonConvergence
/// after kMaxSweeps full sweeps.
VectorXd lasso_cd(const MatrixXd& std_x, const VectorXd& centered_y, double lambda,
                  const VectorXd& weights, const VectorXd& warm_start);

/// (X'X/n + lambda I)^{-1} X'y/n. Throws SingularFit for lambda = 0 with a
/// rank-deficient X.
VectorXd ridge_closed_form(const MatrixXd& std_x, const VectorXd& centered_y, double lambda);

// ---------------------------------------------------------------------------
// Cross-validated paths.

enum class PenaltyKind { Lasso, Ridge };

struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::Lasso;
    VectorXd weights;  // empty = all ones
};

struct PathFit {
    std::vector<double> lambdas;  // descending
    MatrixXd coefficients;        // p x K, original scale
    VectorXd intercepts;          // K
    VectorXd cv_mse;              // K
    VectorXd cv_se;               // K
    VectorXd kkt_violation;       // K, full-data fits (lasso only)
    double max_kkt_violation = 0.0;  // over every lasso fit, CV folds included
    Index star_index = 0;
    double lambda_star = 0.0;
};

/// Centred sufficient statistics of a row subset.
struct CrossProducts {
    double count = 0.0;
    VectorXd x_mean;
    double y_mean = 0.0;
    MatrixXd xx;  // sum of (x - mean)(x - mean)'
    VectorXd xy;
    double yy = 0.0;
};

CrossProducts summarize(const MatrixXd& x, const VectorXd& y, const std::vector<Index>& rows);
CrossProducts merge(const std::vector<const CrossProducts*>& parts);

/// Random near-equal fold labels 0..folds-1 for n rows.
std::vector<int> assign_folds(Index n, int folds, std::uint64_t seed);

/// Data split into folds with cached per-fold and training statistics, so
/// every path fit costs O(p^2) per lambda independent of n.
class FoldedProblem {
public:
    FoldedProblem(const MatrixXd& x, const VectorXd& y, std::vector<int> fold_of_row);

    Index rows() const { return n_; }
    Index cols() const { return p_; }
    int folds() const { return static_cast<int>(holdout_.size()); }
    const std::vector<int>& fold_of_row() const { return fold_of_row_; }
    const CrossProducts& full() const { return full_; }

    /// True when y is constant or every predictor is constant.
    bool degenerate() const;

    std::vector<double> default_grid(const PenaltySpec& spec, int K = kGridSize) const;
    /// With full_path false the full-data fit stops at the CV minimiser;
    /// later columns of coefficients stay zero.
    PathFit fit_path(const PenaltySpec& spec, const std::vector<double>& lambdas, bool full_path = true) const;

private:
    Index n_ = 0;
    Index p_ = 0;
    std::vector<int> fold_of_row_;
    std::vector<CrossProducts> holdout_;
    std::vector<CrossProducts> training_;
    CrossProducts full_;
};

PathFit cross_validate(const MatrixXd& x, const VectorXd& y, const PenaltySpec& spec,
                       int folds = kDefaultFolds, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Full sparse fit: default grid + CV, refined grid + CV, fit at lambda*.

enum class Method { Lasso, AdaptiveLasso };

struct SparseFit {
    VectorXd beta;  // original scale
    double intercept = 0.0;
    double lambda_star = 0.0;
    double kkt_violation = 0.0;  // at lambda*, in unit-sd response units
    double max_kkt_violation = 0.0;  // over every lasso fit of both CV stages
    VectorXd weights;            // penalty weights used by the final stage
};

SparseFit fit_sparse(const FoldedProblem& problem, Method method);
SparseFit fit_sparse(const MatrixXd& x, const VectorXd& y, Method method, std::uint64_t seed,
                     int folds = kDefaultFolds);

// ---------------------------------------------------------------------------

struct OlsFit {
    VectorXd beta;  // zero off the support
    double intercept = 0.0;
    VectorXd residuals;
    double rss = 0.0;
};

/// Least squares with intercept on the given predictor columns. Throws
/// SingularFit when the support columns are (numerically) dependent.
OlsFit ols_on_support(const MatrixXd& x, const VectorXd& y, const std::vector<Index>& support);
/// Same, reusing centred statistics of (x, y).
OlsFit ols_on_support(const MatrixXd& x, const VectorXd& y, const std::vector<Index>& support,
                      const CrossProducts& stats);

}  // namespace argos::sparse
