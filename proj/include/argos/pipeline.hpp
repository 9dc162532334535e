#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "argos/design.hpp"
#include "argos/sparse.hpp"

namespace argos {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Thresholds applied to the refit coefficients before OLS.
inline constexpr std::array<double, 10> kEtaGrid = {1e-8, 1e-7, 1e-6, 1e-5, 1e-4,
                                                    1e-3, 1e-2, 1e-1, 1e0,  1e1};

std::string to_string(sparse::Method method);
sparse::Method parse_method(const std::string& name);

struct PipelineOptions {
    sparse::Method method = sparse::Method::Lasso;
    int max_degree = 5;
    int bootstrap_samples = 2000;
    double alpha = 0.05;
    int folds = sparse::kDefaultFolds;
    std::uint64_t seed = 0;
    int workers = 1;  // threads for bootstrap replicates
};

/// n ln(rss / n) + k ln(n); -inf when rss == 0.
double bic_score(double rss, Index n, Index k);

/// K_i = {k : |beta_k| >= eta_i} for every eta in kEtaGrid (predictor indices).
std::vector<std::vector<Index>> threshold_supports(const VectorXd& beta);

struct PointEstimate {
    VectorXd coefficients;     // per trimmed term; entry 0 is the intercept
    std::vector<Index> support;  // selected term indices (>= 1)
    double bic = 0.0;
    VectorXd residuals;
    int eta_index = -1;  // -1: intercept-only fallback
    std::vector<std::vector<Index>> eta_supports;
    double kkt_violation = 0.0;  // largest over every lasso fit behind the estimate
    double lambda_star = 0.0;
};

PointEstimate point_estimate(const design::DesignMatrix& trimmed, const VectorXd& xdot,
                             sparse::Method method, std::uint64_t seed,
                             int folds = sparse::kDefaultFolds);

/// 1-based order-statistic ranks (floor(B alpha / 2), B - lo + 1).
struct PercentileRanks {
    int lower = 0;
    int upper = 0;
};
PercentileRanks percentile_ranks(int B, double alpha);

struct BootstrapResult {
    VectorXd lower;
    VectorXd upper;
    MatrixXd samples;  // B x p, unselected terms recorded as 0
    int draws = 0;
    double max_kkt_violation = 0.0;
};

/// Paired-row bootstrap of the full point-estimate procedure.
BootstrapResult bootstrap_ci(const design::DesignMatrix& trimmed, const VectorXd& xdot,
                             sparse::Method method, int B, double alpha, std::uint64_t seed,
                             int folds = sparse::kDefaultFolds, int workers = 1);

struct EquationModel {
    std::vector<std::string> term_names;  // candidate (trimmed) terms
    std::vector<Index> support;           // indices into term_names
    VectorXd coefficients;                // per candidate, zero off the support
    double intercept = 0.0;
    VectorXd point_estimate;
    VectorXd ci_lower;
    VectorXd ci_upper;
    double bic = 0.0;
    VectorXd residuals;
    VectorXd fitted;
    sparse::Method method = sparse::Method::Lasso;
    int trimmed_degree = 1;
    double max_kkt_violation = 0.0;

    std::vector<std::string> support_names() const;
};

/// Keeps terms whose interval excludes zero and contains the point estimate.
EquationModel select_final(const VectorXd& point, const VectorXd& lower, const VectorXd& upper);

struct Provenance {
    double dt = 0.0;
    Index n = 0;
    double snr_db = 0.0;  // informational; +inf when unknown/noiseless
    std::uint64_t seed = 0;
    sparse::Method method = sparse::Method::Lasso;
    int max_degree = 5;
    int bootstrap_samples = 0;
    double alpha = 0.0;
    std::vector<int> windows;
    double smoothing_seconds = 0.0;
    std::vector<double> equation_seconds;
    double total_seconds = 0.0;
};

struct IdentifiedSystem {
    std::vector<EquationModel> equations;
    design::MonomialBasis basis_initial;
    std::vector<int> trimmed_degrees;
    Provenance provenance;
};

/// Steps after smoothing for one equation: initial fit, trim, point
/// estimate, bootstrap, selection.
EquationModel identify_equation(const design::DesignMatrix& theta0, const VectorXd& xdot,
                                int equation, const PipelineOptions& options);

IdentifiedSystem identify_system(const MatrixXd& noisy_states, double dt,
                                 const PipelineOptions& options);

}  // namespace argos
