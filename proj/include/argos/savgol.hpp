#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

namespace argos::savgol {

inline constexpr int kOrder = 4;
inline constexpr int kMinWindow = 13;
inline constexpr int kMaxWindow = 101;

struct FilterConfig {
    int order = kOrder;
    int window = kMinWindow;  // odd, > order
    int derivative = 0;       // 0 = smooth, 1 = first derivative
    double dt = 1.0;

    void validate() const;
};

struct SmoothedSignal {
    Eigen::VectorXd x_smooth;
    Eigen::VectorXd x_dot;
    int chosen_window = 0;
    std::map<int, double> mse_curve;
};

/// Odd window lengths 13, 15, ..., l_max for a series of length n.
std::vector<int> window_grid(std::size_t n);

/// Convolution weights of the centred least-squares fit; w[k] multiplies x[i - h + k].
Eigen::VectorXd sg_weights(const FilterConfig& config);

/// Filters a full series. Edge points are evaluated on the nearest full
/// window's fitted polynomial, so the output has the input's length.
Eigen::VectorXd sg_apply(const Eigen::VectorXd& x, const FilterConfig& config);

/// Picks the window minimising ||SG(x) - x||^2 over window_grid(n)
/// (ties resolve to the smaller window) and returns smooth + derivative.
SmoothedSignal auto_smooth(const Eigen::VectorXd& x_noisy, double dt);

}  // namespace argos::savgol
