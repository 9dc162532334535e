#include "argos/savgol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "argos/error.hpp"

namespace argos::savgol {

namespace {

// Rows of the fit operator: coefficient c_k of the local polynomial
// sum_k c_k u^k (u = offset / h) is row k applied to the window.
Eigen::MatrixXd fit_operator(int order, int window) {
    const int h = window / 2;
    Eigen::MatrixXd vander(window, order + 1);
    for (int r = 0; r < window; ++r) {
        const double u = static_cast<double>(r - h) / static_cast<double>(h);
        double pw = 1.0;
        for (int k = 0; k <= order; ++k) {
            vander(r, k) = pw;
            pw *= u;
        }
    }
    // (V^T V)^{-1} V^T via QR for conditioning.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(vander);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(window, window);
    return qr.solve(identity);
}

// Weights producing the v-th derivative of the fit at offset position `offset`
// (in samples relative to the window centre).
Eigen::VectorXd evaluation_weights(const Eigen::MatrixXd& op, int order, int window, int derivative,
                                   int offset, double dt) {
    const int h = window / 2;
    const double u = static_cast<double>(offset) / static_cast<double>(h);
    Eigen::VectorXd basis = Eigen::VectorXd::Zero(order + 1);
    for (int k = derivative; k <= order; ++k) {
        double coef = 1.0;
        for (int q = 0; q < derivative; ++q) coef *= static_cast<double>(k - q);
        basis[k] = coef * std::pow(u, k - derivative);
    }
    Eigen::VectorXd w = op.transpose() * basis;
    if (derivative > 0) w /= std::pow(static_cast<double>(h) * dt, derivative);
    return w;
}

}  // namespace

void FilterConfig::validate() const {
    if (order < 0) throw InvalidArgument("savgol: negative polynomial order");
    if (window % 2 == 0 || window <= order || window < 3) {
        throw InvalidArgument("savgol: window must be odd and exceed the order (got " +
                              std::to_string(window) + ")");
    }
    if (derivative != 0 && derivative != 1) throw InvalidArgument("savgol: derivative must be 0 or 1");
    if (!(dt > 0.0)) throw InvalidArgument("savgol: dt must be positive");
}

std::vector<int> window_grid(std::size_t n) {
    if (n < static_cast<std::size_t>(kMinWindow)) {
        throw InsufficientData("savgol: series of length " + std::to_string(n) +
                               " is shorter than the minimum window " + std::to_string(kMinWindow));
    }
    const long odd_n = static_cast<long>(n) - static_cast<long>((n - 1) % 2);
    const long l_max = std::max<long>(kMinWindow, std::min<long>(odd_n, kMaxWindow));
    std::vector<int> grid;
    for (long l = kMinWindow; l <= l_max; l += 2) grid.push_back(static_cast<int>(l));
    return grid;
}

Eigen::VectorXd sg_weights(const FilterConfig& config) {
    config.validate();
    const Eigen::MatrixXd op = fit_operator(config.order, config.window);
    return evaluation_weights(op, config.order, config.window, config.derivative, 0, config.dt);
}

Eigen::VectorXd sg_apply(const Eigen::VectorXd& x, const FilterConfig& config) {
    config.validate();
    const Eigen::Index n = x.size();
    const int l = config.window;
    if (n < l) {
        throw InsufficientData("savgol: series of length " + std::to_string(n) +
                               " is shorter than the window " + std::to_string(l));
    }
    const int h = l / 2;
    const Eigen::MatrixXd op = fit_operator(config.order, l);
    const Eigen::VectorXd centre =
        evaluation_weights(op, config.order, l, config.derivative, 0, config.dt);

    Eigen::VectorXd out(n);
    for (Eigen::Index i = h; i < n - h; ++i) out[i] = centre.dot(x.segment(i - h, l));

    const auto head = x.head(l);
    const auto tail = x.tail(l);
    for (int i = 0; i < h; ++i) {
        const Eigen::VectorXd wl =
            evaluation_weights(op, config.order, l, config.derivative, i - h, config.dt);
        out[i] = wl.dot(head);
        const Eigen::VectorXd wr =
            evaluation_weights(op, config.order, l, config.derivative, h - i, config.dt);
        out[n - 1 - i] = wr.dot(tail);
    }
    return out;
}

SmoothedSignal auto_smooth(const Eigen::VectorXd& x_noisy, double dt) {
    const auto grid = window_grid(static_cast<std::size_t>(x_noisy.size()));
    SmoothedSignal result;
    // MSE differences below this band are rounding noise (e.g. exact polynomial
    // input) and count as ties, which keep the smaller window.
    const double tie_band = 1e-20 * std::max(1.0, x_noisy.squaredNorm() / x_noisy.size());
    double best = std::numeric_limits<double>::infinity();
    for (int l : grid) {
        const FilterConfig cfg{kOrder, l, 0, dt};
        const Eigen::VectorXd s = sg_apply(x_noisy, cfg);
        const double mse = (s - x_noisy).squaredNorm() / static_cast<double>(x_noisy.size());
        result.mse_curve[l] = mse;
        if (mse < best - tie_band) {
            best = mse;
            result.chosen_window = l;
        }
    }
    result.x_smooth = sg_apply(x_noisy, FilterConfig{kOrder, result.chosen_window, 0, dt});
    result.x_dot = sg_apply(x_noisy, FilterConfig{kOrder, result.chosen_window, 1, dt});
    return result;
}

}  // namespace argos::savgol
