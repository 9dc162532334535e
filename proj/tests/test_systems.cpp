#include <doctest.h>

#include <cmath>
#include <random>

#include "argos/error.hpp"
#include "argos/systems.hpp"

using namespace argos;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

// Dormand-Prince 5(4) with tight error control, used only as an oracle.
VectorXd dopri_oracle(const RhsFunction& f, VectorXd x, double t_end, double tol) {
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
    double t = 0.0;
    double h = 1e-4;
    while (t < t_end) {
        if (t + h > t_end) h = t_end - t;
        const VectorXd k1 = f(x);
        const VectorXd k2 = f(x + h * a21 * k1);
        const VectorXd k3 = f(x + h * (a31 * k1 + a32 * k2));
        const VectorXd k4 = f(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const VectorXd k5 = f(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const VectorXd k6 = f(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const VectorXd x5 = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const VectorXd k7 = f(x5);
        const VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double scale = tol * (1.0 + x.cwiseAbs().maxCoeff());
        const double ratio = err.cwiseAbs().maxCoeff() / scale;
        if (ratio <= 1.0) {
            t += h;
            x = x5;
        }
        h *= std::clamp(0.9 * std::pow(std::max(ratio, 1e-10), -0.2), 0.2, 5.0);
    }
    return x;
}

Vector2d linear2d_exact(const Vector2d& x0, double t) {
    const double e = std::exp(-0.1 * t);
    const double c = std::cos(2.0 * t);
    const double s = std::sin(2.0 * t);
    return e * Vector2d(c * x0[0] + s * x0[1], -s * x0[0] + c * x0[1]);
}

double linear2d_error(double dt, double t_end) {
    const auto d = make_system(SystemId::Linear2D);
    const Vector2d x0(2.0, 0.5);
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    const MatrixXd traj = integrate(d, x0, steps + 1, dt).states;
    return (traj.row(static_cast<Index>(steps)).transpose() - linear2d_exact(x0, t_end)).norm();
}

}  // namespace

TEST_CASE("rhs_eval matches the documented point values") {
    const VectorXd lorenz = rhs_eval(make_system(SystemId::Lorenz), Eigen::Vector3d::Zero());
    CHECK(lorenz.norm() == 0.0);
    const VectorXd lin = rhs_eval(make_system(SystemId::Linear2D), Vector2d(1.0, 0.0));
    CHECK(lin[0] == doctest::Approx(-0.1));
    CHECK(lin[1] == doctest::Approx(-2.0));
    const VectorXd duff = rhs_eval(make_system(SystemId::Duffing), Vector2d(1.0, 0.0));
    CHECK(duff[0] == doctest::Approx(0.0));
    CHECK(duff[1] == doctest::Approx(-6.0));
    CHECK_THROWS_AS(rhs_eval(make_system(SystemId::Lorenz), Vector2d(1.0, 0.0)), InvalidArgument);
}

TEST_CASE("rhs_eval agrees with the expanded support polynomial") {
    std::mt19937_64 rng(11);
    for (auto id : kAllSystems) {
        const auto d = make_system(id);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int trial = 0; trial < 1000; ++trial) {
            VectorXd x(d.dimension);
            for (Index j = 0; j < x.size(); ++j) x[j] = u(rng);
            const VectorXd a = rhs_eval(d, x);
            const VectorXd b = support_eval(d, x);
            for (Index j = 0; j < x.size(); ++j) {
                CHECK(std::abs(a[j] - b[j]) <= 1e-12 * std::max(1.0, std::abs(b[j])));
            }
        }
    }
}

TEST_CASE("descriptor metadata") {
    for (auto id : kAllSystems) {
        const auto d = make_system(id);
        CHECK((d.dimension == 2 || d.dimension == 3));
        CHECK(d.true_support.size() == static_cast<std::size_t>(d.dimension));
        CHECK(d.ic_ranges.size() == static_cast<std::size_t>(d.dimension));
        CHECK(d.default_dt == (id == SystemId::Lorenz ? 0.001 : 0.01));
        CHECK(parse_system_id(to_string(id)) == id);
    }
    CHECK(parse_system_id("vdp") == SystemId::VanDerPol);
    CHECK_THROWS_AS(parse_system_id("pendulum"), InvalidArgument);
}

TEST_CASE("parameter overrides rebuild the support") {
    const auto d = make_system(SystemId::Duffing, {{"gamma", 0.5}, {"kappa", 2.0}, {"epsilon", 3.0}});
    const VectorXd v = rhs_eval(d, Vector2d(1.0, 1.0));
    CHECK(v[1] == doctest::Approx(-0.5 - 2.0 - 3.0));
    CHECK((support_eval(d, Vector2d(1.0, 1.0)) - v).norm() < 1e-12);
}

TEST_CASE("constant right-hand side gives identical rows") {
    const RhsFunction zero = [](const StateVector& x) { return StateVector::Zero(x.size()); };
    const MatrixXd rows = integrate_rk4(zero, Vector2d(1.0, 1.0), 5, 0.1);
    REQUIRE(rows.rows() == 5);
    for (Index i = 0; i < 5; ++i) CHECK((rows.row(i) - rows.row(0)).norm() == 0.0);
}

TEST_CASE("Linear2D matches its closed form") {
    const auto d = make_system(SystemId::Linear2D);
    const Trajectory tr = integrate(d, Vector2d(2.0, 0.0), 101, 0.01);
    CHECK(tr.times.size() == 101);
    CHECK(tr.times[100] == doctest::Approx(1.0));
    const Vector2d expected(std::exp(-0.1) * 2.0 * std::cos(2.0), -std::exp(-0.1) * 2.0 * std::sin(2.0));
    CHECK((tr.states.row(100).transpose() - expected).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(tr.states.row(0).transpose() == Vector2d(2.0, 0.0));
    for (std::size_t i = 1; i < tr.times.size(); ++i) {
        CHECK(std::abs(tr.times[i] - tr.times[i - 1] - 0.01) <= 1e-12 * 0.01 + 1e-15);
    }
}

TEST_CASE("RK4 global error shrinks about 16x when dt halves") {
    const double ratio = linear2d_error(0.02, 10.0) / linear2d_error(0.01, 10.0);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("Lorenz agrees with an adaptive Dormand-Prince oracle") {
    const auto d = make_system(SystemId::Lorenz);
    const Eigen::Vector3d x0(-8.0, 7.0, 27.0);
    const Trajectory tr = integrate(d, x0, 100, 0.001);
    const RhsFunction f = [&](const StateVector& x) { return rhs_eval(d, x); };
    for (Index i : {Index{10}, Index{50}, Index{99}}) {
        const VectorXd oracle = dopri_oracle(f, x0, 0.001 * static_cast<double>(i), 1e-13);
        CHECK((tr.states.row(i).transpose() - oracle).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("blow-up raises a divergence error naming the step") {
    const RhsFunction square = [](const StateVector& x) { return StateVector(x.array().square() * 10.0); };
    try {
        integrate_rk4(square, Vector2d(10.0, 10.0), 10000, 0.1);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.step() > 0);
        CHECK(std::string(e.what()).find(std::to_string(e.step())) != std::string::npos);
    }
}

TEST_CASE("initial conditions are uniform in the documented ranges") {
    const auto lorenz = make_system(SystemId::Lorenz);
    const auto ics = sample_initial_conditions(lorenz, 100, 3);
    REQUIRE(ics.size() == 100);
    for (const auto& x : ics) {
        CHECK(x[0] >= -15.0);
        CHECK(x[0] <= 15.0);
        CHECK(x[1] >= -15.0);
        CHECK(x[1] <= 15.0);
        CHECK(x[2] >= 10.0);
        CHECK(x[2] <= 40.0);
    }
    const auto again = sample_initial_conditions(lorenz, 100, 3);
    for (std::size_t i = 0; i < ics.size(); ++i) CHECK(ics[i] == again[i]);

    const auto lv = sample_initial_conditions(make_system(SystemId::LotkaVolterra), 10000, 5);
    double mean = 0.0;
    for (const auto& x : lv) mean += x[0];
    mean /= static_cast<double>(lv.size());
    CHECK(std::abs(mean - 5.5) < 0.1);
}

TEST_CASE("noise is calibrated, reproducible and column independent") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    MatrixXd x(100000, 2);
    for (Index i = 0; i < x.rows(); ++i) {
        x(i, 0) = g(rng);
        x(i, 1) = 3.0 * g(rng) + 5.0;
    }
    CHECK(add_noise(x, NoiseSpec{}) == x);
    for (double snr : {20.0, 49.0}) {
        const MatrixXd noisy = add_noise(x, NoiseSpec{snr, 9});
        CHECK(noisy == add_noise(x, NoiseSpec{snr, 9}));
        for (Index j = 0; j < 2; ++j) {
            const VectorXd z = noisy.col(j) - x.col(j);
            const VectorXd xc = x.col(j).array() - x.col(j).mean();
            const VectorXd zc = z.array() - z.mean();
            const double sx = std::sqrt(xc.squaredNorm() / (x.rows() - 1.0));
            const double sz = std::sqrt(zc.squaredNorm() / (x.rows() - 1.0));
            CHECK(std::abs(20.0 * std::log10(sx / sz) - snr) < 0.5);
        }
        // the two columns carry different noise draws
        const VectorXd z0 = (noisy.col(0) - x.col(0)) / (noisy.col(0) - x.col(0)).norm();
        const VectorXd z1 = (noisy.col(1) - x.col(1)) / (noisy.col(1) - x.col(1)).norm();
        CHECK(std::abs(z0.dot(z1)) < 0.02);
    }
    MatrixXd unit(1000, 1);
    for (Index i = 0; i < 1000; ++i) unit(i, 0) = g(rng);
    const VectorXd uc = unit.col(0).array() - unit.col(0).mean();
    unit.col(0) /= std::sqrt(uc.squaredNorm() / 999.0);
    const MatrixXd noisy = add_noise(unit, NoiseSpec{20.0, 4});
    const VectorXd z = noisy.col(0) - unit.col(0);
    CHECK(std::sqrt((z.array() - z.mean()).square().sum() / 999.0) == doctest::Approx(0.1).epsilon(0.1));

    MatrixXd constant = MatrixXd::Ones(50, 1);
    CHECK(add_noise(constant, NoiseSpec{10.0, 1}) == constant);
}
