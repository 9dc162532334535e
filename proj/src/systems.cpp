#include "argos/systems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

#include "argos/error.hpp"
#include "argos/rng.hpp"

namespace argos {

namespace {

double param(const std::map<std::string, double>& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) throw InvalidArgument("missing system parameter '" + key + "'");
    return it->second;
}

std::map<std::string, double> default_parameters(SystemId id) {
    switch (id) {
        case SystemId::Linear2D:
        case SystemId::Linear3D:
        case SystemId::Cubic2D:
            return {};
        // Classic predator-prey signs; see README for the sign convention.
        case SystemId::LotkaVolterra:
            return {{"alpha", 1.0}, {"zeta", 1.0}, {"delta", 1.0}, {"gamma", 1.0}};
        case SystemId::Rossler:
            return {{"a", 0.2}, {"b", 0.2}, {"c", 5.7}};
        case SystemId::Lorenz:
            return {{"sigma", 10.0}, {"rho", 28.0}, {"zeta", 8.0 / 3.0}};
        case SystemId::VanDerPol:
            return {{"mu", 1.2}};
        case SystemId::Duffing:
            return {{"gamma", 1.0}, {"kappa", 1.0}, {"epsilon", 5.0}};
    }
    return {};
}

Term term(std::vector<int> e, double c) { return Term{std::move(e), c}; }

std::vector<std::vector<Term>> build_support(SystemId id, const std::map<std::string, double>& p) {
    switch (id) {
        case SystemId::Linear2D:
            return {{term({1, 0}, -0.1), term({0, 1}, 2.0)},
                    {term({1, 0}, -2.0), term({0, 1}, -0.1)}};
        case SystemId::Linear3D:
            return {{term({1, 0, 0}, -0.1), term({0, 1, 0}, 2.0)},
                    {term({1, 0, 0}, -2.0), term({0, 1, 0}, -0.1)},
                    {term({0, 0, 1}, -0.3)}};
        case SystemId::Cubic2D:
            return {{term({3, 0}, -0.1), term({0, 3}, 2.0)},
                    {term({3, 0}, -2.0), term({0, 3}, -0.1)}};
        case SystemId::LotkaVolterra:
            return {{term({1, 0}, param(p, "alpha")), term({1, 1}, -param(p, "zeta"))},
                    {term({1, 1}, param(p, "delta")), term({0, 1}, -param(p, "gamma"))}};
        case SystemId::Rossler:
            return {{term({0, 1, 0}, -1.0), term({0, 0, 1}, -1.0)},
                    {term({1, 0, 0}, 1.0), term({0, 1, 0}, param(p, "a"))},
                    {term({0, 0, 0}, param(p, "b")), term({1, 0, 1}, 1.0),
                     term({0, 0, 1}, -param(p, "c"))}};
        case SystemId::Lorenz: {
            const double s = param(p, "sigma");
            return {{term({1, 0, 0}, -s), term({0, 1, 0}, s)},
                    {term({1, 0, 0}, param(p, "rho")), term({1, 0, 1}, -1.0), term({0, 1, 0}, -1.0)},
                    {term({1, 1, 0}, 1.0), term({0, 0, 1}, -param(p, "zeta"))}};
        }
        case SystemId::VanDerPol: {
            const double mu = param(p, "mu");
            return {{term({0, 1}, 1.0)},
                    {term({0, 1}, mu), term({2, 1}, -mu), term({1, 0}, -1.0)}};
        }
        case SystemId::Duffing:
            return {{term({0, 1}, 1.0)},
                    {term({0, 1}, -param(p, "gamma")), term({1, 0}, -param(p, "kappa")),
                     term({3, 0}, -param(p, "epsilon"))}};
    }
    return {};
}

std::vector<CoordinateRange> ic_ranges(SystemId id) {
    switch (id) {
        case SystemId::Linear2D: return {{0.1, 1000.0}, {0.1, 1000.0}};
        case SystemId::Linear3D: return {{0.1, 1000.0}, {0.1, 1000.0}, {0.1, 1000.0}};
        case SystemId::Cubic2D: return {{-2.0, 2.0}, {-2.0, 2.0}};
        case SystemId::LotkaVolterra: return {{1.0, 10.0}, {1.0, 10.0}};
        case SystemId::Rossler: return {{-10.0, 10.0}, {-10.0, 10.0}, {0.0, 20.0}};
        case SystemId::Lorenz: return {{-15.0, 15.0}, {-15.0, 15.0}, {10.0, 40.0}};
        case SystemId::VanDerPol: return {{-4.0, 4.0}, {-4.0, 4.0}};
        case SystemId::Duffing: return {{-2.0, 2.0}, {-6.0, 6.0}};
    }
    return {};
}

std::string normalize_name(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '-' || c == '_' || c == ' ') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

std::string to_string(SystemId id) {
    switch (id) {
        case SystemId::Linear2D: return "linear2d";
        case SystemId::Linear3D: return "linear3d";
        case SystemId::Cubic2D: return "cubic2d";
        case SystemId::LotkaVolterra: return "lotka-volterra";
        case SystemId::Rossler: return "rossler";
        case SystemId::Lorenz: return "lorenz";
        case SystemId::VanDerPol: return "vanderpol";
        case SystemId::Duffing: return "duffing";
    }
    return "unknown";
}

SystemId parse_system_id(const std::string& name) {
    const std::string key = normalize_name(name);
    for (auto id : kAllSystems) {
        if (normalize_name(to_string(id)) == key) return id;
    }
    if (key == "lv" || key == "lotkavolterra") return SystemId::LotkaVolterra;
    if (key == "vdp") return SystemId::VanDerPol;
    throw InvalidArgument("unknown system '" + name + "'");
}

SystemDescriptor make_system(SystemId id) { return make_system(id, default_parameters(id)); }

SystemDescriptor make_system(SystemId id, const std::map<std::string, double>& parameters) {
    SystemDescriptor d;
    d.id = id;
    d.parameters = default_parameters(id);
    for (const auto& [k, v] : parameters) {
        if (!d.parameters.count(k)) {
            throw InvalidArgument("system " + to_string(id) + " has no parameter '" + k + "'");
        }
        d.parameters[k] = v;
    }
    d.true_support = build_support(id, d.parameters);
    d.ic_ranges = ic_ranges(id);
    d.dimension = static_cast<int>(d.ic_ranges.size());
    d.default_dt = id == SystemId::Lorenz ? 0.001 : 0.01;
    return d;
}

StateVector rhs_eval(const SystemDescriptor& d, const StateVector& x) {
    if (x.size() != d.dimension) {
        std::ostringstream os;
        os << "state has dimension " << x.size() << ", system " << to_string(d.id) << " expects "
           << d.dimension;
        throw InvalidArgument(os.str());
    }
    const auto& p = d.parameters;
    StateVector f(d.dimension);
    switch (d.id) {
        case SystemId::Linear2D:
            f << -0.1 * x[0] + 2.0 * x[1], -2.0 * x[0] - 0.1 * x[1];
            break;
        case SystemId::Linear3D:
            f << -0.1 * x[0] + 2.0 * x[1], -2.0 * x[0] - 0.1 * x[1], -0.3 * x[2];
            break;
        case SystemId::Cubic2D: {
            const double c1 = x[0] * x[0] * x[0];
            const double c2 = x[1] * x[1] * x[1];
            f << -0.1 * c1 + 2.0 * c2, -2.0 * c1 - 0.1 * c2;
            break;
        }
        case SystemId::LotkaVolterra:
            f << param(p, "alpha") * x[0] - param(p, "zeta") * x[0] * x[1],
                param(p, "delta") * x[0] * x[1] - param(p, "gamma") * x[1];
            break;
        case SystemId::Rossler:
            f << -x[1] - x[2], x[0] + param(p, "a") * x[1],
                param(p, "b") + x[2] * (x[0] - param(p, "c"));
            break;
        case SystemId::Lorenz:
            f << param(p, "sigma") * (x[1] - x[0]), x[0] * (param(p, "rho") - x[2]) - x[1],
                x[0] * x[1] - param(p, "zeta") * x[2];
            break;
        case SystemId::VanDerPol: {
            const double mu = param(p, "mu");
            f << x[1], mu * (1.0 - x[0] * x[0]) * x[1] - x[0];
            break;
        }
        case SystemId::Duffing:
            f << x[1], -param(p, "gamma") * x[1] - param(p, "kappa") * x[0] -
                           param(p, "epsilon") * x[0] * x[0] * x[0];
            break;
    }
    return f;
}

StateVector support_eval(const SystemDescriptor& d, const StateVector& x) {
    if (x.size() != d.dimension) throw InvalidArgument("state dimension mismatch");
    StateVector f = StateVector::Zero(d.dimension);
    for (int j = 0; j < d.dimension; ++j) {
        for (const auto& t : d.true_support[j]) {
            double v = t.coefficient;
            for (int i = 0; i < d.dimension; ++i) v *= std::pow(x[i], t.exponents[i]);
            f[j] += v;
        }
    }
    return f;
}

Eigen::MatrixXd integrate_rk4(const RhsFunction& f, const StateVector& x0, std::size_t n, double dt) {
    if (n < 2) throw InvalidArgument("integrate: n must be at least 2");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("integrate: dt must be positive");
    if (!x0.allFinite()) throw InvalidArgument("integrate: initial condition is not finite");

    const auto m = x0.size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), m);
    StateVector x = x0;
    out.row(0) = x.transpose();
    for (std::size_t i = 1; i < n; ++i) {
        const StateVector k1 = f(x);
        const StateVector k2 = f(x + 0.5 * dt * k1);
        const StateVector k3 = f(x + 0.5 * dt * k2);
        const StateVector k4 = f(x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) {
            throw DivergenceError(i, "integration diverged at step " + std::to_string(i));
        }
        out.row(static_cast<Eigen::Index>(i)) = x.transpose();
    }
    return out;
}

Trajectory integrate(const SystemDescriptor& d, const StateVector& x0, std::size_t n, double dt) {
    if (x0.size() != d.dimension) throw InvalidArgument("integrate: initial condition dimension mismatch");
    Trajectory tr;
    tr.states = integrate_rk4([&d](const StateVector& s) { return rhs_eval(d, s); }, x0, n, dt);
    tr.times.resize(n);
    for (std::size_t i = 0; i < n; ++i) tr.times[i] = static_cast<double>(i) * dt;
    tr.descriptor = d;
    tr.dt = dt;
    return tr;
}

std::vector<StateVector> sample_initial_conditions(const SystemDescriptor& d, std::size_t count,
                                                   std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("sample_initial_conditions: count must be >= 1");
    Rng rng(derive_seed(seed, {tag("initial-conditions")}));
    std::vector<StateVector> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        StateVector x(d.dimension);
        for (int i = 0; i < d.dimension; ++i) {
            std::uniform_real_distribution<double> u(d.ic_ranges[i].lo, d.ic_ranges[i].hi);
            x[i] = u(rng);
        }
        out.push_back(std::move(x));
    }
    return out;
}

Eigen::MatrixXd add_noise(const Eigen::MatrixXd& states, const NoiseSpec& spec) {
    if (std::isnan(spec.snr_db) || spec.snr_db < 0.0) {
        throw InvalidArgument("add_noise: snr_db must lie in [0, inf]");
    }
    if (!states.allFinite()) throw InvalidArgument("add_noise: states must be finite");
    Eigen::MatrixXd out = states;
    if (std::isinf(spec.snr_db)) return out;
    const auto n = states.rows();
    if (n < 2) return out;
    const double factor = std::pow(10.0, -spec.snr_db / 20.0);
    for (Eigen::Index j = 0; j < states.cols(); ++j) {
        const auto col = states.col(j);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n - 1));
        const double sigma = sd * factor;
        if (sigma == 0.0) continue;
        Rng rng(derive_seed(spec.seed, {tag("noise"), static_cast<std::uint64_t>(j)}));
        std::normal_distribution<double> gauss(0.0, sigma);
        for (Eigen::Index i = 0; i < n; ++i) out(i, j) += gauss(rng);
    }
    return out;
}

}  // namespace argos
