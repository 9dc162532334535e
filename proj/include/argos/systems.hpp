#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace argos {

enum class SystemId { Linear2D, Linear3D, Cubic2D, LotkaVolterra, Rossler, Lorenz, VanDerPol, Duffing };

inline constexpr std::array<SystemId, 8> kAllSystems = {
    SystemId::Linear2D, SystemId::Linear3D, SystemId::Cubic2D, SystemId::LotkaVolterra,
    SystemId::Rossler,  SystemId::Lorenz,   SystemId::VanDerPol, SystemId::Duffing};

std::string to_string(SystemId id);
/// Accepts the lower-case CLI names ("linear2d", "lotka-volterra", "vdp", ...).
SystemId parse_system_id(const std::string& name);

/// One monomial term of a polynomial right-hand side.
struct Term {
    std::vector<int> exponents;
    double coefficient = 0.0;
};

struct CoordinateRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct SystemDescriptor {
    SystemId id = SystemId::Linear2D;
    int dimension = 2;
    std::map<std::string, double> parameters;
    /// One entry per equation; the exact polynomial form of f_j.
    std::vector<std::vector<Term>> true_support;
    std::vector<CoordinateRange> ic_ranges;
    double default_dt = 0.01;
};

/// Canonical descriptor with the default parameters.
SystemDescriptor make_system(SystemId id);
/// Descriptor with overridden parameters; the support is rebuilt from them.
SystemDescriptor make_system(SystemId id, const std::map<std::string, double>& parameters);

using StateVector = Eigen::VectorXd;
using RhsFunction = std::function<StateVector(const StateVector&)>;

struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd states;  // n x m
    SystemDescriptor descriptor;
    std::uint64_t seed = 0;
    double dt = 0.0;
};

struct NoiseSpec {
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
};

StateVector rhs_eval(const SystemDescriptor& descriptor, const StateVector& state);

/// Evaluates the descriptor's true_support polynomial; independent of rhs_eval.
StateVector support_eval(const SystemDescriptor& descriptor, const StateVector& state);

/// Fixed-step classical RK4 on t = 0, dt, ..., (n-1) dt.
Eigen::MatrixXd integrate_rk4(const RhsFunction& f, const StateVector& x0, std::size_t n, double dt);

Trajectory integrate(const SystemDescriptor& descriptor, const StateVector& x0, std::size_t n,
                     double dt);

std::vector<StateVector> sample_initial_conditions(const SystemDescriptor& descriptor,
                                                   std::size_t count, std::uint64_t seed);

/// Adds column-wise Gaussian noise with sigma_z = sd(x_j) * 10^(-snr/20).
Eigen::MatrixXd add_noise(const Eigen::MatrixXd& states, const NoiseSpec& spec);

}  // namespace argos
