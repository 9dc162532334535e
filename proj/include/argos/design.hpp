#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace argos::design {

using Exponents = std::vector<int>;

/// Monomials of total degree <= d in m variables, graded by degree and
/// lexicographically descending within a degree: 1, x1, x2, x1^2, x1*x2, ...
struct MonomialBasis {
    int m = 0;
    int d = 0;
    std::vector<Exponents> terms;

    std::size_t size() const { return terms.size(); }
    /// Number of leading terms with total degree <= degree.
    std::size_t prefix_size(int degree) const;
    std::vector<std::string> names() const;
};

struct DesignMatrix {
    Eigen::MatrixXd values;  // n x p, column 0 is all ones
    MonomialBasis basis;
    std::vector<std::string> column_names;
};

int total_degree(const Exponents& e);

/// Canonical identifier: "1", "x1", "x1^2*x3".
std::string term_name(const Exponents& e);
/// Inverse of term_name for a given dimension m.
Exponents parse_term_name(const std::string& name, int m);

std::size_t binomial(int n, int k);

MonomialBasis enumerate_monomials(int m, int d);

DesignMatrix build_design(const Eigen::MatrixXd& states, const MonomialBasis& basis);

/// Highest total degree among nonzero entries of estimate; at least 1.
int trim_degree(const Eigen::VectorXd& estimate, const MonomialBasis& basis);

/// Basis and design restricted to the graded prefix of degree <= degree.
MonomialBasis truncate(const MonomialBasis& basis, int degree);
DesignMatrix truncate(const DesignMatrix& design, int degree);

}  // namespace argos::design
