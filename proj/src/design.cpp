#include "argos/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "argos/error.hpp"

namespace argos::design {

namespace {

// Appends every exponent vector over variables [var, m) with the given
// remaining degree, highest power of the leading variable first.
void emit(int m, int var, int remaining, Exponents& current, std::vector<Exponents>& out) {
    if (var == m - 1) {
        current[var] = remaining;
        out.push_back(current);
        current[var] = 0;
        return;
    }
    for (int k = remaining; k >= 0; --k) {
        current[var] = k;
        emit(m, var + 1, remaining - k, current, out);
    }
    current[var] = 0;
}

}  // namespace

int total_degree(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

std::string term_name(const Exponents& e) {
    std::string out;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (!out.empty()) out += '*';
        out += 'x' + std::to_string(i + 1);
        if (e[i] > 1) out += '^' + std::to_string(e[i]);
    }
    return out.empty() ? "1" : out;
}

Exponents parse_term_name(const std::string& name, int m) {
    Exponents e(static_cast<std::size_t>(m), 0);
    if (name == "1") return e;
    std::istringstream in(name);
    std::string factor;
    while (std::getline(in, factor, '*')) {
        if (factor.size() < 2 || factor[0] != 'x') throw InvalidArgument("bad term name '" + name + "'");
        const auto caret = factor.find('^');
        try {
            const int var = std::stoi(factor.substr(1, caret == std::string::npos ? std::string::npos : caret - 1));
            const int pw = caret == std::string::npos ? 1 : std::stoi(factor.substr(caret + 1));
            if (var < 1 || var > m || pw < 1) throw InvalidArgument("bad term name '" + name + "'");
            e[static_cast<std::size_t>(var - 1)] += pw;
        } catch (const std::logic_error&) {
            throw InvalidArgument("bad term name '" + name + "'");
        }
    }
    return e;
}

std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    return r;
}

std::size_t MonomialBasis::prefix_size(int degree) const {
    std::size_t k = 0;
    while (k < terms.size() && total_degree(terms[k]) <= degree) ++k;
    return k;
}

std::vector<std::string> MonomialBasis::names() const {
    std::vector<std::string> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(term_name(t));
    return out;
}

MonomialBasis enumerate_monomials(int m, int d) {
    if (m < 1 || d < 1) throw InvalidArgument("enumerate_monomials: m and d must be >= 1");
    MonomialBasis b;
    b.m = m;
    b.d = d;
    b.terms.reserve(binomial(m + d, d));
    Exponents current(static_cast<std::size_t>(m), 0);
    for (int g = 0; g <= d; ++g) emit(m, 0, g, current, b.terms);
    return b;
}

DesignMatrix build_design(const Eigen::MatrixXd& states, const MonomialBasis& basis) {
    if (states.cols() != basis.m) throw InvalidArgument("build_design: state dimension mismatch");
    if (!states.allFinite()) throw InvalidArgument("build_design: states must be finite");
    const auto n = states.rows();
    const auto m = states.cols();
    const auto p = static_cast<Eigen::Index>(basis.size());

    DesignMatrix out;
    out.basis = basis;
    out.column_names = basis.names();
    out.values.resize(n, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const auto& e = basis.terms[static_cast<std::size_t>(k)];
        auto col = out.values.col(k);
        col.setOnes();
        for (Eigen::Index j = 0; j < m; ++j) {
            // one factor at a time, so entries equal the plain left-to-right product
            for (int r = 0; r < e[static_cast<std::size_t>(j)]; ++r) col.array() *= states.col(j).array();
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!std::isfinite(col[i])) {
                std::ostringstream os;
                os << "build_design: non-finite value at row " << i << ", column " << k << " ("
                   << out.column_names[static_cast<std::size_t>(k)] << ")";
                throw OverflowError(static_cast<std::size_t>(i), static_cast<std::size_t>(k), os.str());
            }
        }
    }
    return out;
}

int trim_degree(const Eigen::VectorXd& estimate, const MonomialBasis& basis) {
    if (static_cast<std::size_t>(estimate.size()) != basis.size()) {
        throw InvalidArgument("trim_degree: estimate length does not match basis");
    }
    int deg = 1;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        if (estimate[static_cast<Eigen::Index>(k)] != 0.0) deg = std::max(deg, total_degree(basis.terms[k]));
    }
    return deg;
}

MonomialBasis truncate(const MonomialBasis& basis, int degree) {
    MonomialBasis out;
    out.m = basis.m;
    out.d = std::min(degree, basis.d);
    out.terms.assign(basis.terms.begin(),
                     basis.terms.begin() + static_cast<std::ptrdiff_t>(basis.prefix_size(degree)));
    return out;
}

DesignMatrix truncate(const DesignMatrix& design, int degree) {
    DesignMatrix out;
    out.basis = truncate(design.basis, degree);
    const auto p = static_cast<Eigen::Index>(out.basis.size());
    out.values = design.values.leftCols(p);
    out.column_names.assign(design.column_names.begin(), design.column_names.begin() + p);
    return out;
}

}  // namespace argos::design
