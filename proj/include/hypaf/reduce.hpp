#pragma once

// Derivative reduction of a curvature vector.
//
// With F(x) = prod (x + kappa_i), the monic polynomial F'(x)/m has m-1 real
// roots -kappa~_j interlacing the roots of F, and p_i(kappa~) = p_i(kappa)
// for 1 <= i <= m-1. Roots are seeded from the companion-matrix eigenvalues
// and then polished by safeguarded Newton inside their interlacing bracket.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "hypaf/symfunc.hpp"

namespace hypaf::sym {

struct Reduction {
    KappaVector kappa;
    /// max_j |F'(-kappa~_j)/m| divided by the sum of the absolute monomials.
    double residual = 0.0;
};

namespace detail {

/// Coefficients of F'(x)/m in ascending powers, length m (monic, degree m-1).
inline std::vector<long double> reduced_coefficients(const KappaVector& kappa)
{
    const int m = kappa.size();
    const auto e = elementary_symmetric<long double>(kappa.values());
    // F(x) = sum_j e_j x^{m-j};  F'(x)/m = sum_j (m-j)/m e_j x^{m-1-j}
    std::vector<long double> c(static_cast<std::size_t>(m), 0.0L);
    for (int j = 0; j <= m - 1; ++j) {
        c[static_cast<std::size_t>(m - 1 - j)] = static_cast<long double>(m - j) / m * e[static_cast<std::size_t>(j)];
    }
    return c;
}

inline std::vector<double> companion_seeds(const std::vector<long double>& coeffs)
{
    const int deg = static_cast<int>(coeffs.size()) - 1;
    std::vector<double> seeds;
    if (deg < 1) return seeds;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -static_cast<double>(coeffs[static_cast<std::size_t>(i)]);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) return seeds;
    const Eigen::VectorXcd ev = solver.eigenvalues();
    seeds.reserve(static_cast<std::size_t>(deg));
    for (int i = 0; i < deg; ++i) seeds.push_back(-ev(i).real());
    std::sort(seeds.begin(), seeds.end());
    return seeds;
}

/// Root of g(y) = sum_j mult_j / (v_j - y) in the open interval (lo, hi),
/// where g increases from -inf to +inf.
inline long double bracketed_root(const std::vector<long double>& values, const std::vector<int>& mult,
                                  long double lo, long double hi, long double seed)
{
    auto g = [&](long double y, long double& dg) {
        long double s = 0, ds = 0;
        for (std::size_t j = 0; j < values.size(); ++j) {
            const long double inv = 1.0L / (values[j] - y);
            s += mult[j] * inv;
            ds += mult[j] * inv * inv;
        }
        dg = ds;
        return s;
    };
    long double y = (seed > lo && seed < hi) ? seed : 0.5L * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        long double dg = 0;
        const long double gy = g(y, dg);
        if (gy == 0) return y;
        if (gy < 0) lo = y;
        else hi = y;
        long double next = y - gy / dg;
        if (!(next > lo && next < hi)) next = 0.5L * (lo + hi);
        if (std::abs(next - y) <= 4 * std::numeric_limits<long double>::epsilon() * std::abs(y) ||
            hi - lo <= 4 * std::numeric_limits<long double>::epsilon() * std::abs(hi)) {
            return next;
        }
        y = next;
    }
    return y;
}

} // namespace detail

/// Roots of F'/m mapped back to curvatures, with the polynomial residual.
[[nodiscard]] inline Reduction derivative_reduce_with_residual(const KappaVector& kappa)
{
    const int m = kappa.size();
    if (m < 2) throw DomainError("derivative_reduce: needs m >= 2");

    std::vector<double> sorted(kappa.values().begin(), kappa.values().end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<long double> distinct;
    std::vector<int> mult;
    for (double x : sorted) {
        if (!distinct.empty() && static_cast<long double>(x) == distinct.back()) ++mult.back();
        else {
            distinct.push_back(x);
            mult.push_back(1);
        }
    }

    const auto coeffs = detail::reduced_coefficients(kappa);
    const auto seeds = detail::companion_seeds(coeffs);

    std::vector<long double> roots;
    roots.reserve(static_cast<std::size_t>(m - 1));
    // a value of multiplicity k stays a root of F' with multiplicity k-1
    for (std::size_t j = 0; j < distinct.size(); ++j) {
        for (int r = 1; r < mult[j]; ++r) roots.push_back(distinct[j]);
    }
    for (std::size_t j = 0; j + 1 < distinct.size(); ++j) {
        const long double lo = distinct[j];
        const long double hi = distinct[j + 1];
        long double seed = 0.5L * (lo + hi);
        for (double s : seeds) {
            if (s > lo && s < hi) {
                seed = s;
                break;
            }
        }
        roots.push_back(detail::bracketed_root(distinct, mult, lo, hi, seed));
    }
    std::sort(roots.begin(), roots.end());

    double residual = 0.0;
    for (long double y : roots) {
        const long double x = -y;
        long double val = 0, mag = 0, pw = 1;
        for (long double c : coeffs) {
            val += c * pw;
            mag += std::abs(c * pw);
            pw *= x;
        }
        residual = std::max(residual, static_cast<double>(std::abs(val) / mag));
    }
    if (!(residual < 1e-8)) {
        std::ostringstream os;
        os << "derivative_reduce: root polish failed, residual " << residual;
        throw NumericError(os.str());
    }

    std::vector<double> out(roots.size());
    std::transform(roots.begin(), roots.end(), out.begin(), [](long double y) { return static_cast<double>(y); });
    return Reduction{KappaVector(std::move(out)), residual};
}

/// kappa~ of length m-1 with p_i(kappa~) = p_i(kappa), 1 <= i <= m-1.
[[nodiscard]] inline KappaVector derivative_reduce(const KappaVector& kappa)
{
    return derivative_reduce_with_residual(kappa).kappa;
}

} // namespace hypaf::sym
