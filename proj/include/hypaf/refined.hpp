#pragma once

// The refined Newton-MacLaurin inequality on the horoconvex cone and the two
// auxiliary inequalities it splits into.

#include <algorithm>
#include <cmath>
#include <vector>
#include <string>
#include <string_view>

#include "hypaf/symfunc.hpp"

namespace hypaf::sym {

enum class Classification { StrictNegative, EqualityCaseI, EqualityCaseII, Positive, Interior };

[[nodiscard]] constexpr std::string_view to_string(Classification c) noexcept
{
    switch (c) {
    case Classification::StrictNegative: return "StrictNegative";
    case Classification::EqualityCaseI: return "EqualityCaseI";
    case Classification::EqualityCaseII: return "EqualityCaseII";
    case Classification::Positive: return "Positive";
    case Classification::Interior: return "Interior";
    }
    return "?";
}

inline constexpr double kDefaultEqualityTol = 1e-9;

/// Pattern test for the equality cases:
///   CaseI  - all entries equal (max spread <= tol),
///   CaseII - exactly one entry above 1 + tol, all others within tol of 1,
///   otherwise Interior.
[[nodiscard]] inline Classification classify_equality(const KappaVector& kappa, double tol = kDefaultEqualityTol)
{
    if (!(tol > 0.0)) throw DomainError("classify_equality: tol must be positive");
    if (kappa.max() - kappa.min() <= tol) return Classification::EqualityCaseI;
    int above = 0;
    int near_one = 0;
    for (double x : kappa.values()) {
        if (x > 1.0 + tol) ++above;
        else if (std::abs(x - 1.0) <= tol) ++near_one;
    }
    if (above == 1 && near_one == kappa.size() - 1) return Classification::EqualityCaseII;
    return Classification::Interior;
}

/// Sup-distance from kappa to the nearer of the two equality patterns: the
/// spread max - min for CaseI, and for CaseII the largest |kappa_i - 1| over
/// all entries except the largest one.
[[nodiscard]] inline double pattern_distance(const KappaVector& kappa)
{
    const double spread = kappa.max() - kappa.min();
    std::vector<double> x(kappa.values().begin(), kappa.values().end());
    std::sort(x.begin(), x.end());
    double rest = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) rest = std::max(rest, std::abs(x[i] - 1.0));
    return std::min(spread, rest);
}

struct GapReport {
    std::string operation;
    double gap = 0.0;          ///< p-normalized left-hand side
    double sigma_form = 0.0;   ///< un-normalized sigma form, = (m-4) C(m,3) * gap
    Classification classification = Classification::Interior;
    KappaVector witness;
};

namespace detail {

struct LowMeans {
    long double p1, p2, p3, p4, p5;
};

inline LowMeans low_means(const KappaVector& kappa, int order)
{
    const auto p = p_means<long double>(kappa, order);
    LowMeans out{};
    out.p1 = p[1];
    out.p2 = order >= 2 ? p[2] : 0.0L;
    out.p3 = order >= 3 ? p[3] : 0.0L;
    out.p4 = order >= 4 ? p[4] : 0.0L;
    out.p5 = order >= 5 ? p[5] : 0.0L;
    return out;
}

inline Classification classify_gap(long double gap, const KappaVector& kappa, double tol)
{
    if (gap > tol) return Classification::Positive;
    if (gap < -tol) return Classification::StrictNegative;
    const Classification pattern = classify_equality(kappa, tol);
    if (pattern != Classification::Interior) return pattern;
    return gap > 0 ? Classification::Positive : Classification::StrictNegative;
}

} // namespace detail

/// Sigma-form left side
///   (5 s5 s3/s4 - 4(n-5)/(n-4) s4) + (n-4)(n-5)/6 (4(n-3)/(n-4) s2 - 3 s3^2/s4)
///     + (n-2)(n-3)(n-4)(n-5)/24 (s1 s3/s4 - 4(n-1)/(n-4)),   n - 1 = m.
[[nodiscard]] inline long double refined_sigma_form(const KappaVector& kappa)
{
    const int m = kappa.size();
    if (m < 5) throw DomainError("refined_sigma_form: needs m >= 5");
    const auto s = elementary_symmetric<long double>(kappa.values(), 5);
    if (s[4] == 0.0L) throw NumericError("refined_sigma_form: sigma_4 vanishes");
    const long double n = m + 1;
    const long double t1 = 5 * s[5] * s[3] / s[4] - 4 * (n - 5) / (n - 4) * s[4];
    const long double t2 = (n - 4) * (n - 5) / 6 * (4 * (n - 3) / (n - 4) * s[2] - 3 * s[3] * s[3] / s[4]);
    const long double t3 = (n - 2) * (n - 3) * (n - 4) * (n - 5) / 24 * (s[1] * s[3] / s[4] - 4 * (n - 1) / (n - 4));
    return t1 + t2 + t3;
}

/// (p5 p3/p4 - p4) + 2 (p2 - p3^2/p4) + (p1 p3/p4 - 1).
/// Nonpositive on the horoconvex cone; zero exactly on the two equality
/// patterns. Evaluated in extended precision.
[[nodiscard]] inline GapReport refined_gap(const KappaVector& kappa, double tol = kDefaultEqualityTol)
{
    const int m = kappa.size();
    if (m < 5) throw DomainError("refined_gap: needs m >= 5, got " + std::to_string(m));
    const auto p = detail::low_means(kappa, 5);
    if (p.p4 == 0.0L) throw NumericError("refined_gap: sigma_4 vanishes");
    const long double gap = (p.p5 * p.p3 / p.p4 - p.p4) + 2 * (p.p2 - p.p3 * p.p3 / p.p4) + (p.p1 * p.p3 / p.p4 - 1);

    const long double sform = refined_sigma_form(kappa);
    const long double factor = static_cast<long double>(m - 4) * static_cast<long double>(binomial(m, 3));
    const long double scale = std::abs(p.p5 * p.p3 / p.p4) + std::abs(p.p4) + 2 * std::abs(p.p2) +
                              2 * std::abs(p.p3 * p.p3 / p.p4) + std::abs(p.p1 * p.p3 / p.p4) + 1;
    if (std::abs(sform - factor * gap) > 1e-10L * factor * scale)
        throw NumericError("refined_gap: sigma form and normalized form disagree");

    GapReport report;
    report.operation = "refined_gap";
    report.gap = static_cast<double>(gap);
    report.sigma_form = static_cast<double>(sform);
    report.classification = detail::classify_gap(gap, kappa, tol);
    report.witness = kappa;
    return report;
}

/// 3 (p2 p4 - p3^2) + (p1 p3 - p4); nonpositive on the horoconvex cone.
[[nodiscard]] inline double claim1_gap(const KappaVector& kappa)
{
    if (kappa.size() < 4) throw DomainError("claim1_gap: needs m >= 4");
    const auto p = detail::low_means(kappa, 4);
    return static_cast<double>(3 * (p.p2 * p.p4 - p.p3 * p.p3) + (p.p1 * p.p3 - p.p4));
}

/// 3 (p5 p3 - p4^2) + (p1 p3 - p4); nonpositive on the horoconvex cone.
[[nodiscard]] inline double claim2_gap(const KappaVector& kappa)
{
    if (kappa.size() < 5) throw DomainError("claim2_gap: needs m >= 5");
    const auto p = detail::low_means(kappa, 5);
    return static_cast<double>(3 * (p.p5 * p.p3 - p.p4 * p.p4) + (p.p1 * p.p3 - p.p4));
}

} // namespace hypaf::sym
