#pragma once

// Polynomial identities behind the two auxiliary inequalities, for m = 4 and
// m = 5. The left side is assembled from normalized means, the right side by
// explicit enumeration of the distinct terms of each cyclic sum.

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "hypaf/symfunc.hpp"

namespace hypaf::sym {

enum class IdentityTag {
    M4First,     ///< p1 p3 - p4 = 1/16 sum k1 k2 (k3 - k4)^2
    M4Second,    ///< 3(p2 p4 - p3^2) = -1/16 sum k1^2 k2^2 (k3 - k4)^2
    M4Combined,  ///< claim-1 gap = 1/16 sum k1 k2 (1 - k1 k2)(k3 - k4)^2
    M5First,     ///< p1 p3 - p4 = 1/100 sum k1 k2 (k3 - k4)^2
    M5Second,    ///< 3(p5 p3 - p4^2) = -3/100 sum (k1 k2 k3)^2 (k4 - k5)^2
    M5Combined,  ///< claim-2 gap = 1/100 sum [k1k2 + k2k3 + k1k3 - 3(k1k2k3)^2](k4 - k5)^2
};

inline constexpr std::array<IdentityTag, 6> kAllIdentities{
    IdentityTag::M4First, IdentityTag::M4Second, IdentityTag::M4Combined,
    IdentityTag::M5First, IdentityTag::M5Second, IdentityTag::M5Combined};

[[nodiscard]] constexpr std::string_view to_string(IdentityTag tag) noexcept
{
    switch (tag) {
    case IdentityTag::M4First: return "m4-first";
    case IdentityTag::M4Second: return "m4-second";
    case IdentityTag::M4Combined: return "m4-combined";
    case IdentityTag::M5First: return "m5-first";
    case IdentityTag::M5Second: return "m5-second";
    case IdentityTag::M5Combined: return "m5-combined";
    }
    return "?";
}

[[nodiscard]] constexpr int identity_dimension(IdentityTag tag) noexcept
{
    switch (tag) {
    case IdentityTag::M4First:
    case IdentityTag::M4Second:
    case IdentityTag::M4Combined: return 4;
    default: return 5;
    }
}

/// Both sides of an identity plus the magnitude of the terms each side is
/// summed from. `relative()` measures the residual against that magnitude,
/// which is the scale roundoff actually acts on.
struct IdentityResidual {
    long double lhs = 0;
    long double rhs = 0;
    long double lhs_magnitude = 0;
    long double rhs_magnitude = 0;

    [[nodiscard]] double absolute() const noexcept { return static_cast<double>(std::abs(lhs - rhs)); }

    [[nodiscard]] double relative(double floor = 1e-14) const noexcept
    {
        const long double scale = std::max({lhs_magnitude, rhs_magnitude, static_cast<long double>(floor)});
        return static_cast<double>(std::abs(lhs - rhs) / scale);
    }
};

namespace detail {

struct TermSum {
    long double sum = 0;
    long double magnitude = 0;
    void add(long double t) noexcept
    {
        sum += t;
        magnitude += std::abs(t);
    }
};

inline long double sq(long double x) noexcept { return x * x; }

} // namespace detail

[[nodiscard]] inline IdentityResidual evaluate_identity(IdentityTag tag, const KappaVector& kappa)
{
    const int m = identity_dimension(tag);
    if (kappa.size() != m)
        throw DomainError("cyclic identity " + std::string(to_string(tag)) + " needs m = " + std::to_string(m) +
                          ", got " + std::to_string(kappa.size()));
    std::array<long double, 5> k{};
    for (int i = 0; i < m; ++i) k[i] = kappa[static_cast<std::size_t>(i)];
    const auto p = p_means<long double>(kappa, m);

    detail::TermSum left;
    detail::TermSum right;
    using detail::sq;

    switch (tag) {
    case IdentityTag::M4First:
    case IdentityTag::M4Second:
    case IdentityTag::M4Combined: {
        if (tag != IdentityTag::M4Second) {
            left.add(p[1] * p[3]);
            left.add(-p[4]);
        }
        if (tag != IdentityTag::M4First) {
            left.add(3 * p[2] * p[4]);
            left.add(-3 * p[3] * p[3]);
        }
        // pair {a,b} carries the product, the complementary pair the difference
        for (int a = 0; a < 4; ++a) {
            for (int b = a + 1; b < 4; ++b) {
                int c = -1, d = -1;
                for (int i = 0; i < 4; ++i) {
                    if (i == a || i == b) continue;
                    (c < 0 ? c : d) = i;
                }
                const long double prod = k[a] * k[b];
                const long double diff2 = sq(k[c] - k[d]);
                if (tag == IdentityTag::M4First) right.add(prod * diff2 / 16);
                else if (tag == IdentityTag::M4Second) right.add(-prod * prod * diff2 / 16);
                else right.add(prod * (1 - prod) * diff2 / 16);
            }
        }
        break;
    }
    case IdentityTag::M5First: {
        left.add(p[1] * p[3]);
        left.add(-p[4]);
        for (int a = 0; a < 5; ++a) {
            for (int b = a + 1; b < 5; ++b) {
                for (int c = 0; c < 5; ++c) {
                    if (c == a || c == b) continue;
                    for (int d = c + 1; d < 5; ++d) {
                        if (d == a || d == b) continue;
                        right.add(k[a] * k[b] * sq(k[c] - k[d]) / 100);
                    }
                }
            }
        }
        break;
    }
    case IdentityTag::M5Second:
    case IdentityTag::M5Combined: {
        if (tag == IdentityTag::M5Combined) {
            left.add(p[1] * p[3]);
            left.add(-p[4]);
        }
        left.add(3 * p[5] * p[3]);
        left.add(-3 * p[4] * p[4]);
        // triple {a,b,c}, the remaining pair {d,e} carries the difference
        for (int a = 0; a < 5; ++a) {
            for (int b = a + 1; b < 5; ++b) {
                for (int c = b + 1; c < 5; ++c) {
                    int d = -1, e = -1;
                    for (int i = 0; i < 5; ++i) {
                        if (i == a || i == b || i == c) continue;
                        (d < 0 ? d : e) = i;
                    }
                    const long double triple = k[a] * k[b] * k[c];
                    const long double diff2 = sq(k[d] - k[e]);
                    if (tag == IdentityTag::M5Second) {
                        right.add(-3 * triple * triple * diff2 / 100);
                    } else {
                        const long double pairs = k[a] * k[b] + k[b] * k[c] + k[a] * k[c];
                        right.add((pairs - 3 * triple * triple) * diff2 / 100);
                    }
                }
            }
        }
        break;
    }
    }

    return IdentityResidual{left.sum, right.sum, left.magnitude, right.magnitude};
}

/// |LHS - RHS| of the tagged identity.
[[nodiscard]] inline double cyclic_identity_residual(IdentityTag tag, const KappaVector& kappa)
{
    return evaluate_identity(tag, kappa).absolute();
}

} // namespace hypaf::sym
