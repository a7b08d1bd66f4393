#pragma once

// Uniform polar grids on [0, pi], pole-reflected finite differences and the
// composite Simpson rule shared by the surface and conformal code.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hypaf/error.hpp"

namespace hypaf::grid {

/// Smallest number of intervals accepted for a polar grid.
inline constexpr int kMinIntervals = 32;

/// Area of the unit sphere S^k, 2 pi^{(k+1)/2} / Gamma((k+1)/2).
[[nodiscard]] inline double sphere_area(int k)
{
    if (k < 0) throw DomainError("sphere_area: dimension must be >= 0");
    const double h = 0.5 * (k + 1);
    return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

/// theta_i = i pi / N, i = 0..N.
[[nodiscard]] inline std::vector<double> polar_nodes(int intervals)
{
    if (intervals < 1) throw DomainError("polar_nodes: need at least one interval");
    std::vector<double> theta(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) theta[static_cast<std::size_t>(i)] = std::numbers::pi * i / intervals;
    theta.back() = std::numbers::pi;
    return theta;
}

/// Checks a node vector is the uniform polar grid with N >= 32 even
/// intervals. Returns N.
inline int validate_polar_grid(std::span<const double> theta, const char* who)
{
    const int intervals = static_cast<int>(theta.size()) - 1;
    if (intervals < kMinIntervals)
        throw DomainError(std::string(who) + ": need N >= 32 intervals, got " + std::to_string(intervals));
    if (intervals % 2 != 0) throw DomainError(std::string(who) + ": N must be even (Simpson quadrature)");
    const double h = std::numbers::pi / intervals;
    for (int i = 0; i <= intervals; ++i) {
        const double t = theta[static_cast<std::size_t>(i)];
        if (!std::isfinite(t) || std::abs(t - i * h) > 1e-12 * (1.0 + i * h))
            throw DomainError(std::string(who) + ": theta must be the uniform grid i*pi/N on [0, pi] (node " +
                              std::to_string(i) + ")");
        if (i > 0 && !(t > theta[static_cast<std::size_t>(i) - 1]))
            throw DomainError(std::string(who) + ": theta must be strictly increasing");
    }
    return intervals;
}

/// Pole compatibility of a profile that should be even about theta = 0 and
/// pi. The one-sided 2nd-order slope is O(h^3) for an even function; a kink
/// of slope s shows up as s itself. Tolerance 1e-6 + 0.05 h osc + 1e-10 max.
inline void check_pole_slopes(std::span<const double> f, double h, const char* who, const char* field)
{
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    const double tol = 1e-6 + 0.05 * h * (*hi - *lo) + 1e-10 * std::abs(*hi);
    const std::size_t last = f.size() - 1;
    const double s0 = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    const double s1 = (3.0 * f[last] - 4.0 * f[last - 1] + f[last - 2]) / (2.0 * h);
    if (std::abs(s0) > tol || std::abs(s1) > tol) {
        const bool north = std::abs(s0) > tol;
        throw DomainError(std::string(who) + ": " + field + " is not pole compatible (slope " +
                          std::to_string(north ? s0 : s1) + " at theta = " + (north ? "0" : "pi") + ")");
    }
}

namespace detail {

/// f at index j of a pole-even function, reflecting across 0 and N.
inline double even_at(std::span<const double> f, int j)
{
    const int last = static_cast<int>(f.size()) - 1;
    if (j < 0) j = -j;
    if (j > last) j = 2 * last - j;
    return f[static_cast<std::size_t>(j)];
}

} // namespace detail

/// First derivative of a function even about both poles, 4th-order central.
[[nodiscard]] inline std::vector<double> d1_even(std::span<const double> f, double h)
{
    const int count = static_cast<int>(f.size());
    std::vector<double> out(f.size());
    for (int i = 0; i < count; ++i) {
        using detail::even_at;
        out[static_cast<std::size_t>(i)] =
            (-even_at(f, i + 2) + 8.0 * even_at(f, i + 1) - 8.0 * even_at(f, i - 1) + even_at(f, i - 2)) / (12.0 * h);
    }
    // odd about the poles: exact zeros there
    out.front() = 0.0;
    out.back() = 0.0;
    return out;
}

/// Second derivative of a function even about both poles, 4th-order central.
[[nodiscard]] inline std::vector<double> d2_even(std::span<const double> f, double h)
{
    const int count = static_cast<int>(f.size());
    std::vector<double> out(f.size());
    for (int i = 0; i < count; ++i) {
        using detail::even_at;
        out[static_cast<std::size_t>(i)] = (-even_at(f, i + 2) + 16.0 * even_at(f, i + 1) - 30.0 * even_at(f, i) +
                                            16.0 * even_at(f, i - 1) - even_at(f, i - 2)) /
                                           (12.0 * h * h);
    }
    return out;
}

/// Composite Simpson weights on N (even) intervals of width h.
[[nodiscard]] inline std::vector<double> simpson_weights(int intervals, double h)
{
    if (intervals < 2 || intervals % 2 != 0) throw DomainError("simpson_weights: N must be even and >= 2");
    std::vector<double> w(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) {
        const double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[static_cast<std::size_t>(i)] = c * h / 3.0;
    }
    return w;
}

/// Sum of f_i * w_i (the quadrature value once w carries the weights).
[[nodiscard]] inline double weighted_sum(std::span<const double> f, std::span<const double> w)
{
    if (f.size() != w.size()) throw DomainError("weighted_sum: size mismatch");
    long double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += static_cast<long double>(f[i]) * w[i];
    return static_cast<double>(s);
}

inline constexpr const char* kQuadratureName = "simpson";

} // namespace hypaf::grid
