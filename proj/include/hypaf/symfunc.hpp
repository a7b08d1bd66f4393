#pragma once

// Elementary symmetric functions of principal-curvature vectors.
//
// Everything here is evaluated with the one-element-at-a-time prefix
// recurrence
//     e_j <- e_j + x * e_{j-1}      (j descending)
// on a sorted copy of the input, so results are bit-identical under any
// permutation of the entries.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "hypaf/error.hpp"

namespace hypaf::sym {

/// Largest vector length supported by the symmetric-function code.
inline constexpr int kMaxEntries = 64;

/// Binomial coefficient C(n, k) as a double; zero outside 0 <= k <= n.
[[nodiscard]] inline double binomial(int n, int k) noexcept
{
    if (k < 0 || n < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return std::round(c);
}

/// A point of R^m holding principal curvatures. Entries are finite; m >= 1.
class KappaVector {
public:
    KappaVector() = default;

    explicit KappaVector(std::vector<double> values) : values_(std::move(values)) { validate(); }

    KappaVector(std::initializer_list<double> values) : values_(values) { validate(); }

    [[nodiscard]] int size() const noexcept { return static_cast<int>(values_.size()); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] double min() const { return *std::min_element(values_.begin(), values_.end()); }
    [[nodiscard]] double max() const { return *std::max_element(values_.begin(), values_.end()); }

    /// Copy with every entry multiplied by s.
    [[nodiscard]] KappaVector scaled(double s) const
    {
        std::vector<double> v = values_;
        for (double& x : v) x *= s;
        return KappaVector(std::move(v));
    }

    friend bool operator==(const KappaVector&, const KappaVector&) = default;

private:
    void validate() const
    {
        if (values_.empty()) throw DomainError("KappaVector: needs at least one entry");
        if (static_cast<int>(values_.size()) > kMaxEntries)
            throw DomainError("KappaVector: more than 64 entries is unsupported");
        for (double x : values_) {
            if (!std::isfinite(x)) throw DomainError("KappaVector: non-finite entry");
        }
    }

    std::vector<double> values_;
};

/// Writes e_0..e_K of `sorted` into `out` (K = out.size() - 1, truncated at
/// the input length). `sorted` is used as given; callers that need
/// permutation invariance sort first.
template <std::floating_point T>
void elementary_symmetric_prefix(std::span<const double> sorted, std::span<T> out) noexcept
{
    const int order = static_cast<int>(out.size()) - 1;
    std::fill(out.begin(), out.end(), T(0));
    out[0] = T(1);
    int filled = 0;
    for (double xd : sorted) {
        const T x = static_cast<T>(xd);
        filled = std::min(filled + 1, order);
        for (int j = filled; j >= 1; --j) {
            out[j] += x * out[j - 1];
        }
    }
}

/// e_0..e_K of x (K = max_order, default all of them) evaluated on a sorted
/// copy.
template <std::floating_point T = double>
[[nodiscard]] std::vector<T> elementary_symmetric(std::span<const double> x, int max_order = -1)
{
    const int m = static_cast<int>(x.size());
    if (max_order < 0 || max_order > m) max_order = m;
    std::array<double, kMaxEntries> buf{};
    if (m > kMaxEntries) throw DomainError("elementary_symmetric: more than 64 entries");
    std::copy(x.begin(), x.end(), buf.begin());
    std::sort(buf.begin(), buf.begin() + m);
    std::vector<T> e(static_cast<std::size_t>(max_order) + 1);
    elementary_symmetric_prefix<T>(std::span<const double>(buf.data(), static_cast<std::size_t>(m)), e);
    return e;
}

/// sigma_k(kappa). sigma_0 = 1 and sigma_{-1} = 0 by convention.
[[nodiscard]] inline double sigma(int k, const KappaVector& kappa)
{
    if (k == -1) return 0.0;
    if (k < 0 || k > kappa.size())
        throw DomainError("sigma: order " + std::to_string(k) + " outside [-1, " +
                          std::to_string(kappa.size()) + "]");
    return elementary_symmetric<double>(kappa.values(), k)[static_cast<std::size_t>(k)];
}

/// Normalized mean p_k = sigma_k / C(m, k).
template <std::floating_point T = double>
[[nodiscard]] T p_mean(int k, const KappaVector& kappa)
{
    const int m = kappa.size();
    if (k < 0 || k > m)
        throw DomainError("p_mean: order " + std::to_string(k) + " outside [0, " + std::to_string(m) + "]");
    const auto e = elementary_symmetric<T>(kappa.values(), k);
    return e[static_cast<std::size_t>(k)] / static_cast<T>(binomial(m, k));
}

/// All normalized means p_0..p_K.
template <std::floating_point T = double>
[[nodiscard]] std::vector<T> p_means(const KappaVector& kappa, int max_order)
{
    const int m = kappa.size();
    if (max_order < 0 || max_order > m)
        throw DomainError("p_means: order " + std::to_string(max_order) + " outside [0, " +
                          std::to_string(m) + "]");
    auto e = elementary_symmetric<T>(kappa.values(), max_order);
    for (int j = 0; j <= max_order; ++j) e[static_cast<std::size_t>(j)] /= static_cast<T>(binomial(m, j));
    return e;
}

/// Membership in the Garding cone: sigma_j > 0 for every 1 <= j <= k.
[[nodiscard]] inline bool in_gamma_k(const KappaVector& kappa, int k)
{
    if (k < 1 || k > kappa.size()) return false;
    const auto e = elementary_symmetric<double>(kappa.values(), k);
    for (int j = 1; j <= k; ++j) {
        if (!(e[static_cast<std::size_t>(j)] > 0.0)) return false;
    }
    return true;
}

/// k(m-k)/((k+1)(m-k+1)) - sigma_{k-1} sigma_{k+1} / sigma_k^2.
/// Nonnegative on Gamma_k^+, zero exactly at multiples of (1,...,1).
[[nodiscard]] inline double nm_gap_upper(int k, const KappaVector& kappa)
{
    const int m = kappa.size();
    if (k < 1 || k > m - 1) throw DomainError("nm_gap_upper: need 1 <= k <= m-1");
    if (!in_gamma_k(kappa, k)) throw PreconditionError("nm_gap_upper: kappa is not in Gamma_k^+");
    const auto e = elementary_symmetric<long double>(kappa.values(), k + 1);
    const long double ratio = e[k - 1] * e[k + 1] / (e[k] * e[k]);
    const long double bound = static_cast<long double>(k * (m - k)) / static_cast<long double>((k + 1) * (m - k + 1));
    return static_cast<double>(bound - ratio);
}

/// sigma_1 sigma_{k-1} / sigma_k - k m / (m-k+1).
/// Nonnegative on Gamma_k^+, zero exactly at multiples of (1,...,1).
[[nodiscard]] inline double nm_gap_lower(int k, const KappaVector& kappa)
{
    const int m = kappa.size();
    if (k < 1 || k > m) throw DomainError("nm_gap_lower: need 1 <= k <= m");
    if (!in_gamma_k(kappa, k)) throw PreconditionError("nm_gap_lower: kappa is not in Gamma_k^+");
    const auto e = elementary_symmetric<long double>(kappa.values(), k);
    if (e[k] == 0.0L) throw NumericError("nm_gap_lower: sigma_k vanishes");
    const long double bound = static_cast<long double>(k * m) / static_cast<long double>(m - k + 1);
    return static_cast<double>(e[1] * e[k - 1] / e[k] - bound);
}

} // namespace hypaf::sym
