#pragma once

// Test-only reference implementations. Nothing in here may call into the
// code paths it is used to check.

#include <cmath>
#include <vector>

namespace hypaf::testing {

/// sigma_k by explicit enumeration of all k-subsets (bitmasks). m <= 20.
inline double sigma_enumerate(int k, const std::vector<double>& x)
{
    const int m = static_cast<int>(x.size());
    if (k == 0) return 1.0;
    long double total = 0;
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        long double prod = 1;
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i)) prod *= x[static_cast<std::size_t>(i)];
        total += prod;
    }
    return static_cast<double>(total);
}

inline double choose(int n, int k)
{
    double c = 1;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

inline double p_enumerate(int k, const std::vector<double>& x)
{
    return sigma_enumerate(k, x) / choose(static_cast<int>(x.size()), k);
}

} // namespace hypaf::testing
