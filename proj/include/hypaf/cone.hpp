#pragma once

// Curvature cones, seeded samplers on them and the statistical scan of the
// refined inequality.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hypaf/parallel.hpp"
#include "hypaf/refined.hpp"
#include "hypaf/symfunc.hpp"

namespace hypaf::sym {

enum class ConeKind { Horoconvex, PairwiseProduct, GardingK, UnitBox };

[[nodiscard]] constexpr std::string_view to_string(ConeKind kind) noexcept
{
    switch (kind) {
    case ConeKind::Horoconvex: return "horoconvex";
    case ConeKind::PairwiseProduct: return "pairwise";
    case ConeKind::GardingK: return "garding";
    case ConeKind::UnitBox: return "unitbox";
    }
    return "?";
}

[[nodiscard]] inline std::optional<ConeKind> parse_cone(std::string_view name)
{
    for (ConeKind k : {ConeKind::Horoconvex, ConeKind::PairwiseProduct, ConeKind::GardingK, ConeKind::UnitBox}) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

struct ConeSpec {
    ConeKind kind = ConeKind::Horoconvex;
    int k = 0;             ///< order for GardingK
    double extent = 9.0;   ///< upper sampling bound K (entries up to about 1 + K)
};

/// Deterministic membership predicate.
[[nodiscard]] inline bool contains(const ConeSpec& cone, const KappaVector& kappa)
{
    const auto x = kappa.values();
    switch (cone.kind) {
    case ConeKind::Horoconvex:
        return std::all_of(x.begin(), x.end(), [](double v) { return v >= 1.0; });
    case ConeKind::PairwiseProduct:
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = i + 1; j < x.size(); ++j)
                if (x[i] * x[j] < 1.0) return false;
        return true;
    case ConeKind::GardingK:
        return in_gamma_k(kappa, cone.k);
    case ConeKind::UnitBox:
        return std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
    }
    return false;
}

enum class SampleLaw { Uniform, LogUniform, PatternPerturbed, PatternExact };

struct Sample {
    KappaVector kappa;
    SampleLaw law = SampleLaw::Uniform;
};

inline constexpr double kPatternPerturbation = 1e-4;

namespace detail {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform_offset(Rng& rng, double extent)
{
    return std::exp(uniform(rng, std::log(1e-6), std::log(extent)));
}

inline SampleLaw draw_law(Rng& rng)
{
    const double u = uniform(rng, 0.0, 1.0);
    if (u < 0.45) return SampleLaw::Uniform;
    if (u < 0.80) return SampleLaw::LogUniform;
    if (u < 0.92) return SampleLaw::PatternPerturbed;
    return SampleLaw::PatternExact;
}

/// Horoconvex draw under a given law; pattern laws plant the two equality
/// patterns, optionally perturbed by up to 1e-4 while staying in the cone.
inline std::vector<double> horoconvex_draw(Rng& rng, int m, double extent, SampleLaw law)
{
    std::vector<double> x(static_cast<std::size_t>(m));
    switch (law) {
    case SampleLaw::Uniform:
        for (double& v : x) v = 1.0 + uniform(rng, 0.0, extent);
        break;
    case SampleLaw::LogUniform:
        for (double& v : x) v = 1.0 + log_uniform_offset(rng, extent);
        break;
    case SampleLaw::PatternPerturbed:
    case SampleLaw::PatternExact: {
        const bool case_one = uniform(rng, 0.0, 1.0) < 0.5;
        if (case_one) {
            const double c = uniform(rng, 0.0, 1.0) < 0.2 ? 1.0 : 1.0 + uniform(rng, 0.0, extent);
            std::fill(x.begin(), x.end(), c);
        } else {
            std::fill(x.begin(), x.end(), 1.0);
            const auto slot = std::uniform_int_distribution<int>(0, m - 1)(rng);
            x[static_cast<std::size_t>(slot)] = 1.0 + 1e-3 + uniform(rng, 0.0, extent);
        }
        if (law == SampleLaw::PatternPerturbed) {
            for (double& v : x) {
                const double d = uniform(rng, -kPatternPerturbation, kPatternPerturbation);
                v = std::max(1.0, v + d);
                if (v == 1.0) v = 1.0 + std::abs(d);
            }
        }
        break;
    }
    }
    return x;
}

inline std::vector<double> pairwise_draw(Rng& rng, int m, double extent, SampleLaw law)
{
    if (law == SampleLaw::PatternExact || law == SampleLaw::PatternPerturbed || uniform(rng, 0.0, 1.0) < 0.5)
        return horoconvex_draw(rng, m, extent, law);
    // exactly one entry below 1; the rest at least its reciprocal
    const double small = uniform(rng, 1.0 / (1.0 + extent), 1.0);
    std::vector<double> x(static_cast<std::size_t>(m));
    for (double& v : x) {
        const double offset = law == SampleLaw::Uniform ? uniform(rng, 0.0, extent) : log_uniform_offset(rng, extent);
        v = 1.0 / small + offset;
    }
    x[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, m - 1)(rng))] = small;
    return x;
}

inline std::vector<double> unitbox_draw(Rng& rng, int m, SampleLaw law)
{
    std::vector<double> x(static_cast<std::size_t>(m));
    switch (law) {
    case SampleLaw::Uniform:
        for (double& v : x) v = uniform(rng, 0.0, 1.0);
        break;
    case SampleLaw::LogUniform:
        for (double& v : x) v = std::exp(uniform(rng, std::log(1e-6), 0.0));
        break;
    case SampleLaw::PatternPerturbed:
    case SampleLaw::PatternExact: {
        const double c = uniform(rng, 0.05, 1.0);
        std::fill(x.begin(), x.end(), c);
        if (law == SampleLaw::PatternPerturbed) {
            for (double& v : x) v = std::clamp(v + uniform(rng, -kPatternPerturbation, kPatternPerturbation), 0.0, 1.0);
        }
        break;
    }
    }
    return x;
}

inline std::vector<double> garding_draw(Rng& rng, int m, int k, double extent)
{
    std::vector<double> x(static_cast<std::size_t>(m));
    for (int attempt = 0; attempt < 64; ++attempt) {
        for (double& v : x) v = uniform(rng, -1.0, 1.0 + extent);
        if (in_gamma_k(KappaVector(x), k)) return x;
    }
    for (double& v : x) v = std::abs(v) + 1e-3;
    return x;
}

} // namespace detail

/// One seeded draw from the cone. Pattern laws are only meaningful for the
/// horoconvex-based cones and UnitBox; GardingK always draws uniformly.
[[nodiscard]] inline Sample sample_cone(const ConeSpec& cone, int m, std::mt19937_64& rng)
{
    if (m < 1 || m > kMaxEntries) throw DomainError("sample_cone: m out of range");
    const SampleLaw law = detail::draw_law(rng);
    switch (cone.kind) {
    case ConeKind::Horoconvex: return {KappaVector(detail::horoconvex_draw(rng, m, cone.extent, law)), law};
    case ConeKind::PairwiseProduct: return {KappaVector(detail::pairwise_draw(rng, m, cone.extent, law)), law};
    case ConeKind::UnitBox: return {KappaVector(detail::unitbox_draw(rng, m, law)), law};
    case ConeKind::GardingK: {
        if (cone.k < 1 || cone.k > m) throw DomainError("sample_cone: Garding order outside [1, m]");
        return {KappaVector(detail::garding_draw(rng, m, cone.k, cone.extent)), SampleLaw::Uniform};
    }
    }
    throw DomainError("sample_cone: unknown cone");
}

/// Independent generator for substream `block` of a scan.
[[nodiscard]] inline std::mt19937_64 substream(std::uint64_t seed, int m, ConeKind kind, std::uint64_t block)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(kind),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    return std::mt19937_64(seq);
}

struct ScanOptions {
    double violation_tol = 1e-12;   ///< refined_gap above this counts as a violation
    double equality_tol = kDefaultEqualityTol;
    double near_pattern_tol = 1e-3;
    int block_size = 4096;
};

struct ScanSummary {
    ConeSpec cone;
    int m = 0;
    long long count = 0;
    double max_gap = -INFINITY;
    KappaVector argmax;
    double min_gap = INFINITY;
    KappaVector argmin;
    long long violations = 0;
    long long positive = 0;          ///< gap > violation_tol
    long long negative = 0;          ///< gap < -violation_tol
    long long case_one = 0;
    long long case_two = 0;
    long long interior = 0;
    long long planted = 0;           ///< exact equality patterns drawn
    long long planted_flagged = 0;   ///< of those, classified CaseI/CaseII with |gap| < equality_tol
    long long equality_mismatch = 0; ///< pattern match disagrees with |gap| < equality_tol
    long long interior_near_zero = 0;///< Interior, |gap| < equality_tol, not near any pattern
    long long reports_outside_cone = 0;
    double max_near_zero_distance = 0.0; ///< largest pattern_distance among Interior samples with |gap| < equality_tol

    [[nodiscard]] bool sign_change() const noexcept { return positive > 0 && negative > 0; }
};

namespace detail {

inline void merge_into(ScanSummary& acc, const ScanSummary& part)
{
    if (part.max_gap > acc.max_gap) {
        acc.max_gap = part.max_gap;
        acc.argmax = part.argmax;
    }
    if (part.min_gap < acc.min_gap) {
        acc.min_gap = part.min_gap;
        acc.argmin = part.argmin;
    }
    acc.count += part.count;
    acc.violations += part.violations;
    acc.positive += part.positive;
    acc.negative += part.negative;
    acc.case_one += part.case_one;
    acc.case_two += part.case_two;
    acc.interior += part.interior;
    acc.planted += part.planted;
    acc.planted_flagged += part.planted_flagged;
    acc.equality_mismatch += part.equality_mismatch;
    acc.interior_near_zero += part.interior_near_zero;
    acc.reports_outside_cone += part.reports_outside_cone;
    acc.max_near_zero_distance = std::max(acc.max_near_zero_distance, part.max_near_zero_distance);
}

} // namespace detail

/// Samples `count` vectors from the cone and evaluates refined_gap on each.
/// Blocks of the index range use independent seeded substreams and are
/// merged in block order, so the summary does not depend on thread count.
[[nodiscard]] inline ScanSummary scan_cone(const ConeSpec& cone, int m, long long count, std::uint64_t seed,
                                           const ScanOptions& options = {}, int workers = thread_count())
{
    if (count < 1) throw DomainError("scan_cone: count must be >= 1");
    if (m < 5) throw DomainError("scan_cone: refined_gap needs m >= 5");
    const long long block = options.block_size;
    const int blocks = static_cast<int>((count + block - 1) / block);
    std::vector<ScanSummary> parts(static_cast<std::size_t>(blocks));

    parallel_for(
        blocks,
        [&](int b) {
            ScanSummary& part = parts[static_cast<std::size_t>(b)];
            auto rng = substream(seed, m, cone.kind, static_cast<std::uint64_t>(b));
            const long long begin = static_cast<long long>(b) * block;
            const long long end = std::min(count, begin + block);
            for (long long i = begin; i < end; ++i) {
                const Sample s = sample_cone(cone, m, rng);
                if (!contains(cone, s.kappa)) ++part.reports_outside_cone;
                const GapReport r = refined_gap(s.kappa, options.equality_tol);
                ++part.count;
                if (r.gap > part.max_gap) {
                    part.max_gap = r.gap;
                    part.argmax = s.kappa;
                }
                if (r.gap < part.min_gap) {
                    part.min_gap = r.gap;
                    part.argmin = s.kappa;
                }
                if (r.gap > options.violation_tol) {
                    ++part.positive;
                    if (cone.kind == ConeKind::Horoconvex || cone.kind == ConeKind::PairwiseProduct) ++part.violations;
                }
                if (r.gap < -options.violation_tol) ++part.negative;

                const Classification pattern = classify_equality(s.kappa, options.equality_tol);
                const bool zero_gap = std::abs(r.gap) < options.equality_tol;
                switch (pattern) {
                case Classification::EqualityCaseI: ++part.case_one; break;
                case Classification::EqualityCaseII: ++part.case_two; break;
                default: ++part.interior; break;
                }
                if (cone.kind == ConeKind::Horoconvex) {
                    if (s.law == SampleLaw::PatternExact) {
                        ++part.planted;
                        if (pattern != Classification::Interior && zero_gap) ++part.planted_flagged;
                    }
                    if ((pattern != Classification::Interior) != zero_gap) {
                        ++part.equality_mismatch;
                        if (pattern == Classification::Interior) {
                            const double d = pattern_distance(s.kappa);
                            part.max_near_zero_distance = std::max(part.max_near_zero_distance, d);
                            if (d > options.near_pattern_tol) ++part.interior_near_zero;
                        }
                    }
                }
            }
        },
        workers);

    ScanSummary summary;
    summary.cone = cone;
    summary.m = m;
    for (const auto& part : parts) detail::merge_into(summary, part);
    return summary;
}

} // namespace hypaf::sym
