#pragma once

// Axisymmetric conformal metrics w^2 g on the round sphere S^m: Schouten
// eigenvalues, sigma_k(g), the scale-invariant functionals
// F_k = vol^{-(m-2k)/m} int sigma_k(g) dvol and their round-sphere lower bound.
//
// Derivatives are taken of u = log w. For w = e^u the conformal formula
//   S = -Hess w / w + 2 dw (x) dw / w^2 - |dw|^2 / (2 w^2) g + g / 2
// gives, measured in w^2 g,
//   mu_rad = (-u'' + u'^2/2 + 1/2) / w^2
//   mu_sph = (-cot(theta) u' - u'^2/2 + 1/2) / w^2     (multiplicity m-1)
// with cot(theta) u' -> u'' at the poles.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hypaf/error.hpp"
#include "hypaf/flow.hpp"
#include "hypaf/grid.hpp"
#include "hypaf/surface_io.hpp"
#include "hypaf/symfunc.hpp"

namespace hypaf::conf {

class ConformalFactor {
public:
    ConformalFactor(int m, std::vector<double> theta, std::vector<double> w)
        : m_(m), theta_(std::move(theta)), w_(std::move(w))
    {
        if (m_ < 3) throw DomainError("ConformalFactor: sphere dimension m must be >= 3");
        intervals_ = grid::validate_polar_grid(theta_, "ConformalFactor");
        if (w_.size() != theta_.size()) throw DomainError("ConformalFactor: w and theta sizes differ");
        for (std::size_t i = 0; i < w_.size(); ++i) {
            if (!std::isfinite(w_[i]) || !(w_[i] > 0.0)) {
                std::ostringstream os;
                os << "ConformalFactor: w must be finite and positive, w[" << i << "] = " << w_[i];
                throw DomainError(os.str());
            }
        }
        std::vector<double> u(w_.size());
        std::transform(w_.begin(), w_.end(), u.begin(), [](double x) { return std::log(x); });
        grid::check_pole_slopes(u, spacing(), "ConformalFactor", "log w");
    }

    [[nodiscard]] static ConformalFactor sample(int m, int intervals, const std::function<double(double)>& w_of_theta)
    {
        auto theta = grid::polar_nodes(intervals);
        std::vector<double> w(theta.size());
        std::transform(theta.begin(), theta.end(), w.begin(), w_of_theta);
        return {m, std::move(theta), std::move(w)};
    }

    [[nodiscard]] static ConformalFactor round(int m, int intervals, double scale = 1.0)
    {
        return sample(m, intervals, [=](double) { return scale; });
    }

    [[nodiscard]] ConformalFactor scaled(double c) const
    {
        std::vector<double> w = w_;
        for (double& x : w) x *= c;
        return {m_, theta_, std::move(w)};
    }

    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] int intervals() const noexcept { return intervals_; }
    [[nodiscard]] double spacing() const noexcept { return theta_[1] - theta_[0]; }
    [[nodiscard]] std::span<const double> theta() const noexcept { return theta_; }
    [[nodiscard]] std::span<const double> w() const noexcept { return w_; }

private:
    int m_ = 0;
    int intervals_ = 0;
    std::vector<double> theta_;
    std::vector<double> w_;
};

struct SchoutenField {
    int m = 0;
    std::vector<double> mu_rad;
    std::vector<double> mu_sph;  ///< multiplicity m - 1
    std::vector<double> grad_log_sq;  ///< |grad log w|^2 in the round metric

    [[nodiscard]] std::size_t nodes() const noexcept { return mu_rad.size(); }
    [[nodiscard]] sym::KappaVector eigenvalues_at(std::size_t i) const
    {
        std::vector<double> e(static_cast<std::size_t>(m), mu_sph[i]);
        e[0] = mu_rad[i];
        return sym::KappaVector(std::move(e));
    }
};

[[nodiscard]] inline SchoutenField schouten(const ConformalFactor& cf)
{
    const auto w = cf.w();
    const std::size_t count = w.size();
    std::vector<double> u(count);
    for (std::size_t i = 0; i < count; ++i) u[i] = std::log(w[i]);
    const double h = cf.spacing();
    const auto du = grid::d1_even(u, h);
    const auto ddu = grid::d2_even(u, h);
    SchoutenField s;
    s.m = cf.m();
    s.mu_rad.resize(count);
    s.mu_sph.resize(count);
    s.grad_log_sq.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const bool pole = (i == 0 || i + 1 == count);
        const double g2 = du[i] * du[i];
        const double cot_du = pole ? ddu[i] : du[i] / std::tan(cf.theta()[i]);
        const double w2 = w[i] * w[i];
        s.mu_rad[i] = (-ddu[i] + 0.5 * g2 + 0.5) / w2;
        s.mu_sph[i] = (-cot_du - 0.5 * g2 + 0.5) / w2;
        s.grad_log_sq[i] = g2;
        if (!std::isfinite(s.mu_rad[i]) || !std::isfinite(s.mu_sph[i]))
            throw NumericError("schouten: non-finite eigenvalue at node " + std::to_string(i));
    }
    return s;
}

/// Quadrature weights times w^m omega_{m-1} sin^{m-1}: sum f_i dvol_i = int f dvol.
[[nodiscard]] inline std::vector<double> volume_measure(const ConformalFactor& cf)
{
    const int m = cf.m();
    const auto weights = grid::simpson_weights(cf.intervals(), cf.spacing());
    const double omega = grid::sphere_area(m - 1);
    std::vector<double> mu(weights.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        mu[i] = weights[i] * omega * std::pow(cf.w()[i], m) * std::pow(std::sin(cf.theta()[i]), m - 1);
    mu.front() = 0.0;
    mu.back() = 0.0;
    return mu;
}

[[nodiscard]] inline double volume(const ConformalFactor& cf)
{
    const auto mu = volume_measure(cf);
    const std::vector<double> one(mu.size(), 1.0);
    return grid::weighted_sum(one, mu);
}

[[nodiscard]] inline std::vector<double> sigma_k_metric(const SchoutenField& s, int k)
{
    if (k < 0 || k > s.m) throw DomainError("sigma_k_metric: need 0 <= k <= m");
    std::vector<double> out(s.nodes());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sym::sigma(k, s.eigenvalues_at(i));
    return out;
}

[[nodiscard]] inline std::vector<double> sigma_k_metric(const ConformalFactor& cf, int k)
{
    return sigma_k_metric(schouten(cf), k);
}

/// vol^{-(m-2k)/m} int sigma_k(g) dvol
[[nodiscard]] inline double functional_F(const ConformalFactor& cf, int k)
{
    const int m = cf.m();
    if (k < 0 || k > m) throw DomainError("functional_F: need 0 <= k <= m");
    const auto mu = volume_measure(cf);
    const auto sk = sigma_k_metric(cf, k);
    const std::vector<double> one(mu.size(), 1.0);
    const double vol = grid::weighted_sum(one, mu);
    return std::pow(vol, -static_cast<double>(m - 2 * k) / m) * grid::weighted_sum(sk, mu);
}

/// C(m,k)/2^k omega_m^{2k/m}, the value of F_k on round metrics.
[[nodiscard]] inline double functional_F_round(int m, int k)
{
    return sym::binomial(m, k) / std::pow(2.0, k) * std::pow(grid::sphere_area(m), 2.0 * k / m);
}

/// Largest k with the Schouten eigenvalues in Gamma_k^+ at every node
/// (0 when not even Gamma_1^+).
[[nodiscard]] inline int positivity_class(const SchoutenField& s)
{
    int cls = s.m;
    for (std::size_t i = 0; i < s.nodes() && cls > 0; ++i) {
        const auto e = sym::elementary_symmetric<double>(s.eigenvalues_at(i).values(), cls);
        int j = 1;
        while (j <= cls && e[static_cast<std::size_t>(j)] > 0.0) ++j;
        cls = j - 1;
    }
    return cls;
}

struct SobolevReport {
    int k = 0;
    double value = 0.0;
    double reference = 0.0;
    double gap = 0.0;               ///< value - reference
    int positivity = 0;             ///< largest k' with g k'-positive
    std::string positivity_label;   ///< "k-positive", "1-positive" or "none"
    bool advisory = false;          ///< hypotheses not met; gap sign carries no claim
};

/// F_k(g) >= F_k(round) for k-positive g with 0 < k < m/2, and for k = 2,
/// m > 4 already under 1-positivity.
[[nodiscard]] inline SobolevReport sobolev_gap(const ConformalFactor& cf, int k)
{
    const int m = cf.m();
    if (k < 0 || k > m) throw DomainError("sobolev_gap: need 0 <= k <= m");
    SobolevReport r;
    r.k = k;
    r.value = functional_F(cf, k);
    r.reference = functional_F_round(m, k);
    r.gap = r.value - r.reference;
    r.positivity = positivity_class(schouten(cf));
    const bool k_positive = k >= 1 && r.positivity >= k && 2 * k < m;
    const bool one_positive_extension = k == 2 && m > 4 && r.positivity >= 1;
    if (k_positive) {
        r.positivity_label = std::to_string(k) + "-positive";
    } else if (one_positive_extension) {
        r.positivity_label = "1-positive";
    } else {
        r.positivity_label = r.positivity >= 1 ? std::to_string(r.positivity) + "-positive (insufficient)" : "none";
    }
    r.advisory = !(k_positive || one_positive_extension);
    return r;
}

/// w -> w^{1 - e^{-t/m}}
[[nodiscard]] inline ConformalFactor gamma1_regularize(const ConformalFactor& cf, double t)
{
    if (!(t >= 0.0)) throw DomainError("gamma1_regularize: t must be >= 0");
    const double e = -std::expm1(-t / cf.m());
    std::vector<double> w(cf.w().begin(), cf.w().end());
    for (double& x : w) x = std::exp(e * std::log(x));
    return {cf.m(), std::vector<double>(cf.theta().begin(), cf.theta().end()), std::move(w)};
}

struct AsymptoticRatios {
    double t = 0.0;
    double R1 = 0.0;  ///< int l2 / [((n-3)(n-4)/3) int sigma_2(w^2 g) dvol]
    double R2 = 0.0;  ///< |Sigma| / vol(w^2 g)
    double int_l2 = 0.0;
    double int_sigma2_metric = 0.0;
    double area = 0.0;
    double volume = 0.0;
};

[[nodiscard]] inline ConformalFactor limit_factor(const geom::AxisymmetricHypersurface& s)
{
    std::vector<double> w(s.r().size());
    std::transform(s.r().begin(), s.r().end(), w.begin(), [](double r) { return std::sinh(r); });
    return {s.m(), std::vector<double>(s.theta().begin(), s.theta().end()), std::move(w)};
}

[[nodiscard]] inline AsymptoticRatios asymptotic_compare(const flow::FlowState& state)
{
    const int n = state.geometry.n;
    const auto cf = limit_factor(state.surface);
    const auto mu = volume_measure(cf);
    const auto s2 = sigma_k_metric(cf, 2);
    AsymptoticRatios a;
    a.t = state.t;
    a.int_l2 = state.geometry.integrate_l2();
    a.area = state.geometry.area();
    a.int_sigma2_metric = grid::weighted_sum(s2, mu);
    const std::vector<double> one(mu.size(), 1.0);
    a.volume = grid::weighted_sum(one, mu);
    a.R1 = a.int_l2 / ((n - 3) * (n - 4) / 3.0 * a.int_sigma2_metric);
    a.R2 = a.area / a.volume;
    return a;
}

[[nodiscard]] inline ConformalFactor conformal_from_profile(io::Profile p)
{
    return {p.dim, std::move(p.theta), std::move(p.values)};
}

[[nodiscard]] inline io::Profile profile_from_conformal(const ConformalFactor& cf)
{
    return {cf.m(), {cf.theta().begin(), cf.theta().end()}, {cf.w().begin(), cf.w().end()}};
}

[[nodiscard]] inline ConformalFactor read_conformal(const std::filesystem::path& path)
{
    return conformal_from_profile(io::parse_profile(io::read_text(path)));
}

inline void write_conformal(const std::filesystem::path& path, const ConformalFactor& cf)
{
    io::write_text_atomic(path, io::format_profile(profile_from_conformal(cf)));
}

} // namespace hypaf::conf
