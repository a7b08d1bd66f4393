#pragma once

// Star-shaped axisymmetric hypersurfaces of H^n written as graphs r(theta)
// over S^{n-1}, theta the polar angle. Everything is reduced to one
// dimension: integrals over S^{n-1} carry the weight
//     omega_{n-2} sin^{n-2}(theta) dtheta,
// and the principal curvatures split into a meridian value kappa_rad and a
// spherical value kappa_sph of multiplicity n-2.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hypaf/error.hpp"
#include "hypaf/grid.hpp"
#include "hypaf/symfunc.hpp"

namespace hypaf::geom {

class AxisymmetricHypersurface {
public:
    /// Validates the grid, positivity of r and pole compatibility.
    AxisymmetricHypersurface(int n, std::vector<double> theta, std::vector<double> r)
        : n_(n), theta_(std::move(theta)), r_(std::move(r))
    {
        if (n_ < 5) throw DomainError("AxisymmetricHypersurface: ambient dimension n must be >= 5");
        intervals_ = grid::validate_polar_grid(theta_, "AxisymmetricHypersurface");
        if (r_.size() != theta_.size()) throw DomainError("AxisymmetricHypersurface: r and theta sizes differ");
        check_radii(r_);
        check_poles();
    }

    /// Samples r_of_theta on the uniform grid with N intervals.
    [[nodiscard]] static AxisymmetricHypersurface sample(int n, int intervals,
                                                         const std::function<double(double)>& r_of_theta)
    {
        auto theta = grid::polar_nodes(intervals);
        std::vector<double> r(theta.size());
        std::transform(theta.begin(), theta.end(), r.begin(), r_of_theta);
        return {n, std::move(theta), std::move(r)};
    }

    /// r0 + eps cos(k theta); pole compatible for every integer k.
    [[nodiscard]] static AxisymmetricHypersurface perturbed_sphere(int n, int intervals, double r0, double eps, int k)
    {
        return sample(n, intervals, [=](double t) { return r0 + eps * std::cos(k * t); });
    }

    [[nodiscard]] static AxisymmetricHypersurface sphere(int n, int intervals, double radius)
    {
        return sample(n, intervals, [=](double) { return radius; });
    }

    /// Same grid and dimension with new radii. Checks positivity and
    /// finiteness only; used for time stepping where the pole symmetry is
    /// carried by the reflected stencils.
    [[nodiscard]] AxisymmetricHypersurface with_radii(std::vector<double> r) const
    {
        if (r.size() != r_.size()) throw DomainError("with_radii: size mismatch");
        check_radii(r);
        AxisymmetricHypersurface copy = *this;
        copy.r_ = std::move(r);
        return copy;
    }

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int m() const noexcept { return n_ - 1; }
    [[nodiscard]] int intervals() const noexcept { return intervals_; }
    [[nodiscard]] double spacing() const noexcept { return theta_[1] - theta_[0]; }
    [[nodiscard]] std::span<const double> theta() const noexcept { return theta_; }
    [[nodiscard]] std::span<const double> r() const noexcept { return r_; }

private:
    static void check_radii(std::span<const double> r)
    {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!std::isfinite(r[i]) || !(r[i] > 0.0)) {
                std::ostringstream os;
                os << "AxisymmetricHypersurface: radius must be finite and positive, r[" << i << "] = " << r[i];
                throw DomainError(os.str());
            }
        }
    }

    void check_poles() const { grid::check_pole_slopes(r_, spacing(), "AxisymmetricHypersurface", "r"); }

    int n_ = 0;
    int intervals_ = 0;
    std::vector<double> theta_;
    std::vector<double> r_;
};

/// Per-node graph quantities. phi = log tanh(r/2), so phi' = 1/lambda.
struct SupportFields {
    std::vector<double> lambda;     ///< sinh r
    std::vector<double> dlambda;    ///< cosh r
    std::vector<double> phi;
    std::vector<double> r_theta;
    std::vector<double> r_thetatheta;
    std::vector<double> phi_theta;
    std::vector<double> phi_thetatheta;
    std::vector<double> v;          ///< sqrt(1 + phi_theta^2)
};

/// r is differentiated (it is smooth and even at the poles) and the chain
/// rule gives phi_theta = r_theta / lambda and
/// phi_thetatheta = r_thetatheta / lambda - lambda' r_theta^2 / lambda^2.
[[nodiscard]] inline SupportFields support_fields(const AxisymmetricHypersurface& s)
{
    const auto r = s.r();
    const std::size_t count = r.size();
    SupportFields f;
    f.lambda.resize(count);
    f.dlambda.resize(count);
    f.phi.resize(count);
    f.phi_theta.resize(count);
    f.phi_thetatheta.resize(count);
    f.v.resize(count);
    f.r_theta = grid::d1_even(r, s.spacing());
    f.r_thetatheta = grid::d2_even(r, s.spacing());
    for (std::size_t i = 0; i < count; ++i) {
        if (!(r[i] > 0.0)) throw DomainError("support_fields: non-positive radius at node " + std::to_string(i));
        const double lam = std::sinh(r[i]);
        const double dlam = std::cosh(r[i]);
        f.lambda[i] = lam;
        f.dlambda[i] = dlam;
        f.phi[i] = std::log(std::tanh(0.5 * r[i]));
        f.phi_theta[i] = f.r_theta[i] / lam;
        f.phi_thetatheta[i] = f.r_thetatheta[i] / lam - dlam * f.r_theta[i] * f.r_theta[i] / (lam * lam);
        f.v[i] = std::hypot(1.0, f.phi_theta[i]);
    }
    return f;
}

/// Principal curvatures per node, stored also as excesses x = kappa - 1
/// computed without the cancellation of kappa - 1 for nearly horospherical
/// surfaces.
struct CurvatureField {
    int m = 0;                      ///< number of principal curvatures, n - 1
    std::vector<double> kappa_rad;
    std::vector<double> kappa_sph;  ///< multiplicity m - 1
    std::vector<double> excess_rad;
    std::vector<double> excess_sph;

    [[nodiscard]] std::size_t nodes() const noexcept { return kappa_rad.size(); }

    [[nodiscard]] sym::KappaVector kappa_at(std::size_t i) const
    {
        std::vector<double> k(static_cast<std::size_t>(m), kappa_sph[i]);
        k[0] = kappa_rad[i];
        return sym::KappaVector(std::move(k));
    }

    [[nodiscard]] sym::KappaVector excess_at(std::size_t i) const
    {
        std::vector<double> x(static_cast<std::size_t>(m), excess_sph[i]);
        x[0] = excess_rad[i];
        return sym::KappaVector(std::move(x));
    }
};

[[nodiscard]] inline CurvatureField curvature(const AxisymmetricHypersurface& s, const SupportFields& f)
{
    const auto theta = s.theta();
    const std::size_t count = theta.size();
    CurvatureField c;
    c.m = s.m();
    c.kappa_rad.resize(count);
    c.kappa_sph.resize(count);
    c.excess_rad.resize(count);
    c.excess_sph.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double lam = f.lambda[i];
        const double dlam = f.dlambda[i];
        const double v = f.v[i];
        const double rt = f.r_theta[i];
        // lambda'/(v lambda) - 1, rewritten with lambda'^2 - lambda^2 = 1
        const double base = (1.0 - rt * rt) / (v * lam * (dlam + v * lam));
        const bool pole = (i == 0 || i + 1 == count);
        const double cot_phi = pole ? f.phi_thetatheta[i] : f.phi_theta[i] / std::tan(theta[i]);
        c.excess_sph[i] = base - cot_phi / (v * lam);
        c.excess_rad[i] = base - f.phi_thetatheta[i] / (v * v * v * lam);
        c.kappa_sph[i] = 1.0 + c.excess_sph[i];
        c.kappa_rad[i] = 1.0 + c.excess_rad[i];
        if (!std::isfinite(c.kappa_sph[i]) || !std::isfinite(c.kappa_rad[i])) {
            std::ostringstream os;
            os << "curvature: non-finite principal curvature at node " << i << " (theta = " << theta[i] << ")";
            throw NumericError(os.str());
        }
    }
    return c;
}

[[nodiscard]] inline CurvatureField curvature(const AxisymmetricHypersurface& s)
{
    return curvature(s, support_fields(s));
}

/// l2 in terms of the excesses x = kappa - 1:
///   sigma_4(x) + (m-3) sigma_3(x) + (m-2)(m-3)/3 sigma_2(x).
/// Algebraically equal to sigma_4 - (n-3)(n-4)/6 sigma_2 + C(m,4) but free of
/// the cancellation between its three terms near kappa = 1.
[[nodiscard]] inline double l2_from_excess(const sym::KappaVector& x)
{
    const int m = x.size();
    if (m < 4) throw DomainError("l2_from_excess: needs m >= 4");
    const auto e = sym::elementary_symmetric<long double>(x.values(), 4);
    return static_cast<double>(e[4] + (m - 3) * e[3] + static_cast<long double>((m - 2) * (m - 3)) / 3 * e[2]);
}

/// l2 straight from its definition, for comparison.
[[nodiscard]] inline double l2_direct(const sym::KappaVector& kappa)
{
    const int m = kappa.size();
    const int n = m + 1;
    const auto e = sym::elementary_symmetric<long double>(kappa.values(), 4);
    return static_cast<double>(e[4] - static_cast<long double>((n - 3) * (n - 4)) / 6 * e[2] + sym::binomial(m, 4));
}

/// Everything needed to integrate over the surface, computed once.
struct SurfaceGeometry {
    int n = 0;
    SupportFields support;
    CurvatureField curv;
    std::vector<std::vector<double>> sigma;  ///< sigma[k][i], k = 0..n-1
    std::vector<double> l2;
    /// quadrature weight times area density: sum_i f_i measure_i = int f dmu
    std::vector<double> measure;

    [[nodiscard]] double integrate(std::span<const double> f) const { return grid::weighted_sum(f, measure); }
    [[nodiscard]] double area() const { return grid::weighted_sum(sigma[0], measure); }
    [[nodiscard]] double integrate_sigma(int k) const
    {
        if (k < 0 || k > n - 1) throw DomainError("integrate_sigma: order outside [0, n-1]");
        return grid::weighted_sum(sigma[static_cast<std::size_t>(k)], measure);
    }
    [[nodiscard]] double integrate_l2() const { return grid::weighted_sum(l2, measure); }

    /// min over nodes of min(kappa) - 1.
    [[nodiscard]] double horoconvexity_margin() const
    {
        double margin = INFINITY;
        for (std::size_t i = 0; i < curv.nodes(); ++i)
            margin = std::min({margin, curv.excess_rad[i], curv.excess_sph[i]});
        return margin;
    }

    /// sup |h - delta| = max over nodes of |kappa - 1|.
    [[nodiscard]] double umbilicity_deficit() const
    {
        double d = 0.0;
        for (std::size_t i = 0; i < curv.nodes(); ++i)
            d = std::max({d, std::abs(curv.excess_rad[i]), std::abs(curv.excess_sph[i])});
        return d;
    }
};

[[nodiscard]] inline SurfaceGeometry analyze(const AxisymmetricHypersurface& s)
{
    SurfaceGeometry g;
    g.n = s.n();
    g.support = support_fields(s);
    g.curv = curvature(s, g.support);
    const int m = s.m();
    const std::size_t count = s.theta().size();
    g.sigma.assign(static_cast<std::size_t>(m) + 1, std::vector<double>(count));
    g.l2.resize(count);
    g.measure.resize(count);
    const auto weights = grid::simpson_weights(s.intervals(), s.spacing());
    const double omega = grid::sphere_area(s.n() - 2);
    for (std::size_t i = 0; i < count; ++i) {
        const auto kappa = g.curv.kappa_at(i);
        const auto e = sym::elementary_symmetric<double>(kappa.values());
        for (int k = 0; k <= m; ++k) g.sigma[static_cast<std::size_t>(k)][i] = e[static_cast<std::size_t>(k)];
        g.l2[i] = l2_from_excess(g.curv.excess_at(i));
        const double lam = g.support.lambda[i];
        const double st = std::sin(s.theta()[i]);
        g.measure[i] = weights[i] * omega * std::pow(lam, m) * g.support.v[i] * std::pow(st, m - 1);
    }
    g.measure.front() = 0.0;
    g.measure.back() = 0.0;
    return g;
}

[[nodiscard]] inline double integrate_sigma(int k, const AxisymmetricHypersurface& s)
{
    return analyze(s).integrate_sigma(k);
}
[[nodiscard]] inline double area(const AxisymmetricHypersurface& s) { return analyze(s).area(); }
[[nodiscard]] inline double integrate_l2(const AxisymmetricHypersurface& s) { return analyze(s).integrate_l2(); }
[[nodiscard]] inline double horoconvexity_margin(const AxisymmetricHypersurface& s)
{
    return analyze(s).horoconvexity_margin();
}

/// (n-1)(n-2)(n-3)(n-4)/24, the constant term of l2.
[[nodiscard]] inline double l2_constant(int n) { return sym::binomial(n - 1, 4); }

/// |Sigma|^{-(n-5)/(n-1)} int l2.
[[nodiscard]] inline double quotient_Q(int n, double area, double int_l2)
{
    if (!(area > 0.0)) throw DomainError("functional_Q: area must be positive");
    return std::pow(area, -static_cast<double>(n - 5) / (n - 1)) * int_l2;
}

[[nodiscard]] inline double functional_Q(const SurfaceGeometry& g) { return quotient_Q(g.n, g.area(), g.integrate_l2()); }
[[nodiscard]] inline double functional_Q(const AxisymmetricHypersurface& s) { return functional_Q(analyze(s)); }

/// Lower bound of Q: C(n-1,4) omega_{n-1}^{4/(n-1)}.
[[nodiscard]] inline double q_bound(int n)
{
    return l2_constant(n) * std::pow(grid::sphere_area(n - 1), 4.0 / (n - 1));
}

struct InequalityReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;      ///< lhs - rhs
    bool equality = false; ///< |gap| <= tol * |rhs|
    std::vector<std::string> warnings;
};

inline constexpr double kReportEqualityTol = 1e-8;

[[nodiscard]] inline InequalityReport make_report(std::string name, double lhs, double rhs,
                                                  double tol = kReportEqualityTol)
{
    InequalityReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.gap = lhs - rhs;
    r.equality = std::abs(r.gap) <= tol * std::abs(rhs);
    return r;
}

// Right-hand sides as functions of the area, shared with the closed forms.
namespace rhs {

inline double af4(int n, double area)
{
    const double omega = grid::sphere_area(n - 1);
    const double ratio = area / omega;
    const double b = std::sqrt(ratio) + std::pow(ratio, 0.5 * (n - 5) / (n - 1));
    return sym::binomial(n - 1, 4) * omega * b * b;
}

inline double af2_sigma2(int n, double area)
{
    const double omega = grid::sphere_area(n - 1);
    return 0.5 * (n - 1) * (n - 2) *
           (area + std::pow(omega, 2.0 / (n - 1)) * std::pow(area, static_cast<double>(n - 3) / (n - 1)));
}

inline double brendle_hung_wang(int n, double area)
{
    const double omega = grid::sphere_area(n - 1);
    return (n - 1) * std::pow(omega, 1.0 / (n - 1)) * std::pow(area, static_cast<double>(n - 2) / (n - 1));
}

inline double de_lima_girao(int n, double area)
{
    const double omega = grid::sphere_area(n - 1);
    const double ratio = area / omega;
    return (n - 1) * omega *
           (std::pow(ratio, static_cast<double>(n - 2) / (n - 1)) + std::pow(ratio, static_cast<double>(n) / (n - 1)));
}

inline double gallego_solanes(int n, int k, double area)
{
    const double c = k == 1 ? static_cast<double>(n - 2) / (n - 1) : 1.0;
    return c * sym::binomial(n - 1, k) * area;
}

} // namespace rhs

namespace detail {

inline void warn_if_not_horoconvex(InequalityReport& r, const SurfaceGeometry& g)
{
    const double margin = g.horoconvexity_margin();
    if (margin < 0.0) {
        std::ostringstream os;
        os << "horoconvexity margin " << margin << " < 0: inequality not covered by its hypothesis";
        r.warnings.push_back(os.str());
    }
}

} // namespace detail

/// int sigma_4 >= C(n-1,4) omega {(|S|/omega)^{1/2} + (|S|/omega)^{(n-5)/(2(n-1))}}^2.
[[nodiscard]] inline InequalityReport check_af4(const SurfaceGeometry& g)
{
    auto r = make_report("af4", g.integrate_sigma(4), rhs::af4(g.n, g.area()));
    detail::warn_if_not_horoconvex(r, g);
    return r;
}

/// int sigma_2 >= (n-1)(n-2)/2 (|S| + omega^{2/(n-1)} |S|^{(n-3)/(n-1)}).
[[nodiscard]] inline InequalityReport check_af2_sigma2(const SurfaceGeometry& g)
{
    auto r = make_report("af2_sigma2", g.integrate_sigma(2), rhs::af2_sigma2(g.n, g.area()));
    double s1 = INFINITY, s2 = INFINITY;
    for (std::size_t i = 0; i < g.l2.size(); ++i) {
        s1 = std::min(s1, g.sigma[1][i]);
        s2 = std::min(s2, g.sigma[2][i]);
    }
    std::ostringstream os;
    os << "two-convexity: min sigma_1 = " << s1 << ", min sigma_2 = " << s2;
    if (s1 < 0.0 || s2 < 0.0) os << " (violated)";
    r.warnings.push_back(os.str());
    return r;
}

/// Pair (Brendle-Hung-Wang, de Lima-Girao):
///   int (lambda' H - (n-1) lambda/v) >= (n-1) omega^{1/(n-1)} |S|^{(n-2)/(n-1)},
///   int lambda' H >= (n-1) omega ((|S|/omega)^{(n-2)/(n-1)} + (|S|/omega)^{n/(n-1)}),
/// with H = sigma_1 and <grad lambda', nu> = lambda/v for a graph.
[[nodiscard]] inline std::pair<InequalityReport, InequalityReport> check_weighted_minkowski(const SurfaceGeometry& g)
{
    const std::size_t count = g.l2.size();
    std::vector<double> weighted(count), bhw(count);
    for (std::size_t i = 0; i < count; ++i) {
        weighted[i] = g.support.dlambda[i] * g.sigma[1][i];
        bhw[i] = weighted[i] - (g.n - 1) * g.support.lambda[i] / g.support.v[i];
    }
    const double a = g.area();
    auto first = make_report("minkowski_bhw", g.integrate(bhw), rhs::brendle_hung_wang(g.n, a));
    auto second = make_report("minkowski_dlg", g.integrate(weighted), rhs::de_lima_girao(g.n, a));
    double h_min = INFINITY;
    for (double h : g.sigma[1]) h_min = std::min(h_min, h);
    if (h_min <= 0.0) {
        first.warnings.push_back("surface is not mean convex");
        second.warnings.push_back("surface is not mean convex");
    }
    return {first, second};
}

/// int sigma_k > c C(n-1,k) |S|, c = 1 for k > 1, (n-2)/(n-1) for k = 1.
[[nodiscard]] inline InequalityReport check_gallego_solanes(const SurfaceGeometry& g, int k)
{
    if (k < 1 || k > g.n - 1) throw DomainError("check_gallego_solanes: need 1 <= k <= n-1");
    auto r = make_report("gallego_solanes_k" + std::to_string(k), g.integrate_sigma(k),
                         rhs::gallego_solanes(g.n, k, g.area()));
    if (g.horoconvexity_margin() < 0.0) r.warnings.push_back("convexity not certified by the horoconvexity margin");
    return r;
}

[[nodiscard]] inline InequalityReport check_af4(const AxisymmetricHypersurface& s) { return check_af4(analyze(s)); }
[[nodiscard]] inline InequalityReport check_af2_sigma2(const AxisymmetricHypersurface& s)
{
    return check_af2_sigma2(analyze(s));
}
[[nodiscard]] inline std::pair<InequalityReport, InequalityReport> check_weighted_minkowski(
    const AxisymmetricHypersurface& s)
{
    return check_weighted_minkowski(analyze(s));
}
[[nodiscard]] inline InequalityReport check_gallego_solanes(const AxisymmetricHypersurface& s, int k)
{
    return check_gallego_solanes(analyze(s), k);
}

/// Closed-form values for the geodesic sphere of the given radius.
struct SphereRecord {
    int n = 0;
    double radius = 0.0;
    double kappa = 0.0;
    double area = 0.0;
    std::vector<double> int_sigma;  ///< k = 0..n-1
    double int_l2 = 0.0;
    double Q = 0.0;
    double q_bound = 0.0;
    double horoconvexity_margin = 0.0;
    std::vector<InequalityReport> reports;
};

[[nodiscard]] inline SphereRecord geodesic_sphere(int n, double radius)
{
    if (n < 5) throw DomainError("geodesic_sphere: needs n >= 5");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("geodesic_sphere: radius must be positive");
    const int m = n - 1;
    const double sh = std::sinh(radius);
    const double ch = std::cosh(radius);
    const double omega = grid::sphere_area(m);
    SphereRecord s;
    s.n = n;
    s.radius = radius;
    s.kappa = ch / sh;
    s.area = omega * std::pow(sh, m);
    for (int k = 0; k <= m; ++k) s.int_sigma.push_back(sym::binomial(m, k) * std::pow(s.kappa, k) * s.area);
    // l2 = C(m,4) (kappa^2 - 1)^2 = C(m,4) / sinh^4
    s.int_l2 = l2_constant(n) * omega * std::pow(sh, m - 4);
    s.Q = quotient_Q(n, s.area, s.int_l2);
    s.q_bound = q_bound(n);
    s.horoconvexity_margin = std::exp(-radius) / sh;  // coth r - 1
    s.reports.push_back(make_report("af4", s.int_sigma[4], rhs::af4(n, s.area)));
    s.reports.push_back(make_report("af2_sigma2", s.int_sigma[2], rhs::af2_sigma2(n, s.area)));
    s.reports.push_back(make_report("minkowski_bhw", m / sh * s.area,
                                    rhs::brendle_hung_wang(n, s.area)));
    s.reports.push_back(make_report("minkowski_dlg", m * ch * ch / sh * s.area, rhs::de_lima_girao(n, s.area)));
    for (int k = 1; k <= 4; ++k) {
        s.reports.push_back(make_report("gallego_solanes_k" + std::to_string(k), s.int_sigma[static_cast<std::size_t>(k)],
                                        rhs::gallego_solanes(n, k, s.area)));
    }
    s.reports.push_back(make_report("q_bound", s.Q, s.q_bound));
    return s;
}

} // namespace hypaf::geom
