#pragma once

// The inverse curvature flow  dX/dt = ((n-4)/4) sigma_3/sigma_4 nu  for
// axisymmetric graphs, where it reads  dr/dt = v F  (v = sqrt(1 + |grad phi|^2)).
// Time stepping is classical RK4 with a parabolic CFL step; rows of the
// monitor trace sit on a uniform time grid and steps are clipped to land on
// them exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hypaf/error.hpp"
#include "hypaf/hypersurface.hpp"
#include "hypaf/surface_io.hpp"
#include "hypaf/symfunc.hpp"

namespace hypaf::flow {

using geom::AxisymmetricHypersurface;
using geom::SurfaceGeometry;

struct FlowConfig {
    int n = 6;
    int intervals = 400;
    // parametric initial surface r0 + eps cos(mode theta); ignored when the
    // caller supplies a surface
    double r0 = 2.0;
    double eps = 0.1;
    int mode = 2;
    double dt_safety = 0.2;
    double dt_max = 0.01;
    double fixed_dt = 0.0;        ///< > 0 disables the adaptive step
    double t_max = 8.0;
    double monitor_dt = 0.05;     ///< spacing of trace rows
    double horo_tolerance = 1e-8; ///< abort once the margin drops below -tolerance
    double equality_tol = 1e-8;
    double q_slack = 1e-6;        ///< relative slack of the Q monotonicity monitor

    void validate() const
    {
        if (n < 5) throw DomainError("flow config: n must be >= 5");
        if (!(t_max > 0.0)) throw DomainError("flow config: t_max must be positive");
        if (!(dt_safety > 0.0 && dt_safety <= 1.0)) throw DomainError("flow config: dt_safety must lie in (0, 1]");
        if (!(dt_max > 0.0)) throw DomainError("flow config: dt_max must be positive");
        if (fixed_dt < 0.0) throw DomainError("flow config: fixed_dt must be >= 0");
        if (!(monitor_dt > 0.0)) throw DomainError("flow config: monitor_dt must be positive");
        if (!(horo_tolerance >= 0.0)) throw DomainError("flow config: horo_tolerance must be >= 0");
    }

    [[nodiscard]] AxisymmetricHypersurface initial_surface() const
    {
        return AxisymmetricHypersurface::perturbed_sphere(n, intervals, r0, eps, mode);
    }
};

struct FlowState {
    double t = 0.0;
    AxisymmetricHypersurface surface;
    SurfaceGeometry geometry;
};

[[nodiscard]] inline FlowState make_state(double t, AxisymmetricHypersurface s)
{
    auto g = geom::analyze(s);
    return {t, std::move(s), std::move(g)};
}

/// Raised when the integration cannot continue; carries the last state that
/// passed every check.
class FlowBreakdown : public NumericError {
public:
    FlowBreakdown(const std::string& what, FlowState last_good)
        : NumericError(what), last_good_(std::move(last_good))
    {
    }
    [[nodiscard]] const FlowState& last_good() const noexcept { return last_good_; }

private:
    FlowState last_good_;
};

/// ((n-4)/4) sigma_3/sigma_4 per node.
[[nodiscard]] inline std::vector<double> normal_speed(const FlowState& state)
{
    const auto& g = state.geometry;
    const double c = 0.25 * (g.n - 4);
    std::vector<double> f(g.l2.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double s4 = g.sigma[4][i];
        if (!(s4 > 0.0)) {
            std::ostringstream os;
            os << "normal_speed: sigma_4 = " << s4 << " <= 0 at t = " << state.t << ", theta = " << state.surface.theta()[i]
               << " (node " << i << ")";
            throw NumericError(os.str());
        }
        f[i] = c * g.sigma[3][i] / s4;
    }
    return f;
}

namespace detail {

struct Velocity {
    std::vector<double> drdt;
    double diffusion = 0.0;  ///< max_i sum_j |dF/dkappa_j| / (v lambda)^2
    double margin = INFINITY;
    std::size_t margin_node = 0;
    std::size_t bad_node = 0;
    bool finite = true;
};

/// sigma_0..sigma_4 of {a, b x count}.
inline std::array<double, 5> split_sigmas(double a, double b, int count)
{
    std::array<double, 5> s{};
    for (int k = 0; k <= 4; ++k) {
        const double only_b = sym::binomial(count, k) * std::pow(b, k);
        const double with_a = k >= 1 ? a * sym::binomial(count, k - 1) * std::pow(b, k - 1) : 0.0;
        s[static_cast<std::size_t>(k)] = only_b + with_a;
    }
    return s;
}

inline Velocity velocity(const AxisymmetricHypersurface& s, bool need_diffusion)
{
    const auto f = geom::support_fields(s);
    const auto c = geom::curvature(s, f);
    const int m = s.m();
    const double coeff = 0.25 * (s.n() - 4);
    Velocity out;
    out.drdt.resize(c.nodes());
    for (std::size_t i = 0; i < c.nodes(); ++i) {
        const auto e = split_sigmas(c.kappa_rad[i], c.kappa_sph[i], m - 1);
        const double s3 = e[3], s4 = e[4];
        const double speed = coeff * s3 / s4;
        out.drdt[i] = f.v[i] * speed;
        if (!std::isfinite(out.drdt[i]) || !(s4 > 0.0)) {
            out.finite = false;
            out.bad_node = i;
            return out;
        }
        const double margin = std::min(c.excess_rad[i], c.excess_sph[i]);
        if (margin < out.margin) {
            out.margin = margin;
            out.margin_node = i;
        }
        if (need_diffusion) {
            // dF/dkappa_i = coeff (sigma_2(k|i) sigma_4 - sigma_3 sigma_3(k|i)) / sigma_4^2
            const double a = c.kappa_rad[i], b = c.kappa_sph[i];
            const auto without_rad = split_sigmas(b, b, m - 2);  // m-1 copies of b
            const auto without_sph = split_sigmas(a, b, m - 2);
            const double d_rad = coeff * (without_rad[2] * s4 - s3 * without_rad[3]) / (s4 * s4);
            const double d_sph = coeff * (without_sph[2] * s4 - s3 * without_sph[3]) / (s4 * s4);
            const double scale = f.v[i] * f.lambda[i];
            out.diffusion = std::max(out.diffusion, (std::abs(d_rad) + (m - 1) * std::abs(d_sph)) / (scale * scale));
        }
    }
    return out;
}

inline std::string describe_node(const AxisymmetricHypersurface& s, std::size_t i)
{
    std::ostringstream os;
    os << "node " << i << " (theta = " << s.theta()[i] << ")";
    return os.str();
}

/// Stability bound of RK4 for the 4th-order second-difference stencil:
/// |spectrum| <= 16/(3 h^2) and RK4 is stable on [-2.78, 0].
inline constexpr double kCflConstant = 0.52;

inline AxisymmetricHypersurface advance(const AxisymmetricHypersurface& s, std::span<const double> k, double dt)
{
    std::vector<double> r(s.r().begin(), s.r().end());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += dt * k[i];
    return s.with_radii(std::move(r));
}

/// RK4 step from a precomputed first stage.
inline AxisymmetricHypersurface rk4(const AxisymmetricHypersurface& s, const Velocity& k1, double dt, double t)
{
    auto stage = [&](const AxisymmetricHypersurface& at, double when) {
        auto v = velocity(at, false);
        if (!v.finite) {
            std::ostringstream os;
            os << "flow breakdown: non-finite speed or sigma_4 <= 0 inside an RK stage at t = " << when << ", "
               << describe_node(at, v.bad_node);
            throw NumericError(os.str());
        }
        return v;
    };
    const auto k2 = stage(advance(s, k1.drdt, 0.5 * dt), t + 0.5 * dt);
    const auto k3 = stage(advance(s, k2.drdt, 0.5 * dt), t + 0.5 * dt);
    const auto k4 = stage(advance(s, k3.drdt, dt), t + dt);
    std::vector<double> r(s.r().begin(), s.r().end());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] += dt / 6.0 * (k1.drdt[i] + 2.0 * k2.drdt[i] + 2.0 * k3.drdt[i] + k4.drdt[i]);
    return s.with_radii(std::move(r));
}

} // namespace detail

/// Largest stable step for the current surface, times the safety factor.
[[nodiscard]] inline double cfl_step(const AxisymmetricHypersurface& s, double safety)
{
    const auto v = detail::velocity(s, true);
    if (!v.finite) throw NumericError("cfl_step: non-finite speed at " + detail::describe_node(s, v.bad_node));
    const double h = s.spacing();
    return safety * detail::kCflConstant * h * h / v.diffusion;
}

/// One RK4 step of size dt (dt = 0 returns the state unchanged).
[[nodiscard]] inline FlowState step(const FlowState& state, double dt)
{
    if (dt < 0.0) throw DomainError("step: dt must be >= 0");
    if (dt == 0.0) return state;
    try {
        const auto k1 = detail::velocity(state.surface, false);
        if (!k1.finite)
            throw NumericError("flow breakdown: non-finite speed at t = " + std::to_string(state.t) + ", " +
                               detail::describe_node(state.surface, k1.bad_node));
        return make_state(state.t + dt, detail::rk4(state.surface, k1, dt, state.t));
    } catch (const FlowBreakdown&) {
        throw;
    } catch (const std::exception& e) {
        throw FlowBreakdown(e.what(), state);
    }
}

struct TraceRow {
    double t = 0.0;
    double area = 0.0;
    double int_sigma2 = 0.0;
    double int_sigma4 = 0.0;
    double int_l2 = 0.0;
    double Q = 0.0;
    double horo_margin = 0.0;
    double umbilic_deficit = 0.0;
    double dt = 0.0;                 ///< last step taken before the row
    double resid_var_k2 = NAN;       ///< filled by finalize_residuals
    double resid_l2 = NAN;
    std::vector<double> int_sigma;   ///< k = 0..n-1
    std::vector<double> int_F_sigma; ///< int F sigma_k, k = 0..n-1
    double area_growth_gap = 0.0;    ///< (int F sigma_1 - (n-1)|S|) / ((n-1)|S|)
    std::size_t steps = 0;           ///< steps taken since t = 0
};

struct FlowTrace {
    int n = 0;
    std::vector<TraceRow> rows;
};

/// Right side of  d/dt int sigma_k = (k+1) int F sigma_{k+1} + (n-k) int F sigma_{k-1}.
[[nodiscard]] inline double variational_rhs(const TraceRow& row, int n, int k)
{
    const auto& fs = row.int_F_sigma;
    const double up = (k + 1 <= n - 1) ? (k + 1) * fs[static_cast<std::size_t>(k + 1)] : 0.0;
    const double down = k >= 1 ? (n - k) * fs[static_cast<std::size_t>(k - 1)] : 0.0;
    return up + down;
}

/// Right side of the evolution of int l2:
///   int [5 sigma_5 - (n-4)(n-5)/2 sigma_3 + (n-2)(n-3)(n-4)(n-5)/24 sigma_1] F.
[[nodiscard]] inline double l2_rhs(const TraceRow& row, int n)
{
    const auto& fs = row.int_F_sigma;
    const double s5 = n - 1 >= 5 ? fs[5] : 0.0;
    return 5.0 * s5 - 0.5 * (n - 4) * (n - 5) * fs[3] + (n - 2) * (n - 3) * (n - 4) * (n - 5) / 24.0 * fs[1];
}

[[nodiscard]] inline TraceRow make_row(const FlowState& state, double dt, std::size_t steps)
{
    const auto& g = state.geometry;
    const int n = g.n;
    TraceRow row;
    row.t = state.t;
    row.dt = dt;
    row.steps = steps;
    row.area = g.area();
    row.int_sigma2 = g.integrate_sigma(2);
    row.int_sigma4 = g.integrate_sigma(4);
    row.int_l2 = g.integrate_l2();
    row.Q = geom::quotient_Q(n, row.area, row.int_l2);
    row.horo_margin = g.horoconvexity_margin();
    row.umbilic_deficit = g.umbilicity_deficit();
    const auto speed = normal_speed(state);
    for (int k = 0; k <= n - 1; ++k) {
        const auto& sk = g.sigma[static_cast<std::size_t>(k)];
        row.int_sigma.push_back(g.integrate(sk));
        std::vector<double> fs(sk.size());
        for (std::size_t i = 0; i < fs.size(); ++i) fs[i] = speed[i] * sk[i];
        row.int_F_sigma.push_back(g.integrate(fs));
    }
    row.area_growth_gap = (row.int_F_sigma[1] - (n - 1) * row.area) / ((n - 1) * row.area);
    return row;
}

/// d/dt of a uniformly spaced series: 5-point central inside, 3-point
/// central next to the ends, one-sided 2nd order at the ends.
[[nodiscard]] inline std::vector<double> time_derivative(std::span<const double> f, double spacing)
{
    const std::size_t count = f.size();
    if (count < 3) throw DomainError("time_derivative: need at least 3 rows");
    std::vector<double> d(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (i >= 2 && i + 2 < count)
            d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * spacing);
        else if (i >= 1 && i + 1 < count)
            d[i] = (f[i + 1] - f[i - 1]) / (2.0 * spacing);
        else if (i == 0)
            d[i] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * spacing);
        else
            d[i] = (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * spacing);
    }
    return d;
}

namespace detail {

inline double row_spacing(const FlowTrace& trace)
{
    const auto& rows = trace.rows;
    const double spacing = (rows.back().t - rows.front().t) / static_cast<double>(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (std::abs(rows[i].t - rows[i - 1].t - spacing) > 1e-9 * std::max(1.0, rows.back().t))
            throw DomainError("variational_residual: trace rows are not uniformly spaced in t");
    }
    return spacing;
}

} // namespace detail

/// Relative residual (d/dt int sigma_k - rhs) / |rhs| per row.
[[nodiscard]] inline std::vector<double> variational_residual(const FlowTrace& trace, int k)
{
    if (trace.rows.size() < 3) throw DomainError("variational_residual: trace needs >= 3 rows");
    if (k < 0 || k > trace.n - 2) throw DomainError("variational_residual: need 0 <= k <= n-2");
    const double spacing = detail::row_spacing(trace);
    std::vector<double> f;
    for (const auto& r : trace.rows) f.push_back(r.int_sigma[static_cast<std::size_t>(k)]);
    const auto d = time_derivative(f, spacing);
    std::vector<double> res(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double rhs = variational_rhs(trace.rows[i], trace.n, k);
        res[i] = (d[i] - rhs) / std::abs(rhs);
    }
    return res;
}

/// (d/dt int l2 - rhs) / scale per row, scale = |int sigma_4 growth term|
/// (the l2 right side itself vanishes for n = 5).
[[nodiscard]] inline std::vector<double> l2_residual(const FlowTrace& trace)
{
    if (trace.rows.size() < 3) throw DomainError("l2_residual: trace needs >= 3 rows");
    const double spacing = detail::row_spacing(trace);
    std::vector<double> f;
    for (const auto& r : trace.rows) f.push_back(r.int_l2);
    const auto d = time_derivative(f, spacing);
    std::vector<double> res(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& row = trace.rows[i];
        const double scale = variational_rhs(row, trace.n, 4);
        res[i] = (d[i] - l2_rhs(row, trace.n)) / std::abs(scale);
    }
    return res;
}

inline void finalize_residuals(FlowTrace& trace)
{
    if (trace.rows.size() < 3) return;
    const auto k2 = variational_residual(trace, 2);
    const auto l2 = l2_residual(trace);
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        trace.rows[i].resid_var_k2 = k2[i];
        trace.rows[i].resid_l2 = l2[i];
    }
}

using Observer = std::function<void(const FlowState&, const TraceRow&)>;

struct FlowResult {
    FlowTrace trace;
    FlowState final_state;
};

/// Integrates from `initial` to config.t_max. Throws PreconditionError when
/// the start is not horoconvex and FlowBreakdown (with the partial trace
/// available through `partial`) when the integration fails.
[[nodiscard]] inline FlowResult run(const FlowConfig& config, const AxisymmetricHypersurface& initial,
                                    const Observer& observe = {}, FlowTrace* partial = nullptr)
{
    config.validate();
    if (initial.n() != config.n) throw DomainError("run: surface dimension differs from config.n");
    FlowState state = make_state(0.0, initial);
    const double margin0 = state.geometry.horoconvexity_margin();
    if (!(margin0 > 0.0)) {
        std::ostringstream os;
        os << "run: initial surface is not horoconvex (margin " << margin0 << ")";
        throw PreconditionError(os.str());
    }

    FlowTrace trace;
    trace.n = config.n;
    const int rows = std::max(2, static_cast<int>(std::ceil(config.t_max / config.monitor_dt - 1e-9)));
    const double spacing = config.t_max / rows;

    auto record = [&](double dt, std::size_t steps) {
        trace.rows.push_back(make_row(state, dt, steps));
        if (observe) observe(state, trace.rows.back());
        if (partial) *partial = trace;
    };
    record(0.0, 0);

    std::size_t steps = 0;
    double last_dt = 0.0;
    AxisymmetricHypersurface surface = initial;
    double t = 0.0;
    for (int j = 1; j <= rows; ++j) {
        const double target = j == rows ? config.t_max : j * spacing;
        while (t < target) {
            auto k1 = detail::velocity(surface, config.fixed_dt <= 0.0);
            if (!k1.finite)
                throw FlowBreakdown("flow breakdown: non-finite speed or sigma_4 <= 0 at t = " + std::to_string(t) +
                                        ", " + detail::describe_node(surface, k1.bad_node),
                                    state);
            if (k1.margin < -config.horo_tolerance) {
                std::ostringstream os;
                os << "flow breakdown: horoconvexity margin " << k1.margin << " at t = " << t << ", "
                   << detail::describe_node(surface, k1.margin_node) << " (under-resolved)";
                throw FlowBreakdown(os.str(), state);
            }
            double dt = config.fixed_dt > 0.0
                            ? config.fixed_dt
                            : std::min(config.dt_max, config.dt_safety * detail::kCflConstant * surface.spacing() *
                                                          surface.spacing() / k1.diffusion);
            if (!(dt > 0.0) || !std::isfinite(dt)) throw FlowBreakdown("flow breakdown: step size collapsed", state);
            // the last step before a row lands on it; a remainder below 1e-12 is absorbed
            const bool lands = t + dt >= target - 1e-12 * std::max(1.0, target);
            if (lands) dt = std::min(dt, target - t);
            try {
                surface = detail::rk4(surface, k1, dt, t);
            } catch (const std::exception& e) {
                throw FlowBreakdown(e.what(), state);
            }
            t = lands ? target : t + dt;
            last_dt = dt;
            ++steps;
        }
        std::optional<FlowState> next;
        try {
            next = make_state(t, surface);
        } catch (const std::exception& e) {
            throw FlowBreakdown(e.what(), state);
        }
        const auto& curv = next->geometry.curv;
        for (std::size_t i = 0; i < curv.nodes(); ++i) {
            const double margin = std::min(curv.excess_rad[i], curv.excess_sph[i]);
            if (margin < -config.horo_tolerance) {
                std::ostringstream os;
                os << "flow breakdown: horoconvexity margin " << margin << " at t = " << t << ", "
                   << detail::describe_node(surface, i) << " (under-resolved)";
                throw FlowBreakdown(os.str(), state);
            }
        }
        state = std::move(*next);
        record(last_dt, steps);
    }
    finalize_residuals(trace);
    if (partial) *partial = trace;
    return {std::move(trace), std::move(state)};
}

[[nodiscard]] inline FlowResult run(const FlowConfig& config, const Observer& observe = {})
{
    return run(config, config.initial_surface(), observe);
}

/// min Q over the trace against C(n-1,4) omega_{n-1}^{4/(n-1)}.
struct BoundCheck {
    geom::InequalityReport min_report;   ///< lhs = min_t Q
    geom::InequalityReport final_report; ///< lhs = Q at the last row
};

[[nodiscard]] inline BoundCheck limit_bound_check(const FlowTrace& trace, double tol = 1e-8)
{
    if (trace.rows.empty()) throw DomainError("limit_bound_check: empty trace");
    double qmin = INFINITY;
    for (const auto& r : trace.rows) qmin = std::min(qmin, r.Q);
    const double bound = geom::q_bound(trace.n);
    return {geom::make_report("q_bound_min", qmin, bound, tol),
            geom::make_report("q_bound_final", trace.rows.back().Q, bound, tol)};
}

struct MonotoneCheck {
    bool ok = true;
    double worst_relative_increase = -INFINITY;  ///< max (Q[i+1] - Q[i]) / Q[i]
    std::size_t worst_row = 0;
};

[[nodiscard]] inline MonotoneCheck q_monotone(const FlowTrace& trace, double slack)
{
    MonotoneCheck c;
    for (std::size_t i = 1; i < trace.rows.size(); ++i) {
        const double inc = (trace.rows[i].Q - trace.rows[i - 1].Q) / std::abs(trace.rows[i - 1].Q);
        if (inc > c.worst_relative_increase) {
            c.worst_relative_increase = inc;
            c.worst_row = i;
        }
    }
    c.ok = !(c.worst_relative_increase > slack);
    return c;
}

struct DecayFit {
    double exponent = NAN;   ///< slope of log(deficit) against t
    double log_amplitude = NAN;
    std::size_t points = 0;
};

/// Least-squares fit  log sup|h - delta| ~ a + b t  over rows with t0 <= t <= t1.
[[nodiscard]] inline DecayFit fit_decay(const FlowTrace& trace, double t0, double t1)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t count = 0;
    for (const auto& r : trace.rows) {
        if (r.t < t0 - 1e-12 || r.t > t1 + 1e-12 || !(r.umbilic_deficit > 0.0)) continue;
        const double y = std::log(r.umbilic_deficit);
        sx += r.t;
        sy += y;
        sxx += r.t * r.t;
        sxy += r.t * y;
        ++count;
    }
    DecayFit fit;
    fit.points = count;
    if (count < 2) return fit;
    const double denom = count * sxx - sx * sx;
    fit.exponent = (count * sxy - sx * sy) / denom;
    fit.log_amplitude = (sy - fit.exponent * sx) / count;
    return fit;
}

inline constexpr const char* kTraceHeader =
    "t,area,int_sigma2,int_sigma4,int_l2,Q,horo_margin,umbilic_deficit,dt,resid_var_k2,resid_l2";

[[nodiscard]] inline std::string format_trace_csv(const FlowTrace& trace)
{
    std::string out = kTraceHeader;
    out += '\n';
    for (const auto& r : trace.rows) {
        const double fields[] = {r.t,  r.area,           r.int_sigma2,      r.int_sigma4, r.int_l2,  r.Q,
                                 r.horo_margin, r.umbilic_deficit, r.dt, r.resid_var_k2, r.resid_l2};
        bool first = true;
        for (double x : fields) {
            if (!first) out += ',';
            out += io::format_double(x);
            first = false;
        }
        out += '\n';
    }
    return out;
}

} // namespace hypaf::flow
