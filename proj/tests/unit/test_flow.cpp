#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hypaf/flow.hpp"

namespace flow = hypaf::flow;
namespace geom = hypaf::geom;
using geom::AxisymmetricHypersurface;

namespace {

double sphere_radius(double r0, double t) { return std::asinh(std::exp(t) * std::sinh(r0)); }

flow::FlowConfig small_config(int n)
{
    flow::FlowConfig c;
    c.n = n;
    c.intervals = 64;
    c.t_max = 3.0;
    c.monitor_dt = 0.1;
    return c;
}

} // namespace

TEST(NormalSpeed, SphereIsTanhR)
{
    // F = ((n-4)/4) sigma_3/sigma_4 = ((n-4)/4) C(m,3)/C(m,4) / coth r = tanh r
    for (int n : {5, 6, 8}) {
        const auto state = flow::make_state(0.0, AxisymmetricHypersurface::sphere(n, 32, 1.3));
        for (double f : flow::normal_speed(state)) EXPECT_NEAR(f, std::tanh(1.3), 1e-14);
    }
}

TEST(Flow, SphereFollowsClosedForm)
{
    flow::FlowConfig c;
    c.n = 6;
    c.intervals = 64;
    c.r0 = 1.0;
    c.eps = 0.0;
    c.t_max = 2.0;
    c.dt_max = 1e-3;
    const auto res = flow::run(c);
    const double expected = sphere_radius(1.0, 2.0);
    for (double r : res.final_state.surface.r()) EXPECT_NEAR(r, expected, 1e-8);
    for (const auto& row : res.trace.rows) {
        EXPECT_LE(row.dt, 1e-3);
        EXPECT_LT(std::abs(row.area_growth_gap), 1e-10);
        EXPECT_NEAR(row.area, geom::geodesic_sphere(6, sphere_radius(1.0, row.t)).area, 1e-9 * row.area);
    }
}

TEST(Flow, FixedStepSphere)
{
    flow::FlowConfig c;
    c.n = 7;
    c.intervals = 32;
    c.r0 = 0.5;
    c.eps = 0.0;
    c.t_max = 1.0;
    c.fixed_dt = 1e-3;
    const auto res = flow::run(c);
    EXPECT_EQ(res.trace.rows.back().steps, 1000u);
    for (double r : res.final_state.surface.r()) EXPECT_NEAR(r, sphere_radius(0.5, 1.0), 1e-10);
}

TEST(Flow, StepIsFourthOrderOnSphere)
{
    auto error_at = [](double dt) {
        flow::FlowConfig c;
        c.n = 6;
        c.intervals = 32;
        c.r0 = 1.5;
        c.eps = 0.0;
        c.t_max = 1.0;
        c.monitor_dt = 0.5;
        c.fixed_dt = dt;
        const auto res = flow::run(c);
        return std::abs(res.final_state.surface.r()[7] - sphere_radius(1.5, 1.0));
    };
    const double coarse = error_at(0.025);
    const double fine = error_at(0.0125);
    EXPECT_GT(coarse, 1e-12);
    EXPECT_NEAR(coarse / fine, 16.0, 2.0);
}

TEST(Flow, ZeroStepIsIdentity)
{
    const auto state = flow::make_state(0.5, AxisymmetricHypersurface::perturbed_sphere(6, 32, 2.0, 0.1, 2));
    const auto same = flow::step(state, 0.0);
    EXPECT_EQ(same.t, 0.5);
    for (std::size_t i = 0; i < state.surface.r().size(); ++i) EXPECT_EQ(same.surface.r()[i], state.surface.r()[i]);
}

TEST(Flow, RowsLandOnUniformGrid)
{
    auto c = small_config(6);
    c.t_max = 1.0;
    c.monitor_dt = 0.3;  // rounds up to 4 rows of 0.25
    const auto res = flow::run(c);
    ASSERT_EQ(res.trace.rows.size(), 5u);
    for (std::size_t i = 0; i < res.trace.rows.size(); ++i) EXPECT_DOUBLE_EQ(res.trace.rows[i].t, 0.25 * i);
    EXPECT_EQ(res.final_state.t, 1.0);
}

TEST(Flow, MonotoneBattery)
{
    for (int n : {5, 6, 7}) {
        const auto res = flow::run(small_config(n));
        const auto mono = flow::q_monotone(res.trace, 1e-6);
        EXPECT_TRUE(mono.ok) << "n=" << n << " worst " << mono.worst_relative_increase;
        for (std::size_t i = 0; i < res.trace.rows.size(); ++i) {
            const auto& row = res.trace.rows[i];
            EXPECT_GT(row.horo_margin, 0.0);
            EXPECT_GE(row.area_growth_gap, -1e-8);
            if (i > 0 && row.t >= 1.0) {
                EXPECT_LT(row.umbilic_deficit, res.trace.rows[i - 1].umbilic_deficit);
            }
        }
    }
}

TEST(Flow, GaussBonnetConstantForNFive)
{
    const auto res = flow::run(small_config(5));
    const double expected = 8.0 * std::numbers::pi * std::numbers::pi / 3.0;
    for (const auto& row : res.trace.rows) EXPECT_NEAR(row.int_l2, expected, 1e-5 * expected);
}

TEST(Flow, VariationalResidualConverges)
{
    double previous = 0.0;
    for (int level = 0; level < 2; ++level) {
        auto c = small_config(6);
        c.t_max = 1.0;
        c.intervals = 64 << level;
        c.monitor_dt = 0.1 / (1 << level);
        const auto res = flow::run(c);
        for (int k = 0; k <= 4; ++k) {
            for (double x : flow::variational_residual(res.trace, k)) EXPECT_LT(std::abs(x), 0.2);
        }
        double worst = 0.0;
        for (const auto& row : res.trace.rows) worst = std::max(worst, std::abs(row.resid_var_k2));
        if (level == 1) {
            EXPECT_GE(previous / worst, 3.5);
        }
        previous = worst;
    }
}

TEST(Flow, L2IdentityMatchesTrace)
{
    const auto res = flow::run(small_config(6));
    for (const auto& row : res.trace.rows) EXPECT_LT(std::abs(row.resid_l2), 1e-4);
}

TEST(Flow, BoundAndDecayReports)
{
    auto c = small_config(6);
    c.t_max = 5.0;
    const auto res = flow::run(c);
    const auto bound = flow::limit_bound_check(res.trace);
    EXPECT_DOUBLE_EQ(bound.min_report.rhs, geom::q_bound(6));
    EXPECT_GT(bound.min_report.gap, 0.0);
    EXPECT_LT(bound.final_report.lhs, res.trace.rows.front().Q);
    const auto fit = flow::fit_decay(res.trace, 3.0, 5.0);
    EXPECT_EQ(fit.points, 21u);
    EXPECT_LT(fit.exponent, 0.0);
}

TEST(Flow, NonHoroconvexStartIsPrecondition)
{
    auto c = small_config(6);
    c.r0 = 0.3;
    c.eps = 0.05;
    EXPECT_THROW((void)flow::run(c), hypaf::PreconditionError);
}

TEST(Flow, UnstableStepBreaksDownWithLastGoodState)
{
    auto c = small_config(6);
    c.intervals = 256;
    c.fixed_dt = 0.05;  // ~40x the explicit stability limit
    c.monitor_dt = 0.05;
    flow::FlowTrace partial;
    try {
        (void)flow::run(c, c.initial_surface(), {}, &partial);
        FAIL() << "expected breakdown";
    } catch (const flow::FlowBreakdown& e) {
        EXPECT_NE(std::string(e.what()).find("node"), std::string::npos) << e.what();
        EXPECT_GE(e.last_good().t, 0.0);
        EXPECT_GT(e.last_good().geometry.horoconvexity_margin(), -c.horo_tolerance);
        ASSERT_FALSE(partial.rows.empty());
        EXPECT_LE(partial.rows.back().t, e.last_good().t + 1e-12);
    }
}

TEST(TimeDerivative, ExactOnQuadratics)
{
    std::vector<double> f;
    for (int i = 0; i < 9; ++i) {
        const double t = 0.5 * i;
        f.push_back(3.0 - 2.0 * t + 0.7 * t * t);
    }
    const auto d = flow::time_derivative(f, 0.5);
    for (int i = 0; i < 9; ++i) EXPECT_NEAR(d[static_cast<std::size_t>(i)], -2.0 + 1.4 * 0.5 * i, 1e-12);
}

TEST(FitDecay, RecoversSyntheticExponent)
{
    flow::FlowTrace trace;
    trace.n = 6;
    for (int i = 0; i <= 80; ++i) {
        flow::TraceRow row;
        row.t = 0.1 * i;
        row.umbilic_deficit = 0.3 * std::exp(-0.2 * row.t);
        trace.rows.push_back(row);
    }
    const auto fit = flow::fit_decay(trace, 3.0, 8.0);
    EXPECT_EQ(fit.points, 51u);
    EXPECT_NEAR(fit.exponent, -0.2, 1e-12);
    EXPECT_NEAR(fit.log_amplitude, std::log(0.3), 1e-12);
}

TEST(TraceCsv, HeaderAndRowCount)
{
    auto c = small_config(6);
    c.t_max = 0.5;
    const auto res = flow::run(c);
    const auto csv = flow::format_trace_csv(res.trace);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,area,int_sigma2,int_sigma4,int_l2,Q,horo_margin,umbilic_deficit,dt,resid_var_k2,resid_l2");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10);
        ++rows;
    }
    EXPECT_EQ(rows, res.trace.rows.size());
}

TEST(FlowConfig, RejectsBadValues)
{
    flow::FlowConfig c;
    c.dt_safety = 1.5;
    EXPECT_THROW(c.validate(), hypaf::DomainError);
    c = {};
    c.t_max = 0.0;
    EXPECT_THROW(c.validate(), hypaf::DomainError);
    c = {};
    c.n = 4;
    EXPECT_THROW(c.validate(), hypaf::DomainError);
}
