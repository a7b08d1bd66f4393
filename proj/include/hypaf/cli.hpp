#pragma once

// Command implementations behind the `hypaf` tool. Each command returns its
// JSON document and exit code; file output, digests and the run manifest are
// handled by `execute` so the commands stay testable in-process.
//
// Exit codes: 0 ok, 1 a monitor failed, 2 invalid input or precondition,
// 3 flow breakdown.

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hypaf/cone.hpp"
#include "hypaf/conformal.hpp"
#include "hypaf/error.hpp"
#include "hypaf/flow.hpp"
#include "hypaf/hypersurface.hpp"
#include "hypaf/identities.hpp"
#include "hypaf/parallel.hpp"
#include "hypaf/surface_io.hpp"

#ifndef HYPAF_VERSION
#define HYPAF_VERSION "0.0.0"
#endif

namespace hypaf::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kMonitorFail = 1, kInvalidInput = 2, kBreakdown = 3 };

// ---------------------------------------------------------------- JSON output

namespace detail {

inline void emit(std::string& out, const json& j, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + json(it.key()).dump() + ": ";
            emit(out, it.value(), indent, depth + 1);
        }
        out += "\n" + close + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // numeric arrays stay on one line
        const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number(); });
        out += flat ? "[" : "[\n";
        bool first = true;
        for (const auto& e : j) {
            if (!first) out += flat ? ", " : ",\n";
            first = false;
            if (!flat) out += pad;
            emit(out, e, indent, depth + 1);
        }
        out += flat ? "]" : "\n" + close + "]";
        return;
    }
    case json::value_t::number_float: {
        const double x = j.get<double>();
        out += std::isfinite(x) ? io::format_double(x) : "null";
        return;
    }
    default: out += j.dump();
    }
}

} // namespace detail

/// JSON with every float printed as %.17g (NaN and infinities as null).
[[nodiscard]] inline std::string format_json(const json& j)
{
    std::string out;
    detail::emit(out, j, 2, 0);
    out += '\n';
    return out;
}

[[nodiscard]] inline std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

[[nodiscard]] inline std::string sha256_file(const fs::path& path) { return sha256_hex(io::read_text(path)); }

// ---------------------------------------------------------------- JSON pieces

[[nodiscard]] inline json to_json(const geom::InequalityReport& r)
{
    return {{"name", r.name}, {"lhs", r.lhs},           {"rhs", r.rhs},
            {"gap", r.gap},   {"equality", r.equality}, {"warnings", r.warnings}};
}

[[nodiscard]] inline json to_json(const sym::KappaVector& k)
{
    if (k.size() == 0) return json::array();
    return json(std::vector<double>(k.values().begin(), k.values().end()));
}

[[nodiscard]] inline json to_json(const sym::ScanSummary& s)
{
    return {{"cone", std::string(sym::to_string(s.cone.kind))},
            {"m", s.m},
            {"count", s.count},
            {"extent", s.cone.extent},
            {"violations", s.violations},
            {"positive", s.positive},
            {"negative", s.negative},
            {"sign_change", s.sign_change()},
            {"max_gap", s.max_gap},
            {"max_gap_witness", to_json(s.argmax)},
            {"min_gap", s.min_gap},
            {"min_gap_witness", to_json(s.argmin)},
            {"equality_case_one", s.case_one},
            {"equality_case_two", s.case_two},
            {"interior", s.interior},
            {"planted", s.planted},
            {"planted_flagged", s.planted_flagged},
            {"equality_mismatch", s.equality_mismatch},
            {"interior_near_zero", s.interior_near_zero},
            {"max_near_zero_distance", s.max_near_zero_distance},
            {"outside_cone", s.reports_outside_cone}};
}

struct Outcome {
    int code = kOk;
    json report;
};

// ---------------------------------------------------------------- symcheck

struct SymcheckOptions {
    int m = 6;
    long long count = 100000;
    std::uint64_t seed = 7;
    std::vector<std::string> cones{"horoconvex", "pairwise"};
    double extent = 9.0;
    int garding_k = 2;
    long long identity_samples = 10000;
    double violation_tol = 1e-12;
    double equality_tol = sym::kDefaultEqualityTol;
    double identity_tol = 1e-12;

    [[nodiscard]] json to_json() const
    {
        return {{"m", m},
                {"count", count},
                {"seed", seed},
                {"cones", cones},
                {"extent", extent},
                {"garding_k", garding_k},
                {"identity_samples", identity_samples},
                {"violation_tol", violation_tol},
                {"equality_tol", equality_tol},
                {"identity_tol", identity_tol}};
    }
};

/// Max relative residual of each cyclic identity over seeded unrestricted
/// real samples (standard normal entries, scaled by a log-uniform factor).
[[nodiscard]] inline json identity_battery(long long samples, std::uint64_t seed, double tol, bool& ok)
{
    json out = json::object();
    for (auto tag : sym::kAllIdentities) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(tag), 0x1d3u};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> expo(-1.0, 1.0);
        double worst = 0.0;
        for (long long i = 0; i < samples; ++i) {
            const double scale = std::pow(10.0, expo(rng));
            std::vector<double> x(static_cast<std::size_t>(sym::identity_dimension(tag)));
            for (double& v : x) v = scale * normal(rng);
            worst = std::max(worst, sym::evaluate_identity(tag, sym::KappaVector(std::move(x))).relative());
        }
        out[std::string(sym::to_string(tag))] = {{"samples", samples}, {"max_relative_residual", worst}};
        if (!(worst < tol)) ok = false;
    }
    return out;
}

[[nodiscard]] inline Outcome symcheck(const SymcheckOptions& o)
{
    if (o.m < 5) throw PreconditionError("symcheck: refined_gap needs m >= 5 (got m = " + std::to_string(o.m) + ")");
    if (o.m > sym::kMaxEntries) throw DomainError("symcheck: m too large");
    if (o.count < 1) throw DomainError("symcheck: count must be >= 1");
    if (o.cones.empty()) throw DomainError("symcheck: no cone selected");
    sym::ScanOptions options;
    options.violation_tol = o.violation_tol;
    options.equality_tol = o.equality_tol;

    Outcome out;
    out.report["command"] = "symcheck";
    out.report["config"] = o.to_json();
    json scans = json::array();
    bool ok = true;
    for (const auto& name : o.cones) {
        const auto kind = sym::parse_cone(name);
        if (!kind) throw ParseError("symcheck: unknown cone '" + name + "' (horoconvex, pairwise, garding, unitbox)");
        sym::ConeSpec cone{*kind, o.garding_k, o.extent};
        const auto summary = sym::scan_cone(cone, o.m, o.count, o.seed, options);
        auto j = to_json(summary);
        bool pass = true;
        if (*kind == sym::ConeKind::Horoconvex || *kind == sym::ConeKind::PairwiseProduct) pass = summary.violations == 0;
        if (*kind == sym::ConeKind::UnitBox) pass = summary.sign_change();
        j["pass"] = pass;
        ok = ok && pass;
        scans.push_back(std::move(j));
    }
    out.report["scans"] = std::move(scans);
    if (o.identity_samples > 0) out.report["identities"] = identity_battery(o.identity_samples, o.seed, o.identity_tol, ok);
    out.report["pass"] = ok;
    out.code = ok ? kOk : kMonitorFail;
    return out;
}

// ---------------------------------------------------------------- sphere

[[nodiscard]] inline Outcome sphere(int n, double radius)
{
    const auto s = geom::geodesic_sphere(n, radius);
    Outcome out;
    out.report["command"] = "sphere";
    out.report["config"] = {{"n", n}, {"r", radius}};
    out.report["n"] = s.n;
    out.report["radius"] = s.radius;
    out.report["kappa"] = s.kappa;
    out.report["area"] = s.area;
    out.report["int_sigma"] = s.int_sigma;
    out.report["int_l2"] = s.int_l2;
    out.report["Q"] = s.Q;
    out.report["q_bound"] = s.q_bound;
    out.report["horoconvexity_margin"] = s.horoconvexity_margin;
    json reports = json::object();
    bool ok = true;
    for (const auto& r : s.reports) {
        auto j = to_json(r);
        // the integral-geometry bounds are strict; every other one is attained by spheres
        const bool sharp = r.name.rfind("gallego_solanes", 0) != 0;
        j["sharp"] = sharp;
        ok = ok && (sharp ? r.equality : r.gap > 0.0);
        reports[r.name] = std::move(j);
    }
    out.report["reports"] = std::move(reports);
    out.report["pass"] = ok;
    out.code = ok ? kOk : kMonitorFail;
    return out;
}

// ---------------------------------------------------------------- afcheck

[[nodiscard]] inline Outcome afcheck(const geom::AxisymmetricHypersurface& s, double tol = 1e-8)
{
    const auto g = geom::analyze(s);
    std::vector<geom::InequalityReport> reports;
    for (int k = 1; k <= 4; ++k) reports.push_back(geom::check_gallego_solanes(g, k));
    const auto [bhw, dlg] = geom::check_weighted_minkowski(g);
    reports.push_back(bhw);
    reports.push_back(dlg);
    reports.push_back(geom::check_af2_sigma2(g));
    reports.push_back(geom::check_af4(g));
    reports.push_back(geom::make_report("q_bound", geom::functional_Q(g), geom::q_bound(s.n())));

    const double margin = g.horoconvexity_margin();
    Outcome out;
    out.report["command"] = "afcheck";
    out.report["n"] = s.n();
    out.report["intervals"] = s.intervals();
    out.report["quadrature"] = grid::kQuadratureName;
    out.report["area"] = g.area();
    out.report["int_l2"] = g.integrate_l2();
    out.report["Q"] = geom::functional_Q(g);
    out.report["horoconvexity_margin"] = margin;
    out.report["horoconvex"] = margin > 0.0;
    json js = json::object();
    bool ok = true;
    for (const auto& r : reports) {
        js[r.name] = to_json(r);
        // a negative gap only contradicts the inequalities on horoconvex input
        if (margin > 0.0 && r.gap < -tol * std::abs(r.rhs)) ok = false;
    }
    out.report["reports"] = std::move(js);
    out.report["pass"] = ok;
    out.code = ok ? kOk : kMonitorFail;
    return out;
}

// ---------------------------------------------------------------- sobolev

struct SobolevOptions {
    int m = 5;
    int count = 100;
    std::uint64_t seed = 11;
    std::vector<int> orders{2};
    double amplitude = 0.3;  ///< |a|, |b| bound for w = exp(a cos t + b cos 2t)
    int intervals = 200;
    double gap_tol = 1e-8;

    [[nodiscard]] json to_json() const
    {
        return {{"m", m},         {"count", count},         {"seed", seed},       {"k", orders},
                {"amplitude", amplitude}, {"intervals", intervals}, {"gap_tol", gap_tol}};
    }
};

[[nodiscard]] inline json to_json(const conf::SobolevReport& r)
{
    return {{"k", r.k},
            {"value", r.value},
            {"reference", r.reference},
            {"gap", r.gap},
            {"positivity", r.positivity},
            {"positivity_label", r.positivity_label},
            {"advisory", r.advisory}};
}

[[nodiscard]] inline Outcome sobolev_single(const conf::ConformalFactor& cf, const std::vector<int>& orders, double tol)
{
    Outcome out;
    out.report["command"] = "sobolev";
    out.report["m"] = cf.m();
    out.report["intervals"] = cf.intervals();
    json reports = json::array();
    bool ok = true;
    for (int k : orders) {
        const auto r = conf::sobolev_gap(cf, k);
        if (!r.advisory && r.gap < -tol) ok = false;
        reports.push_back(to_json(r));
    }
    out.report["reports"] = std::move(reports);
    out.report["pass"] = ok;
    out.code = ok ? kOk : kMonitorFail;
    return out;
}

[[nodiscard]] inline Outcome sobolev_battery(const SobolevOptions& o)
{
    if (o.m < 3) throw DomainError("sobolev: m must be >= 3");
    if (o.count < 1) throw DomainError("sobolev: count must be >= 1");
    for (int k : o.orders)
        if (k < 1 || k > o.m) throw DomainError("sobolev: k must lie in [1, m]");
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(-o.amplitude, o.amplitude);
    Outcome out;
    out.report["command"] = "sobolev";
    out.report["config"] = o.to_json();
    json samples = json::array();
    bool ok = true;
    long long checked = 0, advisory = 0;
    double min_gap = INFINITY;
    for (int i = 0; i < o.count; ++i) {
        const double a = u(rng), b = u(rng);
        const auto cf = conf::ConformalFactor::sample(
            o.m, o.intervals, [=](double t) { return std::exp(a * std::cos(t) + b * std::cos(2 * t)); });
        json entry = {{"a", a}, {"b", b}};
        json reports = json::array();
        for (int k : o.orders) {
            const auto r = conf::sobolev_gap(cf, k);
            if (r.advisory) {
                ++advisory;
            } else {
                ++checked;
                min_gap = std::min(min_gap, r.gap);
                if (r.gap < -o.gap_tol) ok = false;
            }
            reports.push_back(to_json(r));
        }
        entry["reports"] = std::move(reports);
        samples.push_back(std::move(entry));
    }
    // round metric and scale invariance as built-in controls
    const auto round = conf::ConformalFactor::round(o.m, o.intervals);
    json controls = json::array();
    for (int k : o.orders) {
        const auto r = conf::sobolev_gap(round, k);
        double scale_dev = 0.0;
        for (double c : {0.5, 2.0, 10.0})
            scale_dev = std::max(scale_dev, std::abs(conf::functional_F(round.scaled(c), k) - r.value) / std::abs(r.value));
        controls.push_back({{"k", k}, {"round_gap", r.gap}, {"scale_deviation", scale_dev}});
        if (!(std::abs(r.gap) < 1e-10 * std::max(1.0, r.reference)) || !(scale_dev < 1e-10)) ok = false;
    }
    out.report["checked"] = checked;
    out.report["advisory"] = advisory;
    out.report["min_gap"] = min_gap;
    out.report["controls"] = std::move(controls);
    out.report["samples"] = std::move(samples);
    out.report["pass"] = ok;
    out.code = ok ? kOk : kMonitorFail;
    return out;
}

// ---------------------------------------------------------------- flow

struct FlowJob {
    flow::FlowConfig config;
    std::optional<std::string> surface_file;
    double decay_t0 = 3.0;
    double decay_t1 = 8.0;
    double ratio_t0 = 2.0;
    double ratio_noise = 1e-3;
    double bound_slack = 1e-3;

    [[nodiscard]] json to_json() const
    {
        const auto& c = config;
        json j = {{"n", c.n},
                  {"intervals", c.intervals},
                  {"r0", c.r0},
                  {"eps", c.eps},
                  {"mode", c.mode},
                  {"surface", surface_file ? json(*surface_file) : json(nullptr)},
                  {"dt_safety", c.dt_safety},
                  {"dt_max", c.dt_max},
                  {"fixed_dt", c.fixed_dt},
                  {"t_max", c.t_max},
                  {"monitor_dt", c.monitor_dt},
                  {"horo_tolerance", c.horo_tolerance},
                  {"equality_tol", c.equality_tol},
                  {"q_slack", c.q_slack},
                  {"decay_t0", decay_t0},
                  {"decay_t1", decay_t1},
                  {"ratio_t0", ratio_t0},
                  {"ratio_noise", ratio_noise},
                  {"bound_slack", bound_slack},
                  {"quadrature", grid::kQuadratureName},
                  {"stencil", "4th-order central, even reflection at the poles"},
                  {"integrator", "rk4"}};
        return j;
    }
};

namespace detail {

template <typename T>
T take(const json& j, const std::string& key)
{
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ParseError("flow config: bad value for '" + key + "'");
    }
}

} // namespace detail

/// Flat JSON object; unknown keys are an error so typos do not silently
/// fall back to defaults.
[[nodiscard]] inline FlowJob parse_flow_job(const json& j)
{
    if (!j.is_object()) throw ParseError("flow config: expected a JSON object");
    FlowJob job;
    auto& c = job.config;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        if (k == "n") c.n = detail::take<int>(v, k);
        else if (k == "intervals") c.intervals = detail::take<int>(v, k);
        else if (k == "r0") c.r0 = detail::take<double>(v, k);
        else if (k == "eps") c.eps = detail::take<double>(v, k);
        else if (k == "mode") c.mode = detail::take<int>(v, k);
        else if (k == "surface") {
            if (!v.is_null()) job.surface_file = detail::take<std::string>(v, k);
        } else if (k == "dt_safety") c.dt_safety = detail::take<double>(v, k);
        else if (k == "dt_max") c.dt_max = detail::take<double>(v, k);
        else if (k == "fixed_dt") c.fixed_dt = detail::take<double>(v, k);
        else if (k == "t_max") c.t_max = detail::take<double>(v, k);
        else if (k == "monitor_dt") c.monitor_dt = detail::take<double>(v, k);
        else if (k == "horo_tolerance") c.horo_tolerance = detail::take<double>(v, k);
        else if (k == "equality_tol") c.equality_tol = detail::take<double>(v, k);
        else if (k == "q_slack") c.q_slack = detail::take<double>(v, k);
        else if (k == "decay_t0") job.decay_t0 = detail::take<double>(v, k);
        else if (k == "decay_t1") job.decay_t1 = detail::take<double>(v, k);
        else if (k == "ratio_t0") job.ratio_t0 = detail::take<double>(v, k);
        else if (k == "ratio_noise") job.ratio_noise = detail::take<double>(v, k);
        else if (k == "bound_slack") job.bound_slack = detail::take<double>(v, k);
        else if (k == "quadrature" || k == "stencil" || k == "integrator") {
            // echoed by to_json; accepted back only with the fixed values
            if (v != job.to_json()[k]) throw ParseError("flow config: '" + k + "' cannot be changed");
        } else {
            throw ParseError("flow config: unknown key '" + k + "'");
        }
    }
    c.validate();
    return job;
}

[[nodiscard]] inline FlowJob read_flow_job(const fs::path& path)
{
    json j;
    try {
        j = json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        throw ParseError("flow config " + path.string() + ": " + e.what());
    }
    return parse_flow_job(j);
}

struct FlowOutcome {
    int code = kOk;
    json verdict;
    std::string csv;                                       ///< empty on breakdown before the first row
    std::optional<geom::AxisymmetricHypersurface> last_good;
    double last_good_t = 0.0;
};

/// Monitors on a finished (or partial) trace.
[[nodiscard]] inline json flow_verdicts(const FlowJob& job, const flow::FlowTrace& trace,
                                        const std::vector<conf::AsymptoticRatios>& ratios, bool& ok)
{
    const int n = trace.n;
    const auto& rows = trace.rows;
    json v = json::object();

    const auto mono = flow::q_monotone(trace, job.config.q_slack);
    v["q_monotone"] = {{"pass", mono.ok},
                       {"slack", job.config.q_slack},
                       {"worst_relative_increase", mono.worst_relative_increase},
                       {"worst_row_t", rows.empty() ? 0.0 : rows[mono.worst_row].t}};
    ok = ok && mono.ok;

    double min_area_gap = INFINITY, min_margin = INFINITY;
    bool deficit_decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        min_area_gap = std::min(min_area_gap, rows[i].area_growth_gap);
        min_margin = std::min(min_margin, rows[i].horo_margin);
        if (i > 0 && rows[i].t >= 1.0 && !(rows[i].umbilic_deficit < rows[i - 1].umbilic_deficit))
            deficit_decreasing = false;
    }
    const bool area_ok = min_area_gap >= -1e-8;
    const bool margin_ok = min_margin > 0.0;
    v["area_growth"] = {{"pass", area_ok}, {"min_gap", min_area_gap}};
    v["horoconvexity"] = {{"pass", margin_ok}, {"min_margin", min_margin}};
    v["umbilicity_decreasing_after_t1"] = {{"pass", deficit_decreasing}};
    ok = ok && area_ok && margin_ok && deficit_decreasing;

    const auto bound = flow::limit_bound_check(trace, job.config.equality_tol);
    const bool bound_ok = bound.min_report.lhs >= bound.min_report.rhs * (1.0 - job.bound_slack);
    v["q_bound"] = {{"pass", bound_ok},
                    {"bound", bound.min_report.rhs},
                    {"q_initial", rows.front().Q},
                    {"min", to_json(bound.min_report)},
                    {"final", to_json(bound.final_report)},
                    {"final_relative_excess", bound.final_report.gap / bound.final_report.rhs}};
    ok = ok && bound_ok;

    // The estimate is an upper bound e^{-t/(n-1)}; faster decay satisfies it.
    const auto fit = flow::fit_decay(trace, job.decay_t0, job.decay_t1);
    const double rate = -1.0 / (n - 1);
    const bool have_fit = fit.points >= 2;
    const bool decay_ok = !have_fit || fit.exponent <= 0.9 * rate;
    v["umbilicity_decay"] = {{"pass", decay_ok},
                             {"window", {job.decay_t0, job.decay_t1}},
                             {"points", fit.points},
                             {"exponent", fit.exponent},
                             {"bound_exponent", rate},
                             {"within_10_percent_of_bound_exponent",
                              have_fit && std::abs(fit.exponent - rate) <= 0.1 * std::abs(rate)}};
    ok = ok && decay_ok;

    if (!ratios.empty()) {
        bool improving = true;
        for (std::size_t i = 1; i < ratios.size(); ++i) {
            if (ratios[i].t < job.ratio_t0) continue;
            const auto& a = ratios[i - 1];
            const auto& b = ratios[i];
            if (std::abs(b.R1 - 1) > std::abs(a.R1 - 1) + job.ratio_noise) improving = false;
            if (std::abs(b.R2 - 1) > std::abs(a.R2 - 1) + job.ratio_noise) improving = false;
        }
        json series = json::array();
        for (const auto& r : ratios) series.push_back({r.t, r.R1, r.R2});
        v["asymptotic_ratios"] = {{"pass", improving},
                                  {"from_t", job.ratio_t0},
                                  {"noise", job.ratio_noise},
                                  {"final_R1", ratios.back().R1},
                                  {"final_R2", ratios.back().R2},
                                  {"series_t_R1_R2", std::move(series)}};
        ok = ok && improving;
    }

    if (n == 5) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& r : rows) {
            lo = std::min(lo, r.int_l2);
            hi = std::max(hi, r.int_l2);
        }
        const double expected = 8.0 * std::numbers::pi * std::numbers::pi / 3.0;
        const double drift = (hi - lo) / std::abs(rows.front().int_l2);
        const bool gb_ok = drift <= 1e-3 && std::abs(rows.front().int_l2 - expected) <= 1e-3 * expected;
        v["gauss_bonnet"] = {{"pass", gb_ok}, {"relative_drift", drift}, {"expected", expected}, {"initial", rows.front().int_l2}};
        ok = ok && gb_ok;
    }

    if (rows.size() >= 3) {
        double k2 = 0.0, l2 = 0.0;
        for (const auto& r : rows) {
            k2 = std::max(k2, std::abs(r.resid_var_k2));
            l2 = std::max(l2, std::abs(r.resid_l2));
        }
        v["residuals"] = {{"max_abs_resid_var_k2", k2}, {"max_abs_resid_l2", l2}};
    }
    return v;
}

[[nodiscard]] inline FlowOutcome run_flow(const FlowJob& job)
{
    auto initial = job.surface_file ? io::read_surface(*job.surface_file) : job.config.initial_surface();
    FlowJob resolved = job;
    resolved.config.n = initial.n();
    resolved.config.intervals = initial.intervals();

    std::vector<conf::AsymptoticRatios> ratios;
    auto observe = [&](const flow::FlowState& s, const flow::TraceRow&) { ratios.push_back(conf::asymptotic_compare(s)); };
    FlowOutcome out;
    flow::FlowTrace partial;
    try {
        const auto res = flow::run(resolved.config, initial, observe, &partial);
        bool ok = true;
        out.verdict["command"] = "flow";
        out.verdict["config"] = resolved.to_json();
        out.verdict["rows"] = res.trace.rows.size();
        out.verdict["steps"] = res.trace.rows.back().steps;
        out.verdict["final_t"] = res.final_state.t;
        out.verdict["monitors"] = flow_verdicts(resolved, res.trace, ratios, ok);
        out.verdict["pass"] = ok;
        out.csv = flow::format_trace_csv(res.trace);
        out.code = ok ? kOk : kMonitorFail;
    } catch (const flow::FlowBreakdown& e) {
        out.code = kBreakdown;
        out.verdict["command"] = "flow";
        out.verdict["config"] = resolved.to_json();
        out.verdict["breakdown"] = e.what();
        out.verdict["last_good_t"] = e.last_good().t;
        out.verdict["rows_before_breakdown"] = partial.rows.size();
        out.verdict["pass"] = false;
        out.last_good = e.last_good().surface;
        out.last_good_t = e.last_good().t;
        if (!partial.rows.empty()) out.csv = flow::format_trace_csv(partial);
    }
    return out;
}

// ---------------------------------------------------------------- artifacts

struct Artifacts {
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
};

/// `<base>.manifest.json` with the resolved config and digests of every
/// input and output. Wall time is the only field that varies between
/// identical runs.
inline fs::path write_manifest(const fs::path& base, const std::string& command, const json& config,
                               std::uint64_t seed, const Artifacts& files, double wall_seconds)
{
    json digests_in = json::array(), digests_out = json::array();
    for (const auto& p : files.inputs) digests_in.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    for (const auto& p : files.outputs) digests_out.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    json m = {{"command", command},
              {"tool_version", HYPAF_VERSION},
              {"seed", seed},
              {"config", config},
              {"inputs", std::move(digests_in)},
              {"outputs", std::move(digests_out)},
              {"wall_time_s", wall_seconds}};
    fs::path path = base;
    path += ".manifest.json";
    io::write_text_atomic(path, format_json(m));
    return path;
}

/// "run.json" -> "run"; prefixes without extension are kept.
[[nodiscard]] inline fs::path artifact_base(const fs::path& out)
{
    fs::path base = out;
    if (base.extension() == ".json") base.replace_extension();
    return base;
}

// ---------------------------------------------------------------- main

namespace detail {

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = std::min(s.find(',', start), s.size());
        if (end > start) out.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

/// Writes the report (file or stdout) and, for file output, the manifest.
inline int finish(const Outcome& o, const std::optional<fs::path>& out, const std::string& command,
                  const json& config, std::uint64_t seed, Artifacts files,
                  std::chrono::steady_clock::time_point start)
{
    const std::string text = format_json(o.report);
    if (!out) {
        std::cout << text;
        return o.code;
    }
    io::write_text_atomic(*out, text);
    files.outputs.push_back(*out);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(artifact_base(*out), command, config, seed, files, wall);
    return o.code;
}

} // namespace detail

/// Entry point of the tool; returns the process exit code.
inline int main(int argc, char** argv)
{
    CLI::App app{"hypaf: curvature inequalities and inverse curvature flow of horoconvex hypersurfaces"};
    app.set_version_flag("--version", std::string(HYPAF_VERSION));
    app.require_subcommand(1);

    SymcheckOptions sym_opts;
    std::string cone_list = "horoconvex,pairwise";
    std::optional<std::string> sym_out;
    auto* sc = app.add_subcommand("symcheck", "Scan cones for violations of the refined inequality and check identities");
    sc->add_option("--m", sym_opts.m, "number of curvatures")->capture_default_str();
    sc->add_option("--count", sym_opts.count, "samples per cone")->capture_default_str();
    sc->add_option("--seed", sym_opts.seed, "RNG seed")->capture_default_str();
    sc->add_option("--cone", cone_list, "comma list of horoconvex, pairwise, garding, unitbox")->capture_default_str();
    sc->add_option("--extent", sym_opts.extent, "sampling extent K")->capture_default_str();
    sc->add_option("--garding-k", sym_opts.garding_k, "order of the Garding cone")->capture_default_str();
    sc->add_option("--identities", sym_opts.identity_samples, "samples per cyclic identity (0 = skip)")->capture_default_str();
    sc->add_option("--violation-tol", sym_opts.violation_tol)->capture_default_str();
    sc->add_option("--equality-tol", sym_opts.equality_tol)->capture_default_str();
    sc->add_option("--out", sym_out, "JSON summary path (default stdout)");

    int sphere_n = 6;
    double sphere_r = 1.0;
    std::optional<std::string> sphere_out;
    auto* sp = app.add_subcommand("sphere", "Closed-form report for a geodesic sphere");
    sp->add_option("--n", sphere_n, "ambient dimension")->capture_default_str();
    sp->add_option("--r", sphere_r, "radius")->capture_default_str();
    sp->add_option("--out", sphere_out, "JSON report path (default stdout)");

    std::optional<std::string> flow_config;
    std::string flow_out = "flow_run";
    auto* fl = app.add_subcommand("flow", "Run the inverse curvature flow with monitors");
    fl->add_option("--config", flow_config, "flat JSON config (defaults when omitted)");
    fl->add_option("--out", flow_out, "output prefix: <out>.csv, <out>.config.json, <out>.verdict.json")
        ->capture_default_str();

    std::string af_surface;
    std::optional<std::string> af_out;
    auto* af = app.add_subcommand("afcheck", "Evaluate the quermassintegral inequalities on a surface file");
    af->add_option("--surface", af_surface, "surface file (header `n N`, rows `theta r`)")->required();
    af->add_option("--out", af_out, "JSON report path (default stdout)");

    SobolevOptions sob_opts;
    std::string sob_orders = "2";
    std::optional<std::string> sob_factor, sob_out;
    auto* so = app.add_subcommand("sobolev", "Sobolev-type bound for sigma_k of conformal metrics");
    so->add_option("--m", sob_opts.m, "sphere dimension")->capture_default_str();
    so->add_option("--count", sob_opts.count, "number of seeded factors")->capture_default_str();
    so->add_option("--seed", sob_opts.seed)->capture_default_str();
    so->add_option("--k", sob_orders, "comma list of orders")->capture_default_str();
    so->add_option("--amplitude", sob_opts.amplitude)->capture_default_str();
    so->add_option("--intervals", sob_opts.intervals)->capture_default_str();
    so->add_option("--factor", sob_factor, "evaluate one conformal factor file (header `m N`, rows `theta w`)");
    so->add_option("--out", sob_out, "JSON report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalidInput;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        if (*sc) {
            sym_opts.cones = detail::split_list(cone_list);
            const auto o = symcheck(sym_opts);
            return detail::finish(o, sym_out, "symcheck", sym_opts.to_json(), sym_opts.seed, {}, start);
        }
        if (*sp) {
            const auto o = sphere(sphere_n, sphere_r);
            return detail::finish(o, sphere_out, "sphere", o.report["config"], 0, {}, start);
        }
        if (*af) {
            const auto o = afcheck(io::read_surface(af_surface));
            return detail::finish(o, af_out, "afcheck", {{"surface", af_surface}}, 0, {{fs::path(af_surface)}, {}}, start);
        }
        if (*so) {
            sob_opts.orders.clear();
            for (const auto& s : detail::split_list(sob_orders)) {
                try {
                    sob_opts.orders.push_back(std::stoi(s));
                } catch (const std::exception&) {
                    throw ParseError("sobolev: bad order '" + s + "'");
                }
            }
            if (sob_factor) {
                const auto o = sobolev_single(conf::read_conformal(*sob_factor), sob_opts.orders, sob_opts.gap_tol);
                json cfg = {{"factor", *sob_factor}, {"k", sob_opts.orders}, {"gap_tol", sob_opts.gap_tol}};
                return detail::finish(o, sob_out, "sobolev", cfg, 0, {{fs::path(*sob_factor)}, {}}, start);
            }
            const auto o = sobolev_battery(sob_opts);
            return detail::finish(o, sob_out, "sobolev", sob_opts.to_json(), sob_opts.seed, {}, start);
        }
        if (*fl) {
            const FlowJob job = flow_config ? read_flow_job(*flow_config) : FlowJob{};
            Artifacts files;
            if (flow_config) files.inputs.emplace_back(*flow_config);
            if (job.surface_file) files.inputs.emplace_back(*job.surface_file);
            const auto o = run_flow(job);
            const fs::path base = flow_out;
            auto with = [&](const char* suffix) {
                fs::path p = base;
                p += suffix;
                return p;
            };
            io::write_text_atomic(with(".config.json"), format_json(o.verdict["config"]));
            files.outputs.push_back(with(".config.json"));
            if (!o.csv.empty()) {
                io::write_text_atomic(with(".csv"), o.csv);
                files.outputs.push_back(with(".csv"));
            }
            io::write_text_atomic(with(".verdict.json"), format_json(o.verdict));
            files.outputs.push_back(with(".verdict.json"));
            if (o.last_good) {
                io::write_surface(with(".last_good.txt"), *o.last_good);
                files.outputs.push_back(with(".last_good.txt"));
                std::cerr << "hypaf flow: " << o.verdict["breakdown"].get<std::string>() << "\n"
                          << "last good state (t = " << o.last_good_t << ") written to " << with(".last_good.txt").string()
                          << "\n";
            }
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            write_manifest(base, "flow", o.verdict["config"], 0, files, wall);
            if (o.code == kMonitorFail) std::cerr << "hypaf flow: a monitor failed, see " << with(".verdict.json").string() << "\n";
            return o.code;
        }
    } catch (const ParseError& e) {
        std::cerr << "hypaf: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const DomainError& e) {
        std::cerr << "hypaf: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const PreconditionError& e) {
        std::cerr << "hypaf: precondition failed: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const NumericError& e) {
        std::cerr << "hypaf: numerical breakdown: " << e.what() << "\n";
        return kBreakdown;
    } catch (const std::exception& e) {
        std::cerr << "hypaf: " << e.what() << "\n";
        return kInvalidInput;
    }
    return kInvalidInput;
}

} // namespace hypaf::cli
