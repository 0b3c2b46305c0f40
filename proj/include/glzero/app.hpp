#pragma once

// Command implementations behind the glzero executable. Each command turns a
// parsed configuration into JSON payloads and CSV tables; the executable only
// parses arguments and writes files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "glzero/asym.hpp"
#include "glzero/cell.hpp"
#include "glzero/domain.hpp"
#include "glzero/energy1d.hpp"
#include "glzero/error.hpp"
#include "glzero/io.hpp"
#include "glzero/montgomery.hpp"
#include "glzero/parallel.hpp"
#include "glzero/rng.hpp"
#include "glzero/strip.hpp"
#include "glzero/svg.hpp"

namespace glzero::app {

using io::json;
using io::num;

/// Comma-separated numbers; an empty list is a validation error.
inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto a = cell.find_first_not_of(' ');
        if (a == std::string::npos) continue;
        cell = cell.substr(a, cell.find_last_not_of(' ') - a + 1);
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end != cell.c_str() + cell.size() || !std::isfinite(v)) throw ValidationError(what + ": not a number: '" + cell + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(what + ": empty list");
    return out;
}

/// Exactly two numbers a,b with a <= b.
inline std::pair<double, double> parse_range(const std::string& text, const std::string& what) {
    const auto v = parse_list(text, what);
    require(v.size() == 2 && v[0] <= v[1], what + ": expected a,b with a <= b");
    return {v[0], v[1]};
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n, const std::string& what) {
    require(n >= 1, what + ": samples must be >= 1");
    std::vector<double> v;
    for (std::size_t k = 0; k < n; ++k)
        v.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1));
    return v;
}

inline json to_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// montgomery -------------------------------------------------------------------

inline io::Csv montgomery_curve(double lo, double hi, std::size_t samples, const montgomery::Grid1D& grid) {
    const auto taus = linspace(lo, hi, samples, "montgomery");
    const auto pts = parallel_map(taus.size(), [&](std::size_t k) { return montgomery::lambda_extrapolated(taus[k], grid); });
    io::Csv t;
    t.header = {"tau", "lambda", "err"};
    for (std::size_t k = 0; k < taus.size(); ++k) t.add({num(taus[k]), num(pts[k].value), num(pts[k].err)});
    return t;
}

inline json montgomery_min(double tol, const montgomery::Grid1D& grid) {
    const auto m = montgomery::minimize_lambda(grid, tol);
    return {{"tau0", m.tau0}, {"lambda0", m.lambda0}, {"err", m.err}, {"grid", {{"T", grid.T()}, {"n", grid.n()}}}};
}

// e1d --------------------------------------------------------------------------

struct E1dSetup {
    montgomery::Grid1D grid{8.0, 801};
    double alpha_tol = 0.0;  ///< 0 = grid spacing
};

inline montgomery::MontgomeryMinimum e1d_montgomery(const montgomery::Grid1D& g) {
    montgomery::MinimizeOptions o;
    o.extrapolate = false;
    return montgomery::minimize_lambda(g, 1e-9, o);
}

inline json e1d_point(double b, const E1dSetup& s, const montgomery::MontgomeryMinimum& mm) {
    energy1d::AlphaOptions o;
    o.alpha_tol = s.alpha_tol;
    const auto a = energy1d::minimize_over_alpha(b, mm, s.grid, o);
    json j = {{"b", b},     {"alpha0", a.alpha0}, {"e1d", a.e1d}, {"fh_residual", a.fh_residual},
              {"z1", a.z1}, {"z2", a.z2},         {"trivial", !a.valid}};
    if (a.flat_warning) j["warning"] = "energy flat in alpha over the scan";
    return j;
}

inline io::Csv e1d_table(const std::vector<double>& bs, const E1dSetup& s) {
    const auto mm = e1d_montgomery(s.grid);
    const auto rows = parallel_map(bs.size(), [&](std::size_t k) { return e1d_point(bs[k], s, mm); });
    io::Csv t;
    t.header = {"b", "alpha0", "e1d", "fh_residual", "z1", "z2"};
    for (const json& r : rows)
        t.add({num(r["b"].get<double>()), num(r["alpha0"].get<double>()), num(r["e1d"].get<double>()),
               num(r["fh_residual"].get<double>()), num(r["z1"].get<double>()), num(r["z2"].get<double>())});
    return t;
}

// strip ------------------------------------------------------------------------

struct StripSetup {
    std::vector<double> R_list{4.0, 8.0, 16.0};
    strip::StripOptions opt;
    double h = 0.1;
};

inline json to_json(const strip::ECurvePoint& p) {
    return {{"L", p.L},
            {"E", p.E},
            {"err", p.err},
            {"fit_c", p.fit_c},
            {"E_inverse_R", p.E_inverse_R},
            {"R_list", to_json(p.R_list)},
            {"e_over_2R", to_json(p.e_over_2R)}};
}

/// E(L) estimate; the minimizer at the largest R is returned through `last`.
inline json strip_point(double L, const StripSetup& s, strip::StripMinimizer* last = nullptr) {
    require(s.R_list.size() >= 3, "strip: need at least 3 R values");
    auto ms = strip::ladder(L, s.R_list, s.opt, s.h);
    std::vector<double> e;
    for (const auto& m : ms) e.push_back(m.energy);
    const auto p = strip::fit_E(L, s.R_list, e, s.opt.tol);
    json j = to_json(p);
    const auto d = strip::decay_report(ms.back());
    j["decay"] = {{"cut", d.cut}, {"gradient_tail", d.gradient_tail}, {"mass_tail", d.mass_tail},
                  {"gradient_ratio", d.gradient_ratio}, {"mass_ratio", d.mass_ratio}};
    j["sup_u"] = ms.back().sup_u;
    j["residual"] = ms.back().residual;
    if (last) *last = std::move(ms.back());
    return j;
}

inline void write_strip_field(const std::string& path, const strip::StripMinimizer& m, std::uint64_t seed) {
    const json h = {{"kind", "strip_field"}, {"nx", m.grid.nx}, {"ny", m.grid.ny}, {"hx", m.grid.hx()}, {"hy", m.grid.hy()},
                    {"L", m.L},             {"R", m.grid.R},   {"M", m.grid.M},   {"energy", m.energy}, {"seed", seed}};
    io::write_field(path, m.u, h);
}

inline const std::vector<std::string>& ecurve_columns() {
    static const std::vector<std::string> c{"L", "E", "err", "fit_c"};
    return c;
}

inline std::vector<strip::ECurvePoint> ecurve_points(const std::vector<double>& Ls, const StripSetup& s) {
    return parallel_map(Ls.size(), [&](std::size_t k) {
        StripSetup sk = s;
        sk.opt.seed = derive_seed(s.opt.seed, k);
        return strip::estimate_E(Ls[k], sk.R_list, sk.opt, sk.h);
    });
}

inline io::Csv ecurve_csv(const std::vector<strip::ECurvePoint>& pts) {
    io::Csv t;
    t.header = ecurve_columns();
    for (const auto& p : pts) t.add({num(p.L), num(p.E), num(p.err), num(p.fit_c)});
    return t;
}

inline json conjecture(double L, const StripSetup& s) {
    const auto c = strip::check_conjecture(L, s.R_list, s.opt, s.h);
    return {{"L", c.L},           {"E_strip", c.E_strip}, {"E_strip_err", c.E_strip_err}, {"E_1d", c.E_1d},
            {"alpha0", c.alpha0}, {"abs_gap", c.abs_gap}, {"rel_gap", c.rel_gap},
            {"window", {c.window_lo, c.window_hi}}};
}

// cell -------------------------------------------------------------------------

inline const std::vector<std::string>& gtable_columns() {
    static const std::vector<std::string> c{"b", "g", "envelope", "r_max"};
    return c;
}

inline cell::GTable gtable_rows(const std::vector<double>& bs, const std::vector<double>& r_list, const cell::CellOptions& opt) {
    return parallel_map(bs.size(), [&](std::size_t k) {
        cell::CellOptions o = opt;
        o.seed = derive_seed(opt.seed, k);
        return cell::estimate_g(bs[k], r_list, o);
    });
}

inline io::Csv gtable_csv(const cell::GTable& rows) {
    io::Csv t;
    t.header = gtable_columns();
    for (const auto& r : rows) t.add({num(r.b), num(r.g_est), num(r.envelope), num(r.r_list.back())});
    return t;
}

inline json to_json(const cell::GRow& r) {
    return {{"b", r.b},           {"g", r.g_est},        {"envelope", r.envelope}, {"r_list", to_json(r.r_list)},
            {"e_D", to_json(r.e_D)}, {"e_N", to_json(r.e_N)}, {"fit_c", r.fit_c}};
}

// domain -----------------------------------------------------------------------

inline domain::Mode parse_mode(const std::string& m) {
    if (m == "fixed") return domain::Mode::Fixed;
    if (m == "full") return domain::Mode::Full;
    throw ValidationError("mode must be fixed or full, got '" + m + "'");
}

inline const char* mode_name(domain::Mode m) { return m == domain::Mode::Full ? "full" : "fixed"; }

inline const std::vector<std::string>& decay_columns() {
    static const std::vector<std::string> c{"t_lo", "t_hi", "mass"};
    return c;
}

inline io::Csv decay_csv(const domain::DecayProfile& d) {
    io::Csv t;
    t.header = decay_columns();
    for (std::size_t k = 0; k < d.mass.size(); ++k)
        t.add({num(static_cast<double>(k) * d.bin_width), num(static_cast<double>(k + 1) * d.bin_width), num(d.mass[k])});
    return t;
}

inline json domain_report(const domain::DomainProblem& p, const domain::GLState& s) {
    const auto reg = asym::regime_classify(p.kappa, p.H);
    const double k3 = p.kappa * p.kappa * p.kappa;
    json j = {{"kappa", p.kappa},
              {"H", p.H},
              {"sigma", p.sigma()},
              {"mode", mode_name(s.mode)},
              {"regime", {{"tag", asym::to_string(reg.tag)}, {"indicator", reg.indicator}, {"b_kappa", reg.b_kappa}}},
              {"grid", {{"nx", p.grid.nx}, {"ny", p.grid.ny}, {"hx", p.grid.hx()}, {"hy", p.grid.hy()}}},
              {"gamma_length", p.gamma_length()},
              {"energy_parts",
               {{"total", s.energy_total},
                {"kinetic", s.parts.kinetic},
                {"linear", s.parts.linear},
                {"quartic", s.parts.quartic},
                {"magnetic", s.parts.magnetic}}},
              {"E_over_2kappa", s.energy_total / (2.0 * p.kappa)},
              {"magnetic_normalized", s.parts.magnetic * p.H / k3},
              {"residuals", {{"psi_eq", s.residuals.psi_eq}, {"A_eq", s.residuals.A_eq}, {"virial", s.residuals.virial}}},
              {"iterations", s.iterations},
              {"outer", s.outer},
              {"collapsed", s.collapsed},
              {"sup_psi", lattice::sup_norm(s.psi)}};
    const double m2 = domain::order_mass2(p, s, domain::everywhere);
    j["mass"] = {{"psi2", m2}, {"psi4", domain::order_mass(p, s, domain::everywhere)}};
    if (!p.gamma.empty()) {
        j["mass"]["fraction_within_4kappa_over_H"] = domain::mass_fraction_within(p, s, 4.0 * p.kappa / p.H);
        if (m2 > 0.0) {
            const auto d = domain::decay_profile(p, s);
            j["decay"] = {{"unit", d.unit},         {"bin_width", d.bin_width}, {"m_hat", d.m_hat},
                          {"fit_bins", d.fit_bins}, {"bandwidth90", d.bandwidth90}};
        }
    }
    return j;
}

// verify -----------------------------------------------------------------------

inline asym::Table read_ecurve(const std::string& path) {
    const io::Csv t = io::read_csv(path);
    io::expect_schema(t, ecurve_columns(), "ecurve " + path);
    return asym::ecurve_table(t.numbers("L"), t.numbers("E"), montgomery::reference_minimum().lambda0);
}

inline asym::Table read_gtable(const std::string& path) {
    const io::Csv t = io::read_csv(path);
    io::expect_schema(t, gtable_columns(), "gtable " + path);
    return asym::gtable_table(t.numbers("b"), t.numbers("g"));
}

inline json to_json(const asym::VerificationReport& v) {
    json j = {{"kappa", v.kappa},
              {"H", v.H},
              {"regime", {{"tag", asym::to_string(v.regime.tag)}, {"indicator", v.regime.indicator},
                          {"b_kappa", v.regime.b_kappa}, {"thresholds", {v.regime.lower, v.regime.upper}}}},
              {"E_computed", v.E_computed},
              {"C0_formula", v.C0_formula},
              {"C0_vanishing", v.C0_vanishing},
              {"C0_bulk", v.C0_bulk},
              {"relative_gap", v.relative_gap},
              {"mass_gap", v.mass_gap},
              {"magnetic_normalized", v.magnetic}};
    if (!v.warning.empty()) j["warning"] = v.warning;
    return j;
}

inline const std::vector<std::string>& verify_columns() {
    static const std::vector<std::string> c{"kappa",        "H",       "regime",  "indicator", "E_computed", "C0_formula",
                                            "C0_vanishing", "C0_bulk", "relative_gap", "mass_gap", "magnetic_normalized"};
    return c;
}

inline io::Csv verify_csv(const std::vector<asym::VerificationReport>& vs) {
    io::Csv t;
    t.header = verify_columns();
    for (const auto& v : vs)
        t.add({num(v.kappa), num(v.H), asym::to_string(v.regime.tag), num(v.regime.indicator), num(v.E_computed),
               num(v.C0_formula), num(v.C0_vanishing), num(v.C0_bulk), num(v.relative_gap), num(v.mass_gap),
               num(v.magnetic)});
    return t;
}

/// Solve the problem family of `spec` at fixed sigma = H/kappa^2 for each
/// kappa and compare with the formulas.
inline std::vector<asym::VerificationReport> verify_sweep(const io::ProblemSpec& spec, const std::vector<double>& kappas,
                                                          domain::Mode mode, const domain::SolveOptions& opt,
                                                          const asym::Table& ecurve, const asym::Table& gtable) {
    const double sigma = spec.H / (spec.kappa * spec.kappa);
    for (double k : kappas) require(k > 0.0, "verify: kappa values must be positive");
    return parallel_map(kappas.size(), [&](std::size_t k) {
        io::ProblemSpec s = spec;
        s.kappa = kappas[k];
        s.H = sigma * kappas[k] * kappas[k];
        s.options.h = 0.0;
        const auto p = s.build();
        domain::SolveOptions o = opt;
        o.seed = derive_seed(opt.seed, k);
        return asym::verify(p, domain::minimize_gl(p, mode, o), ecurve, gtable);
    });
}

inline json trend_json(const std::vector<asym::VerificationReport>& vs) {
    std::vector<double> gaps, mag;
    for (const auto& v : vs) {
        gaps.push_back(v.relative_gap);
        mag.push_back(v.magnetic);
    }
    const auto t = asym::non_increasing(gaps);
    return {{"relative_gap", to_json(gaps)},
            {"non_increasing", t.ok},
            {"rises", t.rises},
            {"worst_rise", t.worst_rise},
            {"magnetic_normalized", to_json(mag)},
            {"magnetic_decreasing", asym::decreasing(mag)}};
}

// sweep ------------------------------------------------------------------------

/// One job of a sweep: grid key values and either result cells or an error.
struct SweepRow {
    std::vector<double> key;
    std::vector<std::string> values;
    std::string status = "ok";
};

struct SweepSpec {
    std::string kind;  ///< e1d | strip | cell | domain
    std::vector<std::string> key_names;
    std::vector<std::vector<double>> axes;
    std::vector<std::string> value_names;
};

/// Cartesian product of the axes, sorted lexicographically by key.
inline std::vector<std::vector<double>> grid_points(const std::vector<std::vector<double>>& axes) {
    std::vector<std::vector<double>> pts{{}};
    for (const auto& ax : axes) {
        require(!ax.empty(), "sweep: empty parameter grid");
        std::vector<std::vector<double>> next;
        for (const auto& p : pts)
            for (double v : ax) {
                auto q = p;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        pts = std::move(next);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

/// Runs job(key, seed) on every grid point concurrently and merges in key
/// order. Failed jobs give rows with status "error: ..." and empty values.
template <class Job>
io::Csv run_sweep(const SweepSpec& spec, std::uint64_t seed, Job&& job, std::size_t* failures = nullptr) {
    const auto pts = grid_points(spec.axes);
    const auto rows = parallel_map(pts.size(), [&](std::size_t k) {
        SweepRow r;
        r.key = pts[k];
        try {
            r.values = job(pts[k], derive_seed(seed, k));
        } catch (const std::exception& e) {
            r.status = std::string("error: ") + e.what();
            for (char& c : r.status)
                if (c == ',' || c == '\n') c = ';';
            r.values.assign(spec.value_names.size(), "");
        }
        return r;
    });
    io::Csv t;
    t.header = spec.key_names;
    t.header.insert(t.header.end(), spec.value_names.begin(), spec.value_names.end());
    t.header.push_back("status");
    std::size_t bad = 0;
    for (const auto& r : rows) {
        std::vector<std::string> cells;
        for (double v : r.key) cells.push_back(num(v));
        cells.insert(cells.end(), r.values.begin(), r.values.end());
        cells.push_back(r.status);
        t.add(std::move(cells));
        if (r.status != "ok") ++bad;
    }
    if (failures) *failures = bad;
    return t;
}

// plot -------------------------------------------------------------------------

inline std::string plot(const io::Csv& t, const std::string& kind) {
    svg::Plot p;
    if (kind == "ecurve") {
        io::expect_schema(t, ecurve_columns(), "plot ecurve");
        p.title = "E(L) with extrapolation error";
        p.xlabel = "L";
        p.ylabel = "E(L)";
        svg::Series s;
        s.x = t.numbers("L"), s.y = t.numbers("E"), s.label = "E(L)";
        s.err = t.numbers("err");
        p.series.push_back(s);
        const double thr = strip::trivial_threshold(montgomery::reference_minimum().lambda0);
        p.vlines.push_back({thr, "lambda0^-3/2 = " + svg::detail::fmt(thr)});
        p.hlines.push_back({0.0, "E = 0"});
    } else if (kind == "gtable") {
        io::expect_schema(t, gtable_columns(), "plot gtable");
        p.title = "Cell energy g(b)";
        p.xlabel = "b";
        p.ylabel = "g(b)";
        svg::Series s;
        s.x = t.numbers("b"), s.y = t.numbers("g"), s.label = "g(b)";
        p.series.push_back(s);
        p.hlines.push_back({-0.5, "g = -1/2"});
        p.vlines.push_back({1.0, "b = 1"});
    } else if (kind == "decay") {
        io::expect_schema(t, decay_columns(), "plot decay");
        p.title = "Mass of |psi|^2 by distance to the zero set";
        p.xlabel = "distance t in units of kappa/H";
        p.ylabel = "mass per bin";
        p.log_y = true;
        std::vector<double> mid;
        const auto lo = t.numbers("t_lo"), hi = t.numbers("t_hi");
        for (std::size_t k = 0; k < lo.size(); ++k) mid.push_back(0.5 * (lo[k] + hi[k]));
        svg::Series s;
        s.x = mid, s.y = t.numbers("mass"), s.label = "mass", s.line = false;
        p.series.push_back(s);
    } else if (kind == "verify") {
        io::expect_schema(t, verify_columns(), "plot verify");
        p.title = "Normalized gap |E - C0| H / kappa^3";
        p.xlabel = "kappa";
        p.ylabel = "relative gap";
        svg::Series gap, mag;
        gap.x = mag.x = t.numbers("kappa");
        gap.y = t.numbers("relative_gap"), gap.label = "energy gap";
        mag.y = t.numbers("magnetic_normalized"), mag.label = "magnetic / (kappa^3/H)", mag.color = "#d62728";
        p.series.push_back(gap);
        p.series.push_back(mag);
    } else {
        throw ValidationError("plot: unknown kind '" + kind + "' (ecurve | gtable | decay | verify)");
    }
    return svg::render(p);
}

} // namespace glzero::app
