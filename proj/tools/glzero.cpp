// glzero: command-line front end. Exit codes: 0 success, 2 invalid input,
// 1 solver failure.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glzero/app.hpp"

using namespace glzero;
using app::json;

namespace {

struct Common {
    std::string out;
    std::uint64_t seed = 1;
    bool timings = false;
};

void add_common(CLI::App* sc, Common& c, const std::string& default_out) {
    c.out = default_out;
    sc->add_option("--out", c.out, "output path")->capture_default_str();
    sc->add_option("--seed", c.seed, "64-bit seed for all random draws")->capture_default_str();
    sc->add_flag("--timings", c.timings, "record wall-clock timings in JSON outputs");
}

void emit(const std::string& path, const std::string& command, json config, const Common& c, json payload,
          const app::Stopwatch& sw) {
    io::Envelope e;
    e.command = command;
    config["seed"] = c.seed;
    e.config = std::move(config);
    if (c.timings) e.timings = json{{"wall_seconds", sw.seconds()}};
    e.payload = std::move(payload);
    io::write_envelope(path, e);
    std::cout << "wrote " << path << '\n';
}

void emit_csv(const std::string& path, io::Csv t, const std::string& command, const Common& c) {
    t.comment = "glzero " + command + " seed=" + std::to_string(c.seed);
    io::write_csv(path, t);
    std::cout << "wrote " << path << " (" << t.rows.size() << " rows)\n";
}

montgomery::Grid1D grid_of(double T, std::size_t n) { return montgomery::Grid1D(T, n); }

}  // namespace

int run(int argc, char** argv) {
    CLI::App cli{"glzero: Ginzburg-Landau effective models near a vanishing field"};
    cli.require_subcommand(1);
    cli.set_help_all_flag("--help-all", "help for every subcommand");

    // montgomery
    Common mc;
    std::string tau_range = "-3,2";
    std::size_t tau_samples = 21;
    bool minimize = false;
    double mtol = 1e-6, mT = 12.0;
    std::size_t mn = 4801;
    auto* mon = cli.add_subcommand("montgomery", "lambda(tau) curve or its minimum");
    add_common(mon, mc, "");
    mon->add_option("--tau-range", tau_range, "a,b")->capture_default_str();
    mon->add_option("--samples", tau_samples)->capture_default_str();
    mon->add_flag("--minimize", minimize, "locate (tau0, lambda0)");
    mon->add_option("--tol", mtol)->capture_default_str();
    mon->add_option("--T", mT, "truncation of the t-axis")->capture_default_str();
    mon->add_option("--n", mn, "grid nodes")->capture_default_str();

    // e1d
    Common ec;
    double e_b = 0.7;
    std::string b_range;
    std::size_t b_samples = 11;
    double eT = 8.0;
    std::size_t en = 801;
    auto* e1d = cli.add_subcommand("e1d", "1D reduced energy minimized over alpha");
    add_common(e1d, ec, "");
    e1d->add_option("--b", e_b)->capture_default_str();
    e1d->add_option("--b-range", b_range, "a,b (table mode)");
    e1d->add_option("--samples", b_samples)->capture_default_str();
    e1d->add_option("--T", eT)->capture_default_str();
    e1d->add_option("--n", en)->capture_default_str();

    // strip
    Common sc;
    double s_L = 0.5;
    std::string s_R = "4,8,16", L_range = "0.05,3";
    std::size_t L_samples = 24;
    bool table = false, conj = false;
    double s_tol = 1e-6, s_h = 0.1;
    std::string s_field;
    auto* stp = cli.add_subcommand("strip", "strip energy E(L) by R-extrapolation");
    add_common(stp, sc, "");
    stp->add_option("--L", s_L)->capture_default_str();
    stp->add_option("--R", s_R, "comma-separated half-lengths")->capture_default_str();
    stp->add_flag("--table", table, "tabulate E over --L-range");
    stp->add_option("--L-range", L_range)->capture_default_str();
    stp->add_option("--samples", L_samples)->capture_default_str();
    stp->add_flag("--conjecture", conj, "compare E(L) with the 1D energy at L^{-2/3}");
    stp->add_option("--tol", s_tol)->capture_default_str();
    stp->add_option("--spacing", s_h, "grid spacing")->capture_default_str();
    stp->add_option("--field", s_field, "write the largest-R minimizer (binary + .json header)");

    // cell
    Common cc;
    std::string c_brange = "0.05,1.3", c_r = "8,16,32";
    std::size_t c_samples = 26;
    double c_tol = 1e-4;
    auto* cel = cli.add_subcommand("cell", "cell energy g(b) table");
    add_common(cel, cc, "g.csv");
    cel->add_option("--b-range", c_brange)->capture_default_str();
    cel->add_option("--samples", c_samples)->capture_default_str();
    cel->add_option("--r", c_r, "comma-separated side lengths")->capture_default_str();
    cel->add_option("--tol", c_tol)->capture_default_str();

    // domain
    Common dc;
    std::string geometry = "disc", rect = "-1,-1,1,1", B0 = "x1", mode = "fixed", report = "report.json", problem_in,
                problem_out, decay_out;
    double radius = 1.0, kappa = 10.0, sigma = 0.5, d_tol = 1e-6, d_h = 0.0;
    auto* dom = cli.add_subcommand("domain", "minimize the GL energy on a 2D domain");
    add_common(dom, dc, "state.bin");
    dom->add_option("--geometry", geometry, "disc | rect")->capture_default_str();
    dom->add_option("--radius", radius)->capture_default_str();
    dom->add_option("--rect", rect, "x0,y0,x1,y1")->capture_default_str();
    dom->add_option("--B0", B0, "field profile over x1, x2 (see docs/B0-grammar.md)")->capture_default_str();
    dom->add_option("--kappa", kappa)->capture_default_str();
    dom->add_option("--sigma", sigma, "H / kappa^2")->capture_default_str();
    dom->add_option("--mode", mode, "fixed | full")->capture_default_str();
    dom->add_option("--tol", d_tol)->capture_default_str();
    dom->add_option("--spacing", d_h, "grid spacing (0 = automatic)")->capture_default_str();
    dom->add_option("--problem", problem_in, "read geometry, B0, kappa, H from JSON (overrides the flags)");
    dom->add_option("--report", report)->capture_default_str();
    dom->add_option("--problem-out", problem_out, "write the problem JSON");
    dom->add_option("--decay", decay_out, "write the decay histogram CSV");

    // verify
    Common vc;
    std::string v_problem, v_state, v_ecurve, v_gtable, v_sweep, v_mode = "fixed", v_csv;
    auto* ver = cli.add_subcommand("verify", "compare domain energies with the leading-order formulas");
    add_common(ver, vc, "report.json");
    ver->add_option("--problem", v_problem)->required();
    ver->add_option("--state", v_state);
    ver->add_option("--ecurve", v_ecurve)->required();
    ver->add_option("--gtable", v_gtable)->required();
    ver->add_option("--kappa-sweep", v_sweep, "re-solve at these kappa with H/kappa^2 fixed");
    ver->add_option("--mode", v_mode, "fixed | full (sweep)")->capture_default_str();
    ver->add_option("--csv", v_csv, "also write the per-point table");

    // sweep
    Common wc;
    std::string w_kind, w_kappa = "8,12,16", w_sigma = "0.5", w_b, w_L, w_R = "4,8,16", w_r = "8,16,32", w_mode = "fixed",
                w_B0 = "x1";
    auto* swp = cli.add_subcommand("sweep", "run a parameter grid and merge one CSV");
    add_common(swp, wc, "sweep.csv");
    swp->add_option("--kind", w_kind, "domain | strip | cell | e1d")->required();
    swp->add_option("--kappa", w_kappa)->capture_default_str();
    swp->add_option("--sigma", w_sigma)->capture_default_str();
    swp->add_option("--mode", w_mode)->capture_default_str();
    swp->add_option("--B0", w_B0)->capture_default_str();
    swp->add_option("--b", w_b, "b values (cell, e1d)");
    swp->add_option("--L", w_L, "L values (strip)");
    swp->add_option("--R", w_R)->capture_default_str();
    swp->add_option("--r", w_r)->capture_default_str();

    // plot
    std::string p_csv, p_kind, p_out;
    auto* plt = cli.add_subcommand("plot", "SVG from a glzero CSV");
    plt->add_option("--csv", p_csv)->required();
    plt->add_option("--kind", p_kind, "ecurve | gtable | decay | verify")->required();
    plt->add_option("--out", p_out);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << cli.help();
        return 2;
    }

    const app::Stopwatch sw;

    if (*mon) {
        const auto g = grid_of(mT, mn);
        if (minimize) {
            emit(mc.out.empty() ? "min.json" : mc.out, "montgomery",
                 {{"minimize", true}, {"tol", mtol}, {"T", mT}, {"n", mn}}, mc, app::montgomery_min(mtol, g), sw);
        } else {
            const auto [lo, hi] = app::parse_range(tau_range, "--tau-range");
            emit_csv(mc.out.empty() ? "curve.csv" : mc.out, app::montgomery_curve(lo, hi, tau_samples, g), "montgomery", mc);
        }
    } else if (*e1d) {
        app::E1dSetup s;
        s.grid = grid_of(eT, en);
        if (!b_range.empty()) {
            const auto [lo, hi] = app::parse_range(b_range, "--b-range");
            emit_csv(ec.out.empty() ? "table.csv" : ec.out, app::e1d_table(app::linspace(lo, hi, b_samples, "e1d"), s), "e1d",
                     ec);
        } else {
            emit(ec.out.empty() ? "e1d.json" : ec.out, "e1d", {{"b", e_b}, {"T", eT}, {"n", en}}, ec,
                 app::e1d_point(e_b, s, app::e1d_montgomery(s.grid)), sw);
        }
    } else if (*stp) {
        app::StripSetup s;
        s.R_list = app::parse_list(s_R, "--R");
        s.opt.tol = s_tol;
        s.opt.seed = sc.seed;
        s.h = s_h;
        const json cfg = {{"L", s_L}, {"R", app::to_json(s.R_list)}, {"tol", s_tol}, {"h", s_h}};
        if (table) {
            const auto [lo, hi] = app::parse_range(L_range, "--L-range");
            const auto pts = app::ecurve_points(app::linspace(lo, hi, L_samples, "strip"), s);
            emit_csv(sc.out.empty() ? "ecurve.csv" : sc.out, app::ecurve_csv(pts), "strip", sc);
        } else if (conj) {
            emit(sc.out.empty() ? "conjecture.json" : sc.out, "strip", cfg, sc, app::conjecture(s_L, s), sw);
        } else {
            strip::StripMinimizer last;
            const json payload = app::strip_point(s_L, s, s_field.empty() ? nullptr : &last);
            if (!s_field.empty()) app::write_strip_field(s_field, last, sc.seed);
            emit(sc.out.empty() ? "E.json" : sc.out, "strip", cfg, sc, payload, sw);
        }
    } else if (*cel) {
        const auto [lo, hi] = app::parse_range(c_brange, "--b-range");
        cell::CellOptions o;
        o.tol = c_tol;
        o.seed = cc.seed;
        const auto rows = app::gtable_rows(cell::b_samples(lo, hi, c_samples), app::parse_list(c_r, "--r"), o);
        emit_csv(cc.out, app::gtable_csv(rows), "cell", cc);
    } else if (*dom) {
        io::ProblemSpec spec;
        if (!problem_in.empty()) {
            spec = io::read_problem(problem_in);
        } else {
            if (geometry == "disc") {
                spec.geometry = domain::Geometry::disc(radius);
            } else if (geometry == "rect") {
                const auto r = app::parse_list(rect, "--rect");
                require(r.size() == 4, "--rect: expected x0,y0,x1,y1");
                spec.geometry = domain::Geometry::rectangle(r[0], r[1], r[2], r[3]);
            } else {
                throw ValidationError("--geometry must be disc or rect");
            }
            require(kappa > 0.0 && sigma > 0.0, "--kappa and --sigma must be positive");
            spec.B0 = B0;
            spec.kappa = kappa;
            spec.H = sigma * kappa * kappa;
            spec.options.h = d_h;
        }
        const auto p = spec.build();
        domain::SolveOptions o;
        o.tol = d_tol;
        o.seed = dc.seed;
        const auto s = domain::minimize_gl(p, app::parse_mode(mode), o);
        io::write_state(dc.out, p, s, spec, dc.seed);
        if (!problem_out.empty()) io::write_text(problem_out, io::to_json(spec).dump(2) + "\n");
        if (!decay_out.empty()) emit_csv(decay_out, app::decay_csv(domain::decay_profile(p, s)), "domain", dc);
        emit(report, "domain", {{"problem", io::to_json(spec)}, {"mode", mode}, {"tol", d_tol}}, dc,
             app::domain_report(p, s), sw);
    } else if (*ver) {
        const io::ProblemSpec spec = io::read_problem(v_problem);
        const auto ecurve = app::read_ecurve(v_ecurve);
        const auto gtable = app::read_gtable(v_gtable);
        require(!v_state.empty() || !v_sweep.empty(), "verify: need --state or --kappa-sweep");
        json payload;
        std::vector<asym::VerificationReport> points;
        if (!v_state.empty()) {
            const auto p = spec.build();
            const auto s = io::read_state(v_state, p);
            const auto r = asym::verify(p, s, ecurve, gtable);
            payload["state"] = app::to_json(r);
            points.push_back(r);
        }
        if (!v_sweep.empty()) {
            domain::SolveOptions o;
            o.seed = vc.seed;
            const auto vs = app::verify_sweep(spec, app::parse_list(v_sweep, "--kappa-sweep"), app::parse_mode(v_mode), o,
                                              ecurve, gtable);
            payload["sweep"] = json::array();
            for (const auto& r : vs) {
                payload["sweep"].push_back(app::to_json(r));
                if (!r.warning.empty()) std::cerr << "warning: kappa=" << r.kappa << ": " << r.warning << '\n';
            }
            payload["trend"] = app::trend_json(vs);
            points = vs;
        }
        if (!v_csv.empty()) emit_csv(v_csv, app::verify_csv(points), "verify", vc);
        emit(vc.out, "verify",
             {{"problem", io::to_json(spec)}, {"state", v_state}, {"ecurve", v_ecurve}, {"gtable", v_gtable},
              {"kappa_sweep", v_sweep}, {"mode", v_mode}},
             vc, payload, sw);
    } else if (*swp) {
        app::SweepSpec spec;
        spec.kind = w_kind;
        std::function<std::vector<std::string>(const std::vector<double>&, std::uint64_t)> job;
        using app::num;
        if (w_kind == "domain") {
            spec.key_names = {"kappa", "sigma"};
            spec.axes = {app::parse_list(w_kappa, "--kappa"), app::parse_list(w_sigma, "--sigma")};
            spec.value_names = {"H",      "energy", "E_over_2kappa", "magnetic_normalized", "psi_eq", "A_eq", "virial",
                                "m_hat", "bandwidth90", "mass_within_4kappa_over_H"};
            const auto m = app::parse_mode(w_mode);
            job = [&, m](const std::vector<double>& k, std::uint64_t seed) {
                const double H = k[1] * k[0] * k[0];
                const auto p = domain::build_problem(domain::Geometry::disc(1.0), w_B0, k[0], H);
                domain::SolveOptions o;
                o.seed = seed;
                const auto s = domain::minimize_gl(p, m, o);
                const auto d = domain::decay_profile(p, s);
                return std::vector<std::string>{num(H),
                                                num(s.energy_total),
                                                num(s.energy_total / (2.0 * k[0])),
                                                num(s.parts.magnetic * H / (k[0] * k[0] * k[0])),
                                                num(s.residuals.psi_eq),
                                                num(s.residuals.A_eq),
                                                num(s.residuals.virial),
                                                num(d.m_hat),
                                                num(d.bandwidth90),
                                                num(domain::mass_fraction_within(p, s, 4.0 * k[0] / H))};
            };
        } else if (w_kind == "strip") {
            spec.key_names = {"L"};
            spec.axes = {app::parse_list(w_L, "--L")};
            spec.value_names = {"E", "err", "fit_c", "E_inverse_R"};
            const auto R = app::parse_list(w_R, "--R");
            job = [R](const std::vector<double>& k, std::uint64_t seed) {
                strip::StripOptions o;
                o.seed = seed;
                const auto p = strip::estimate_E(k[0], R, o);
                return std::vector<std::string>{num(p.E), num(p.err), num(p.fit_c), num(p.E_inverse_R)};
            };
        } else if (w_kind == "cell") {
            spec.key_names = {"b"};
            spec.axes = {app::parse_list(w_b, "--b")};
            spec.value_names = {"g", "envelope", "r_max", "fit_c"};
            const auto r = app::parse_list(w_r, "--r");
            job = [r](const std::vector<double>& k, std::uint64_t seed) {
                cell::CellOptions o;
                o.seed = seed;
                const auto row = cell::estimate_g(k[0], r, o);
                return std::vector<std::string>{num(row.g_est), num(row.envelope), num(row.r_list.back()), num(row.fit_c)};
            };
        } else if (w_kind == "e1d") {
            spec.key_names = {"b"};
            spec.axes = {app::parse_list(w_b, "--b")};
            spec.value_names = {"alpha0", "e1d", "fh_residual", "z1", "z2"};
            const app::E1dSetup setup;
            const auto mm = app::e1d_montgomery(setup.grid);
            job = [setup, mm](const std::vector<double>& k, std::uint64_t) {
                const json j = app::e1d_point(k[0], setup, mm);
                return std::vector<std::string>{num(j["alpha0"].get<double>()), num(j["e1d"].get<double>()),
                                                num(j["fh_residual"].get<double>()), num(j["z1"].get<double>()),
                                                num(j["z2"].get<double>())};
            };
        } else {
            throw ValidationError("sweep: --kind must be domain, strip, cell or e1d");
        }
        std::size_t failures = 0;
        io::Csv t = app::run_sweep(spec, wc.seed, job, &failures);
        emit_csv(wc.out, std::move(t), "sweep " + w_kind, wc);
        if (failures > 0) {
            std::cerr << "sweep: " << failures << " job(s) failed, see the status column\n";
            return 1;
        }
    } else if (*plt) {
        const io::Csv t = io::read_csv(p_csv);
        if (p_out.empty()) {
            p_out = p_csv;
            const auto dot = p_out.rfind('.');
            if (dot != std::string::npos && p_out.find('/', dot) == std::string::npos) p_out.resize(dot);
            p_out += ".svg";
        }
        io::write_text(p_out, app::plot(t, p_kind));
        std::cout << "wrote " << p_out << '\n';
    }
    return 0;
}

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 1;
    }
}
