// Acceptance suite. One PASS/FAIL line per criterion; exit status 1 if any fails.
// Usage: acceptance <path-to-glzero-cli> [work-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "glzero/app.hpp"
#include "glzero/asym.hpp"
#include "glzero/cell.hpp"
#include "glzero/domain.hpp"
#include "glzero/energy1d.hpp"
#include "glzero/io.hpp"
#include "glzero/montgomery.hpp"
#include "glzero/strip.hpp"

using namespace glzero;
namespace fs = std::filesystem;
using lattice::cplx;
using lattice::Field;

namespace {

// Tolerances and budgets.
namespace tol {
const double lambda0 = 0.57, lambda0_pm = 0.01;
const double runtime_c1 = 10.0, runtime_c2 = 10.0;
const double lambda_at_zero_slack = 1e-3;
const double fh_max = 5e-3, fh_ratio = 0.5, fh_ratio_pm = 0.5;
const double runtime_c4 = 60.0;
const double trivial_energy = 1e-6, runtime_c5 = 120.0;
const double band_ratio = 10.0, runtime_c7 = 1800.0;
const double cell_trivial = 1e-3, g_small_b = -0.35;
const double gauge = 1e-10, gradient = 1e-6, sup = 1e-6, virial = 1e-6;
const double mass_fraction = 0.8, runtime_c11 = 3600.0;
const double inversion = 0.1;
}  // namespace tol

const double sigma = 0.5;
const std::vector<double> kappas{8.0, 12.0, 16.0};
const std::vector<double> band_L{0.05, 0.1, 0.2, 0.5, 1.0};
const std::vector<double> R_default{4.0, 8.0, 16.0};
const std::vector<double> R_large{8.0, 16.0, 32.0};
const std::vector<double> cell_b{0.05, 0.25, 0.5, 0.75, 1.0, 1.2};
const std::vector<double> cell_r{8.0, 16.0, 32.0};
const std::vector<double> conjecture_L{1.95, 2.08, 2.2};

int failures = 0;
std::map<int, std::string> summary;

std::string f(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void result(int n, bool pass, const std::string& detail) {
    std::printf("CRITERION %2d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
    if (!summary.count(n) || !pass) summary[n] = pass ? "PASS" : "FAIL";
}

void info(int n, const std::string& detail) {
    std::printf("  INFO %2d: %s\n", n, detail.c_str());
    std::fflush(stdout);
}

class Timer {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

/// Runs one criterion, turning an exception into a FAIL line.
void guarded(int n, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        result(n, false, std::string("exception: ") + e.what());
    }
}

domain::DomainProblem model(double kappa, double s) {
    return domain::build_problem(domain::Geometry::disc(1.0), "x1", kappa, s * kappa * kappa);
}

Field random_psi(const domain::DomainProblem& p, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Field u(p.lat.size());
    for (std::size_t n = 0; n < u.size(); ++n)
        if (!p.lat.pinned[n]) u[n] = cplx(rng.symmetric(), rng.symmetric());
    return u;
}

std::vector<double> random_delta(const domain::DomainProblem& p, std::uint64_t seed, double amp) {
    SplitMix64 rng(seed);
    std::vector<double> d(p.grid_edges());
    for (double& x : d) x = amp * rng.symmetric();
    return d;
}

/// Relative energy change under a random gauge transformation.
double gauge_defect(const domain::DomainProblem& p, Field psi, std::vector<double> delta) {
    const double e0 = domain::energy(p, psi, delta);
    SplitMix64 rng(99);
    std::vector<double> chi(psi.size());
    for (double& c : chi) c = 5.0 * rng.symmetric();
    for (std::size_t n = 0; n < psi.size(); ++n) psi[n] *= std::polar(1.0, chi[n]);
    const auto& g = p.grid;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            if (i + 1 < g.nx) delta[p.x_edge(i, j)] += chi[g.index(i + 1, j)] - chi[g.index(i, j)];
            if (j + 1 < g.ny) delta[p.y_edge(i, j)] += chi[g.index(i, j + 1)] - chi[g.index(i, j)];
        }
    return std::abs(domain::energy(p, psi, delta) - e0) / std::abs(e0);
}

/// max |analytic - central difference| / max |central difference| over sampled
/// psi (real and imaginary) and delta components.
double gradient_defect(const domain::DomainProblem& p, const Field& psi, const std::vector<double>& delta) {
    const lattice::Lattice lat = domain::lattice_with(p, delta);
    Field g;
    lattice::gradient(lat, p.coefficients(), psi, g);
    const std::vector<double> gd = domain::delta_gradient(p, psi, delta);
    const double h = 1e-6;
    double err = 0.0, scale = 0.0;
    auto add = [&](double a, double fd) {
        err = std::max(err, std::abs(a - fd));
        scale = std::max(scale, std::abs(fd));
    };
    for (std::size_t n = 0; n < psi.size(); n += 5) {
        if (p.lat.pinned[n]) continue;
        for (const cplx dir : {cplx(1.0, 0.0), cplx(0.0, 1.0)}) {
            Field up = psi, um = psi;
            up[n] += h * dir;
            um[n] -= h * dir;
            const double fd = (domain::energy(p, up, delta) - domain::energy(p, um, delta)) / (2 * h);
            add(dir.real() != 0.0 ? g[n].real() : g[n].imag(), fd);
        }
    }
    for (std::size_t e = 0; e < delta.size(); e += 7) {
        std::vector<double> dp = delta, dm = delta;
        dp[e] += h;
        dm[e] -= h;
        add(gd[e], (domain::energy(p, psi, dp) - domain::energy(p, psi, dm)) / (2 * h));
    }
    return scale > 0.0 ? err / scale : err;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + f(x);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <glzero-cli> [work-dir]\n");
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "glzero_acceptance";
    fs::create_directories(work);
    const Timer total;

    // 1. Montgomery minimum.
    guarded(1, [] {
        const Timer t;
        const auto m = montgomery::minimize_lambda(montgomery::Grid1D(12.0, 4801), 1e-8);
        const double s = t.seconds();
        result(1, std::abs(m.lambda0 - tol::lambda0) <= tol::lambda0_pm && m.tau0 < 0.0 && s < tol::runtime_c1,
               "lambda0=" + f(m.lambda0) + " (err " + f(m.err) + ") tau0=" + f(m.tau0) + " time=" + f(s) + "s");
    });

    // 2. lambda(0) bound and strict inequality.
    guarded(2, [] {
        const Timer t;
        const double l0 = montgomery::lambda_extrapolated(0.0, montgomery::Grid1D(12.0, 4801)).value;
        const double lmin = montgomery::reference_minimum().lambda0;
        const double bound = std::pow(0.75, 4.0 / 3.0);
        const double s = t.seconds();
        result(2, l0 <= bound + tol::lambda_at_zero_slack && lmin < l0 && s < tol::runtime_c2,
               "lambda(0)=" + f(l0) + " bound=" + f(bound) + " lambda0=" + f(lmin) + " time=" + f(s) + "s");
    });

    // 3. lambda strictly increasing on [0, 5], steps larger than the error estimates.
    guarded(3, [] {
        const montgomery::Grid1D g(12.0, 4801);
        std::vector<montgomery::Extrapolated> v;
        for (std::size_t k = 0; k < 21; ++k) v.push_back(montgomery::lambda_extrapolated(0.25 * static_cast<double>(k), g));
        std::size_t bad = 0;
        double min_step = 1e300;
        for (std::size_t k = 1; k < v.size(); ++k) {
            const double step = v[k].value - v[k - 1].value;
            min_step = std::min(min_step, step);
            if (!(step > v[k].err + v[k - 1].err)) ++bad;
        }
        result(3, bad == 0, "21 samples, violations=" + std::to_string(bad) + " min step=" + f(min_step));
    });

    // 4. Feynman-Hellmann residual at b = 0.7 and its change under 2x refinement.
    guarded(4, [] {
        const Timer t;
        const auto& mm = montgomery::reference_minimum();
        const montgomery::Grid1D coarse(8.0, 801);
        const auto a = energy1d::minimize_over_alpha(0.7, mm, coarse);
        const auto b = energy1d::minimize_over_alpha(0.7, mm, coarse.refined());
        const double s = t.seconds();
        const double r = std::abs(b.fh_residual) / std::abs(a.fh_residual);
        const bool halves = std::abs(r - tol::fh_ratio) <= tol::fh_ratio_pm * tol::fh_ratio;
        result(4, std::abs(a.fh_residual) <= tol::fh_max && halves && s < tol::runtime_c4,
               "fh(h)=" + f(a.fh_residual) + " fh(h/2)=" + f(b.fh_residual) + " ratio=" + f(r) + " (want " +
                   f(tol::fh_ratio) + " +-" + f(100 * tol::fh_ratio_pm) + "%) time=" + f(s) + "s");
        info(4, "alpha tolerance = grid spacing: alpha0(h)=" + f(a.alpha0) + " alpha0(h/2)=" + f(b.alpha0));
    });

    // 5. Strip trivial threshold.
    guarded(5, [] {
        const Timer t;
        double worst = 0.0;
        std::string d;
        for (double R : {4.0, 8.0}) {
            const double e = std::abs(strip::e_gs(3.0, R)) / (2.0 * R);
            worst = std::max(worst, e);
            d += "R=" + f(R) + ":" + f(e) + " ";
        }
        const double s = t.seconds();
        result(5, worst <= tol::trivial_energy && s < tol::runtime_c5, "L=3 |e|/2R " + d + "time=" + f(s) + "s");
    });

    // 7 (and the table for 6). E(L) band over the default R ladder.
    std::vector<strip::ECurvePoint> table;
    guarded(7, [&] {
        const Timer t;
        const double l0 = montgomery::reference_minimum().lambda0;
        std::vector<double> q;
        std::string d;
        for (double L : band_L) {
            const Timer tl;
            table.push_back(strip::estimate_E(L, R_default));
            const auto& p = table.back();
            q.push_back(-p.E * std::pow(L, 4.0 / 3.0) / (1.0 - l0 * std::pow(L, 2.0 / 3.0)));
            info(7, "L=" + f(L) + " E=" + f(p.E) + " err=" + f(p.err) + " E_1/R=" + f(p.E_inverse_R) +
                        " q=" + f(q.back()) + " (" + f(tl.seconds()) + "s)");
        }
        const double s = t.seconds();
        const double qmin = *std::min_element(q.begin(), q.end()), qmax = *std::max_element(q.begin(), q.end());
        result(7, qmin > 0.0 && qmax / qmin <= tol::band_ratio && s < tol::runtime_c7,
               "R={" + join(R_default) + "} q in [" + f(qmin) + ", " + f(qmax) + "] max/min=" + f(qmax / qmin) +
                   " time=" + f(s) + "s");
    });

    // 12 needs E(0.5) on the larger ladder; it also joins the sandwich table.
    strip::ECurvePoint e_half;
    bool have_half = false;
    guarded(12, [&] {
        const Timer t;
        e_half = strip::estimate_E(sigma, R_large);
        have_half = true;
        info(12, "E(0.5) R={" + join(R_large) + "}: E=" + f(e_half.E) + " err=" + f(e_half.err) +
                     " E_1/R=" + f(e_half.E_inverse_R) + " (" + f(t.seconds()) + "s)");
    });

    // 9. Conjecture window report.
    std::vector<strip::ConjectureRecord> conj;
    guarded(9, [&] {
        const auto [lo, hi] = strip::conjecture_window();
        for (double L : conjecture_L) {
            conj.push_back(strip::check_conjecture(L));
            const auto& c = conj.back();
            info(9, "L=" + f(L) + " E=" + f(c.E_strip) + " E1D=" + f(c.E_1d) + " abs=" + f(c.abs_gap) +
                        " rel=" + f(c.rel_gap));
        }
        result(9, conj.size() == conjecture_L.size(),
               "window (" + f(lo) + ", " + f(hi) + ") report for L={" + join(conjecture_L) + "}");
    });

    // 6. Sandwich: fitted E below every finite-R value, up to the fit residual.
    guarded(6, [&] {
        std::vector<strip::ECurvePoint> all = table;
        if (have_half) all.push_back(e_half);
        std::size_t bad = 0;
        double worst = -1e300;
        for (const auto& p : all) {
            const double mn = *std::min_element(p.e_over_2R.begin(), p.e_over_2R.end());
            worst = std::max(worst, p.E - mn);
            if (p.E > mn + p.err) ++bad;
        }
        result(6, !all.empty() && bad == 0,
               std::to_string(all.size()) + " points, violations=" + std::to_string(bad) +
                   " max(E - min e/2R)=" + f(worst));
    });

    // 8. Cell problem.
    cell::GTable gtab;
    guarded(8, [&] {
        const Timer t;
        std::size_t nd_bad = 0;
        bool range_ok = true;
        double trivial = 0.0, g_small = 0.0, env_small = 0.0;
        for (double b : cell_b) {
            const cell::GRow row = cell::estimate_g(b, cell_r);
            gtab.push_back(row);
            for (std::size_t k = 0; k < row.r_list.size(); ++k)
                if (row.e_N[k] > row.e_D[k]) ++nd_bad;
            range_ok = range_ok && row.g_est >= -0.5 && row.g_est <= 0.0;
            if (b == 1.2) trivial = std::abs(row.e_D.back() / (row.r_list.back() * row.r_list.back()));
            if (b == 0.05) g_small = row.g_est, env_small = row.envelope;
            info(8, "b=" + f(b) + " g=" + f(row.g_est) + " envelope=" + f(row.envelope) + " fit_c=" + f(row.fit_c));
        }
        result(8, nd_bad == 0 && trivial <= tol::cell_trivial && range_ok && g_small <= tol::g_small_b,
               "eN>eD count=" + std::to_string(nd_bad) + " |eD/r^2|(1.2,32)=" + f(trivial) +
                   " g(0.05)=" + f(g_small) + " envelope=" + f(env_small) + " time=" + f(t.seconds()) + "s");
    });

    // 11 (and the states for 10 and 12). Full-mode model sweep.
    std::vector<domain::DomainProblem> probs;
    std::vector<domain::GLState> states;
    guarded(11, [&] {
        const Timer t;
        bool ok = true;
        for (double k : kappas) {
            probs.push_back(model(k, sigma));
            states.push_back(domain::minimize_gl(probs.back(), domain::Mode::Full));
            const auto& p = probs.back();
            const auto& s = states.back();
            const double frac = domain::mass_fraction_within(p, s, 4.0 * k / p.H);
            const auto d = domain::decay_profile(p, s);
            ok = ok && s.converged && frac >= tol::mass_fraction && d.m_hat > 0.0;
            info(11, "kappa=" + f(k) + " fraction=" + f(frac) + " m_hat=" + f(d.m_hat) + " bw90=" + f(d.bandwidth90) +
                         " converged=" + (s.converged ? "yes" : "no"));
        }
        const auto p2 = model(kappas.front(), 2.0 * sigma);
        const auto s2 = domain::minimize_gl(p2, domain::Mode::Full);
        const double bw1 = domain::decay_profile(probs.front(), states.front()).bandwidth90;
        const double bw2 = domain::decay_profile(p2, s2).bandwidth90;
        const double sec = t.seconds();
        result(11, ok && bw2 < bw1 && sec < tol::runtime_c11,
               "bw90(kappa=8) H: " + f(bw1) + " -> 2H: " + f(bw2) + " time=" + f(sec) + "s");
    });

    // 10. Domain invariants on the converged states and a random full-mode state.
    guarded(10, [&] {
        const auto small = model(3.0, sigma);
        const double gauge_random = gauge_defect(small, random_psi(small, 1), random_delta(small, 2, 0.3));
        const double grad = gradient_defect(small, random_psi(small, 4), random_delta(small, 5, 0.2));
        double gauge_conv = 0.0, sup = 0.0, vir = 0.0;
        for (std::size_t k = 0; k < states.size(); ++k) {
            gauge_conv = std::max(gauge_conv, gauge_defect(probs[k], states[k].psi, states[k].delta));
            sup = std::max(sup, lattice::sup_norm(states[k].psi));
            vir = std::max(vir, states[k].residuals.virial);
        }
        const bool ok = !states.empty() && std::max(gauge_random, gauge_conv) <= tol::gauge && grad <= tol::gradient &&
                        sup <= 1.0 + tol::sup && vir <= tol::virial;
        result(10, ok,
               "gauge=" + f(std::max(gauge_random, gauge_conv)) + " gradient=" + f(grad) + " sup|psi|=" + f(sup) +
                   " virial=" + f(vir));
    });

    // 12. Asymptotic trend of the normalized gap and of the magnetic energy.
    guarded(12, [&] {
        require(have_half && states.size() == kappas.size() && !gtab.empty(), "inputs from criteria 8, 11 missing");
        const double l0 = montgomery::reference_minimum().lambda0;
        const asym::Table gt = asym::gtable_table(gtab);
        auto gaps = [&](double E) {
            const asym::Table et = asym::ecurve_table({sigma}, {E}, l0);
            std::vector<asym::VerificationReport> v;
            for (std::size_t k = 0; k < states.size(); ++k) v.push_back(asym::verify(probs[k], states[k], et, gt));
            return v;
        };
        const auto v = gaps(e_half.E);
        std::vector<double> gap, mag;
        for (const auto& r : v) {
            gap.push_back(r.relative_gap);
            mag.push_back(r.magnetic);
            info(12, "kappa=" + f(r.kappa) + " regime=" + asym::to_string(r.regime.tag) + " indicator=" +
                         f(r.regime.indicator) + " E=" + f(r.E_computed) + " C0=" + f(r.C0_formula) + " bulk=" +
                         f(r.C0_bulk) + " gap=" + f(r.relative_gap) + " magnetic=" + f(r.magnetic));
        }
        const asym::Trend tr = asym::non_increasing(gap, tol::inversion);
        const bool mag_ok = asym::decreasing(mag);
        result(12, tr.ok && mag_ok,
               "gap {" + join(gap) + "} rises=" + std::to_string(tr.rises) + " worst=" + f(tr.worst_rise) +
                   "; magnetic {" + join(mag) + "} decreasing=" + (mag_ok ? "yes" : "no"));
        auto alt = [&](const std::string& label, double E) {
            std::vector<double> g;
            for (const auto& r : gaps(E)) g.push_back(r.relative_gap);
            info(12, label + " E(0.5)=" + f(E) + " gap {" + join(g) + "} trend=" +
                         (asym::non_increasing(g, tol::inversion).ok ? "ok" : "violated"));
        };
        for (const auto& p : table)
            if (p.L == sigma) alt("R={" + join(R_default) + "}", p.E);
        alt("1/R intercept R={" + join(R_large) + "}", e_half.E_inverse_R);
    });

    // 13. Determinism of CLI sweeps.
    guarded(13, [&] {
        const std::vector<std::string> sweeps{"sweep --kind domain --kappa 3,4 --sigma 0.5,1",
                                              "sweep --kind domain --kappa 3 --sigma 0.5 --mode full",
                                              "sweep --kind e1d --b 0.6,0.7", "sweep --kind cell --b 0.5,1.1 --r 2,4"};
        std::size_t same = 0;
        for (std::size_t k = 0; k < sweeps.size(); ++k) {
            std::string text[2];
            for (int run = 0; run < 2; ++run) {
                const fs::path out = work / ("sweep" + std::to_string(k) + "_" + std::to_string(run) + ".csv");
                const std::string cmd = "\"" + cli + "\" " + sweeps[k] + " --seed 7 --out \"" + out.string() + "\"";
                if (std::system(cmd.c_str()) != 0) throw SolverError("command failed: " + cmd);
                text[run] = io::read_text(out.string());
            }
            if (!text[0].empty() && text[0] == text[1]) ++same;
        }
        result(13, same == sweeps.size(),
               std::to_string(same) + "/" + std::to_string(sweeps.size()) + " sweeps byte-identical on rerun");
    });

    std::printf("\n");
    for (const auto& [n, r] : summary) std::printf("%2d %s\n", n, r.c_str());
    std::printf("SUMMARY: %d failed, total time %.1fs\n", failures, total.seconds());
    return failures == 0 ? 0 : 1;
}
