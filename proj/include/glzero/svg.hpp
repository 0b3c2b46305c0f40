#pragma once

// Minimal SVG line/scatter plots. Output is a pure function of the input.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "glzero/error.hpp"

namespace glzero::svg {

struct Series {
    std::vector<double> x, y;
    std::string label;
    bool line = true;
    std::string color = "#1f77b4";
    std::vector<double> err;  ///< optional symmetric error bars
};

struct Guide {
    double at = 0.0;
    std::string label;
};

struct Plot {
    std::string title, xlabel, ylabel;
    bool log_y = false;
    std::vector<Series> series;
    std::vector<Guide> vlines, hlines;
};

namespace detail {

inline std::string fmt(double v, int prec = 4) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

inline std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Round tick positions covering [lo, hi].
inline std::vector<double> ticks(double lo, double hi, int target = 5) {
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return t;
}

} // namespace detail

inline std::string render(const Plot& p) {
    const double W = 640, H = 420, ml = 80, mr = 20, mt = 48, mb = 60;
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    auto ty = [&](double y) { return p.log_y ? std::log10(y) : y; };
    for (const auto& s : p.series)
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (p.log_y && s.y[k] <= 0.0)) continue;
            xlo = std::min(xlo, s.x[k]);
            xhi = std::max(xhi, s.x[k]);
            ylo = std::min(ylo, ty(s.y[k]));
            yhi = std::max(yhi, ty(s.y[k]));
            if (!p.log_y && k < s.err.size() && std::isfinite(s.err[k]))
                ylo = std::min(ylo, s.y[k] - s.err[k]), yhi = std::max(yhi, s.y[k] + s.err[k]);
        }
    require(std::isfinite(xlo), "plot: no finite data");
    for (const auto& g : p.vlines) xlo = std::min(xlo, g.at), xhi = std::max(xhi, g.at);
    for (const auto& g : p.hlines)
        if (!p.log_y || g.at > 0.0) ylo = std::min(ylo, ty(g.at)), yhi = std::max(yhi, ty(g.at));
    if (xhi == xlo) xlo -= 0.5, xhi += 0.5;
    if (yhi == ylo) ylo -= 0.5, yhi += 0.5;
    const double padx = 0.04 * (xhi - xlo), pady = 0.06 * (yhi - ylo);
    xlo -= padx, xhi += padx, ylo -= pady, yhi += pady;
    auto X = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * (W - ml - mr); };
    auto Y = [&](double y) { return H - mb - (ty(y) - ylo) / (yhi - ylo) * (H - mt - mb); };
    auto Yt = [&](double t) { return H - mb - (t - ylo) / (yhi - ylo) * (H - mt - mb); };
    using detail::fmt;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' '
      << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << detail::esc(p.title) << "</text>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : detail::ticks(xlo, xhi)) {
        o << "<line x1=\"" << fmt(X(t), 6) << "\" y1=\"" << H - mb << "\" x2=\"" << fmt(X(t), 6) << "\" y2=\"" << H - mb + 5
          << "\" stroke=\"black\"/>";
        o << "<text x=\"" << fmt(X(t), 6) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    }
    for (double t : detail::ticks(ylo, yhi)) {
        o << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt(Yt(t), 6) << "\" x2=\"" << ml << "\" y2=\"" << fmt(Yt(t), 6)
          << "\" stroke=\"black\"/>";
        o << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(Yt(t) + 4, 6) << "\" text-anchor=\"end\">"
          << (p.log_y ? "1e" + fmt(t, 3) : fmt(t)) << "</text>\n";
    }
    o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << detail::esc(p.xlabel)
      << "</text>\n";
    o << "<text transform=\"translate(18," << (mt + H - mb) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << detail::esc(p.ylabel) << "</text>\n";
    for (const auto& g : p.vlines) {
        o << "<line x1=\"" << fmt(X(g.at), 6) << "\" y1=\"" << mt << "\" x2=\"" << fmt(X(g.at), 6) << "\" y2=\"" << H - mb
          << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>";
        const bool right = X(g.at) > 0.6 * W;
        o << "<text x=\"" << fmt(X(g.at) + (right ? -4 : 4), 6) << "\" y=\"" << mt + 14 << "\""
          << (right ? " text-anchor=\"end\"" : "") << " fill=\"gray\">" << detail::esc(g.label) << "</text>\n";
    }
    for (const auto& g : p.hlines) {
        if (p.log_y && g.at <= 0.0) continue;
        o << "<line x1=\"" << ml << "\" y1=\"" << fmt(Y(g.at), 6) << "\" x2=\"" << W - mr << "\" y2=\"" << fmt(Y(g.at), 6)
          << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>";
        o << "<text x=\"" << ml + 4 << "\" y=\"" << fmt(Y(g.at) - 4, 6) << "\" fill=\"gray\">" << detail::esc(g.label)
          << "</text>\n";
    }
    double lx = ml;
    for (const auto& s : p.series) {
        std::string pts;
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (p.log_y && s.y[k] <= 0.0)) continue;
            pts += fmt(X(s.x[k]), 6) + "," + fmt(Y(s.y[k]), 6) + " ";
            if (!p.log_y && k < s.err.size() && std::isfinite(s.err[k]) && s.err[k] > 0.0)
                o << "<line x1=\"" << fmt(X(s.x[k]), 6) << "\" y1=\"" << fmt(Y(s.y[k] - s.err[k]), 6) << "\" x2=\""
                  << fmt(X(s.x[k]), 6) << "\" y2=\"" << fmt(Y(s.y[k] + s.err[k]), 6) << "\" stroke=\"" << s.color << "\"/>\n";
            o << "<circle cx=\"" << fmt(X(s.x[k]), 6) << "\" cy=\"" << fmt(Y(s.y[k]), 6) << "\" r=\"3\" fill=\"" << s.color
              << "\"/>\n";
        }
        if (s.line && !pts.empty())
            o << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"/>\n";
        if (!s.label.empty()) {
            o << "<text x=\"" << lx << "\" y=\"" << mt - 8 << "\" fill=\"" << s.color << "\">" << detail::esc(s.label)
              << "</text>\n";
            lx += 7.0 * s.label.size() + 24;
        }
    }
    o << "</svg>\n";
    return o.str();
}

} // namespace glzero::svg
