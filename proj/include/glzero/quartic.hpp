#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace glzero {

/// Real roots of a x^3 + b x^2 + c x + d (any leading coefficient, including 0).
inline std::vector<double> real_roots_cubic(double a, double b, double c, double d) {
    std::vector<double> roots;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    if (scale == 0.0) return roots;
    if (std::abs(a) <= 1e-14 * scale) {
        if (std::abs(b) <= 1e-14 * scale) {
            if (c != 0.0) roots.push_back(-d / c);
            return roots;
        }
        const double disc = c * c - 4.0 * b * d;
        if (disc < 0.0) return roots;
        const double q = -0.5 * (c + std::copysign(std::sqrt(disc), c));
        if (q != 0.0) roots.push_back(q / b);
        if (q != 0.0) roots.push_back(d / q);
        else roots.push_back(0.0);
        return roots;
    }
    // Depressed cubic t^3 + p t + q with x = t - b/(3a).
    const double A = b / a, B = c / a, C = d / a;
    const double p = B - A * A / 3.0;
    const double q = 2.0 * A * A * A / 27.0 - A * B / 3.0 + C;
    const double shift = -A / 3.0;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-q / 2.0 + s);
        const double v = std::cbrt(-q / 2.0 - s);
        roots.push_back(u + v + shift);
    } else if (p == 0.0) {
        roots.push_back(shift);
    } else {
        const double r = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) roots.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift);
    }
    // Newton polish.
    for (double& x : roots) {
        for (int it = 0; it < 3; ++it) {
            const double f = ((a * x + b) * x + c) * x + d;
            const double fp = (3.0 * a * x + 2.0 * b) * x + c;
            if (fp == 0.0) break;
            const double nx = x - f / fp;
            if (!std::isfinite(nx)) break;
            x = nx;
        }
    }
    return roots;
}

/// Step s >= 0 minimizing q(s) = c1 s + c2 s^2 + c3 s^3 + c4 s^4 (c4 >= 0).
/// Returns 0 when no decrease is available along the ray.
inline double minimize_quartic_step(double c1, double c2, double c3, double c4) {
    auto q = [&](double s) { return s * (c1 + s * (c2 + s * (c3 + s * c4))); };
    double best = 0.0;
    double best_val = 0.0;
    for (double s : real_roots_cubic(4.0 * c4, 3.0 * c3, 2.0 * c2, c1)) {
        if (!(s > 0.0) || !std::isfinite(s)) continue;
        const double v = q(s);
        if (v < best_val) {
            best_val = v;
            best = s;
        }
    }
    return best;
}

} // namespace glzero
