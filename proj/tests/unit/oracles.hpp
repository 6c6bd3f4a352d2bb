#pragma once

// Reference computations used only by the tests. They deliberately avoid the
// library's evaluation paths: B-splines come from the textbook recursive
// definition and integrals from dense composite rules.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// Recursive Cox-de Boor on an explicit knot list; half-open intervals
/// except that the final knot closes the last interval.
inline double cox_de_boor(const std::vector<double>& t, std::size_t i, int k, double x) {
    if (k == 0) {
        if (t[i] <= x && x < t[i + 1]) return 1.0;
        if (x == t.back() && t[i + 1] == t.back() && t[i] < t[i + 1]) return 1.0;
        return 0.0;
    }
    double out = 0.0;
    const double d1 = t[i + static_cast<std::size_t>(k)] - t[i];
    const double d2 = t[i + static_cast<std::size_t>(k) + 1] - t[i + 1];
    if (d1 > 0) out += (x - t[i]) / d1 * cox_de_boor(t, i, k - 1, x);
    if (d2 > 0) out += (t[i + static_cast<std::size_t>(k) + 1] - x) / d2 * cox_de_boor(t, i + 1, k - 1, x);
    return out;
}

/// Zero-boundary basis function `index` of degree k on knots, 0-based.
inline double zero_boundary_bspline(const std::vector<double>& knots, std::size_t index, int k, double x) {
    return cox_de_boor(knots, index, k, x);
}

/// Composite Simpson rule with `panels` (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels) {
    if (panels % 2 == 1) ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    double sum = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i) {
        sum += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

/// Composite Simpson applied separately on every knot interval, which is
/// exact up to round-off for piecewise cubics and accurate for smooth pieces.
inline double piecewise_simpson(const std::function<double(double)>& f, const std::vector<double>& breaks,
                                std::size_t panels_per_piece) {
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
        // Evaluate slightly inside so one-sided limits are used at breaks.
        const double lo = breaks[j];
        const double hi = breaks[j + 1];
        const double eps = 1e-13 * (hi - lo);
        auto inner = [&](double x) { return f(std::clamp(x, lo + eps, hi - eps)); };
        sum += simpson(inner, lo, hi, panels_per_piece);
    }
    return sum;
}

/// Romberg integration with `levels` rows; exact for polynomials of
/// degree <= 2 * levels - 1 up to round-off.
inline double romberg(const std::function<double(double)>& f, double a, double b, int levels) {
    std::vector<std::vector<double>> r(static_cast<std::size_t>(levels));
    double h = b - a;
    r[0].push_back(0.5 * h * (f(a) + f(b)));
    for (std::size_t i = 1; i < r.size(); ++i) {
        h *= 0.5;
        double mid = 0.0;
        const std::size_t count = std::size_t{1} << (i - 1);
        for (std::size_t j = 0; j < count; ++j) mid += f(a + h * static_cast<double>(2 * j + 1));
        r[i].push_back(0.5 * r[i - 1][0] + h * mid);
        double scale = 4.0;
        for (std::size_t m = 1; m <= i; ++m, scale *= 4.0) {
            r[i].push_back(r[i][m - 1] + (r[i][m - 1] - r[i - 1][m - 1]) / (scale - 1.0));
        }
    }
    return r.back().back();
}

/// Romberg on every piece between consecutive breaks.
inline double piecewise_romberg(const std::function<double(double)>& f, const std::vector<double>& breaks,
                                int levels) {
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
        const double lo = breaks[j];
        const double hi = breaks[j + 1];
        const double eps = 1e-13 * (hi - lo);
        auto inner = [&](double x) { return f(std::clamp(x, lo + eps, hi - eps)); };
        sum += romberg(inner, lo, hi, levels);
    }
    return sum;
}

/// Nodes and weights of the Romberg rule on [lo, hi]; obtained by applying
/// the scheme to each nodal indicator, which is valid since it is linear.
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline Rule romberg_rule(double lo, double hi, int levels) {
    const std::size_t n = (std::size_t{1} << (levels - 1)) + 1;
    Rule rule;
    rule.nodes = std::vector<double>(n);
    for (std::size_t i = 0; i < n; ++i) rule.nodes[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = rule.nodes[i];
        const double tol = 1e-9 * (hi - lo);
        rule.weights.push_back(romberg([&](double x) { return std::abs(x - xi) < tol ? 1.0 : 0.0; }, lo, hi, levels));
    }
    return rule;
}

/// Integral over a rectangle tiled by the product of two break lists, with
/// a tensor Romberg rule on each tile.
inline double integrate_2d(const std::function<double(double, double)>& f, const std::vector<double>& xb,
                           const std::vector<double>& yb, int levels) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < xb.size(); ++i) {
        const Rule rx = romberg_rule(xb[i], xb[i + 1], levels);
        const double ex = 1e-13 * (xb[i + 1] - xb[i]);
        for (std::size_t j = 0; j + 1 < yb.size(); ++j) {
            const Rule ry = romberg_rule(yb[j], yb[j + 1], levels);
            const double ey = 1e-13 * (yb[j + 1] - yb[j]);
            for (std::size_t p = 0; p < rx.nodes.size(); ++p) {
                const double x = std::clamp(rx.nodes[p], xb[i] + ex, xb[i + 1] - ex);
                for (std::size_t q = 0; q < ry.nodes.size(); ++q) {
                    const double y = std::clamp(ry.nodes[q], yb[j] + ey, yb[j + 1] - ey);
                    sum += rx.weights[p] * ry.weights[q] * f(x, y);
                }
            }
        }
    }
    return sum;
}

/// Piecewise-linear interpolation, constant beyond the end samples.
inline double lerp_samples(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto j = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[j]) / (xs[j + 1] - xs[j]);
    return ys[j] + t * (ys[j + 1] - ys[j]);
}

inline std::vector<double> merged_breaks(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    out.back() = b;
    return out;
}

/// Random strictly increasing knots on [a, b] with gaps bounded away from 0.
inline std::vector<double> random_knots(std::mt19937_64& rng, double a, double b, std::size_t interior) {
    std::uniform_real_distribution<double> gap(0.3, 1.7);
    std::vector<double> cuts(interior + 1);
    double total = 0.0;
    for (auto& c : cuts) total += (c = gap(rng));
    std::vector<double> knots(interior + 2);
    knots[0] = a;
    double acc = 0.0;
    for (std::size_t i = 0; i < interior; ++i) {
        acc += cuts[i];
        knots[i + 1] = a + (b - a) * acc / total;
    }
    knots.back() = b;
    return knots;
}

}  // namespace oracle
