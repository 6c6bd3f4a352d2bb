#include "tensorfda/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "tensorfda/errors.hpp"

namespace tensorfda {
namespace {

// Returns (P_n(x), P_n'(x)).
std::pair<double, double> legendre(std::size_t n, double x) {
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

GaussRule build_rule(std::size_t n) {
    GaussRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    if (n == 1) {
        rule.weights[0] = 2.0;
        return rule;
    }
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(std::size_t points) {
    static const std::array<GaussRule, kMaxGaussPoints + 1> rules = [] {
        std::array<GaussRule, kMaxGaussPoints + 1> out;
        for (std::size_t n = 1; n <= kMaxGaussPoints; ++n) out[n] = build_rule(n);
        return out;
    }();
    if (points == 0 || points > kMaxGaussPoints) {
        throw InputError("gauss_legendre: unsupported point count " + std::to_string(points));
    }
    return rules[points];
}

std::vector<double> trapezoid_weights(std::span<const double> xs) {
    std::vector<double> w(xs.size(), 0.0);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double h = 0.5 * (xs[i + 1] - xs[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

}  // namespace tensorfda
