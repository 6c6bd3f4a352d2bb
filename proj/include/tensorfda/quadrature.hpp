#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tensorfda {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline constexpr std::size_t kMaxGaussPoints = 32;

/// Rule with `points` nodes, exact for polynomials of degree 2*points-1.
/// Rules are built once on first use; 1 <= points <= kMaxGaussPoints.
const GaussRule& gauss_legendre(std::size_t points);

/// Trapezoid weights for a sorted abscissa vector.
std::vector<double> trapezoid_weights(std::span<const double> xs);

}  // namespace tensorfda
