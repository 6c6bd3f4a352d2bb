#pragma once

// Measure-driven embeddings of functional data. The state transform
// multiplies a sample by sqrt(g); the domain transform composes it with the
// inverse CDF (the Rosenblatt inverse in 2D) and resamples the result on a
// uniform grid of the unit interval or square.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tensorfda/density_model.hpp"
#include "tensorfda/geometry.hpp"

namespace tensorfda {

enum class DomainTag { original, state_transformed, domain_transformed };

/// Samples of one function on a sorted 1D abscissa vector or on the
/// product of two (values row-major, last axis fastest).
struct FunctionalSample {
    std::vector<std::vector<double>> axes;
    std::vector<double> values;
    Box domain;
    DomainTag tag = DomainTag::original;
    std::optional<std::string> density_id;

    [[nodiscard]] std::size_t dims() const noexcept { return axes.size(); }
    /// Checks sortedness, sizes and that the abscissae lie in the domain;
    /// throws InputError otherwise.
    void validate() const;
};

/// 1D sample with domain [xs.front(), xs.back()].
FunctionalSample make_sample(std::vector<double> xs, std::vector<double> ys);
/// 2D grid sample with domain spanned by the axes.
FunctionalSample make_sample_2d(std::vector<double> xs, std::vector<double> ys, std::vector<double> values);

FunctionalSample state_transform(const FunctionalSample& x, const DensityModel& g);

/// Divides by sqrt(g). Throws ConditioningError where g is below its floor.
FunctionalSample inverse_state_transform(const FunctionalSample& x, const DensityModel& g);

/// Interpolation stencil that evaluates an input grid at the preimages
/// G^{-1}(u) of a uniform output grid. Building it once lets many samples on
/// the same input grid share the inverse-CDF work.
struct DomainWarp {
    std::vector<std::vector<double>> input_axes;
    std::vector<std::vector<double>> output_axes;
    /// Per output point: the input cell (lower corner per axis) and the
    /// fractional offsets inside it.
    std::vector<std::size_t> cell_x;
    std::vector<std::size_t> cell_y;
    std::vector<double> tx;
    std::vector<double> ty;
};

/// Output grid has `resolution` points per axis (twice the input count per
/// axis when unset).
DomainWarp make_domain_warp(const CdfModel& cdf, const std::vector<std::vector<double>>& input_axes,
                            std::optional<std::size_t> resolution = std::nullopt);

FunctionalSample domain_transform(const FunctionalSample& x, const CdfModel& cdf,
                                  std::optional<std::size_t> resolution = std::nullopt);
FunctionalSample domain_transform(const FunctionalSample& x, const DomainWarp& warp);

/// Trapezoid rule of h k g on the union of the abscissae of h and the grid
/// nodes of g, with h and k interpolated linearly. Throws InputError on
/// domain mismatch.
double weighted_inner_product(const FunctionalSample& h, const FunctionalSample& k, const DensityModel& g);
/// Trapezoid rule of h k on the abscissae of h (k is interpolated when its
/// abscissae differ).
double l2_inner_product(const FunctionalSample& h, const FunctionalSample& k);

struct Equivalence {
    double weighted = 0.0;
    double state = 0.0;
    double domain = 0.0;

    [[nodiscard]] double max_discrepancy() const;
};

/// The g-weighted inner product and the plain inner products of the state-
/// and domain-transformed pair (1D). The domain transform resamples on
/// `resolution` points (the input count when unset).
Equivalence equivalence_check(const FunctionalSample& h, const FunctionalSample& k, const DensityModel& g,
                              std::optional<std::size_t> resolution = std::nullopt);

}  // namespace tensorfda
