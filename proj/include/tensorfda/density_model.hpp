#pragma once

// Knot intensity g on a 1D interval or 2D rectangle, its CDF G, the inverse
// of G and the Rosenblatt map that sends g to the uniform law on [0, 1]^2.
//
// g is stored at the nodes of a uniform grid that includes the domain
// boundary and is piecewise linear (bilinear in 2D) between nodes, so the
// trapezoid rule on the stored grid is its exact integral.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tensorfda/geometry.hpp"
#include "tensorfda/knot_selection.hpp"

namespace tensorfda {

class TensorBasisSpec;

constexpr std::size_t kDefaultDensityResolution1d = 256;
constexpr std::size_t kDefaultDensityResolution2d = 128;
/// Default floor as a fraction of the uniform height 1 / volume.
constexpr double kDefaultFloorFraction = 1e-8;

class DensityModel {
public:
    /// Normalizes `values` (row-major over `nodes` per axis) after clipping
    /// at `floor`. Throws InputError for a degenerate domain or non-finite
    /// or negative values, ConfigError when floor * volume >= 1.
    DensityModel(Box domain, std::vector<std::size_t> nodes, std::vector<double> values, double floor,
                 std::vector<double> bandwidth = {});

    /// Rebuilds a model from stored, already normalized values without
    /// touching them (archive loading). Throws FormatError when the values
    /// are inconsistent or integrate to 1 only outside a 1e-9 tolerance.
    static DensityModel restore(Box domain, std::vector<std::size_t> nodes, std::vector<double> values, double floor,
                                std::vector<double> bandwidth);

    [[nodiscard]] std::size_t dims() const noexcept { return domain_.dims(); }
    [[nodiscard]] const Box& domain() const noexcept { return domain_; }
    [[nodiscard]] const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<double>& bandwidth() const noexcept { return bandwidth_; }
    [[nodiscard]] double floor() const noexcept { return floor_; }
    [[nodiscard]] double spacing(std::size_t axis) const;
    [[nodiscard]] double node(std::size_t axis, std::size_t i) const;
    [[nodiscard]] std::vector<double> axis_nodes(std::size_t axis) const;

    /// Interpolated g(x); DomainError outside the domain.
    [[nodiscard]] double evaluate(std::span<const double> x) const;
    /// Trapezoid integral over the stored grid.
    [[nodiscard]] double integral() const;
    /// Smallest box holding every node where g > threshold (the whole
    /// domain if there is none).
    [[nodiscard]] Box support_box(double threshold) const;

    friend bool operator==(const DensityModel&, const DensityModel&) = default;

private:
    DensityModel() = default;

    Box domain_;
    std::vector<std::size_t> nodes_;
    std::vector<double> values_;
    std::vector<double> bandwidth_;
    double floor_ = 0.0;
};

struct DensityOptions {
    /// Per-axis bandwidth (one value applies to every axis); Silverman when empty.
    std::vector<double> bandwidth;
    /// Absolute floor; kDefaultFloorFraction / volume when unset.
    std::optional<double> floor;
    /// Nodes per axis; the 1D or 2D default when 0.
    std::size_t resolution = 0;
};

/// Silverman's rule per axis: 0.9 min(sd, IQR / 1.34) n^(-1/5) in 1D and
/// sd n^(-1/6) in 2D. An axis with no spread falls back to one grid cell.
std::vector<double> silverman_bandwidth(const PointSet& points, std::size_t resolution, const Box& domain);

/// Gaussian kernel estimate on the domain grid. Each node carries the kernel
/// mass of its dual cell, which keeps the estimate normalizable for any
/// bandwidth; mass outside the domain is dropped and the result is floored
/// and renormalized. Throws InputError for fewer than 2 points or a
/// zero-area domain.
DensityModel estimate_density(const KnotCandidateSet& knots, const DensityOptions& options = {});

/// Fraction of knot points <= query in every coordinate.
double empirical_cdf(const KnotCandidateSet& knots, std::span<const double> query);

/// Projects the density onto a tensor spline basis over its domain and
/// re-evaluates it on the same grid; the result is floored and renormalized.
DensityModel smooth_density(const DensityModel& g, const TensorBasisSpec& basis);

class CdfModel {
public:
    explicit CdfModel(const DensityModel& g);

    [[nodiscard]] std::size_t dims() const noexcept { return density_.dims(); }
    [[nodiscard]] const DensityModel& density() const noexcept { return density_; }

    /// G(x) in 1D; the joint G(x, y) = integral over [a, x] x [c, y] in 2D.
    [[nodiscard]] double value(std::span<const double> x) const;
    /// Marginal CDF of the first coordinate.
    [[nodiscard]] double marginal(double x) const;
    /// F_{2|1}(y | x), 2D only.
    [[nodiscard]] double conditional(double y, double x) const;
    [[nodiscard]] double inverse_marginal(double u) const;
    [[nodiscard]] double inverse_conditional(double u, double x) const;

    /// Marginal CDF at the axis-0 nodes.
    [[nodiscard]] const std::vector<double>& marginal_table() const noexcept { return marginal_cdf_; }

private:
    [[nodiscard]] std::span<const double> row(std::size_t q) const;
    [[nodiscard]] std::span<const double> row_cumulative(std::size_t q) const;

    DensityModel density_;
    std::vector<double> values_;            // g rescaled to unit mass
    std::vector<double> marginal_density_;  // g in 1D, integral over y in 2D
    std::vector<double> marginal_cdf_;
    std::vector<double> row_cumulative_;  // 2D: H_q(y_r) = integral_c^{y_r} g(x_q, v) dv
};

CdfModel cdf_from_density(const DensityModel& g);

/// G^{-1}(u) for d = 1; on flat stretches the left end of the preimage.
double inverse_cdf(const CdfModel& cdf, double u);

/// (F_1(x), F_{2|1}(y | x)).
std::vector<double> uniformize_2d(const CdfModel& cdf, std::span<const double> p);
/// Inverse of uniformize_2d.
std::vector<double> inverse_uniformize_2d(const CdfModel& cdf, std::span<const double> u);

}  // namespace tensorfda
