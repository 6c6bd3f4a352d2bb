#pragma once

// Tensor products of one-dimensional orthonormal spline bases over a lattice
// of knots, and projection of gridded samples onto them.
//
// Multi-way arrays are stored flat in row-major order: the last axis varies
// fastest.

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tensorfda/spline_core.hpp"

namespace tensorfda {

using Shape = std::vector<std::size_t>;

[[nodiscard]] std::size_t shape_size(const Shape& shape) noexcept;

class TensorBasisSpec {
public:
    explicit TensorBasisSpec(std::vector<OrthonormalBasis> axes);

    [[nodiscard]] std::size_t dims() const noexcept { return axes_.size(); }
    [[nodiscard]] const std::vector<OrthonormalBasis>& axes() const noexcept { return axes_; }
    [[nodiscard]] const OrthonormalBasis& axis(std::size_t j) const { return axes_.at(j); }
    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return shape_size(shape_); }

    friend bool operator==(const TensorBasisSpec& l, const TensorBasisSpec& r) { return l.axes_ == r.axes_; }

private:
    std::vector<OrthonormalBasis> axes_;
    Shape shape_;
};

/// Coefficients alpha with respect to the orthonormal tensor basis. The
/// matching B-spline tensor coefficients are computed once on construction.
class TensorCoefficients {
public:
    TensorCoefficients(TensorBasisSpec spec, std::vector<double> values);

    static TensorCoefficients zeros(TensorBasisSpec spec);

    [[nodiscard]] const TensorBasisSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const Shape& shape() const noexcept { return spec_.shape(); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<double>& bspline_values() const noexcept { return bspline_; }
    [[nodiscard]] double at(std::span<const std::size_t> index) const;

private:
    TensorBasisSpec spec_;
    std::vector<double> values_;
    std::vector<double> bspline_;
};

/// Samples on the Cartesian product of per-axis abscissae; `values` is
/// row-major over that product.
struct GridSamples {
    std::vector<std::vector<double>> axes;
    std::vector<double> values;

    [[nodiscard]] Shape shape() const;
};

/// Multiplies `data` (of `shape`) along `axis` by matrix m, whose column
/// count must equal shape[axis]. On return shape[axis] == m.rows().
std::vector<double> mode_product(std::span<const double> data, Shape& shape, std::size_t axis,
                                 const Eigen::MatrixXd& m);

/// Value of the expansion at x. Throws DomainError outside the cube.
double tensor_evaluate(const TensorCoefficients& coeffs, std::span<const double> x);

/// Values on the product grid of `axes` (row-major).
std::vector<double> tensor_evaluate_grid(const TensorCoefficients& coeffs,
                                         const std::vector<std::vector<double>>& axes);

/// Coefficients of the multilinear interpolant of the samples, computed by
/// contracting one axis at a time with the 1D projection matrices.
/// Throws RankError when an axis has fewer samples than its basis dimension.
TensorCoefficients tensor_project(const GridSamples& f, const TensorBasisSpec& spec);

/// Coefficients of a function given pointwise, by Gauss-Legendre with
/// degree + 1 nodes per knot interval on every axis. Exact (to round-off)
/// for members of the tensor space.
TensorCoefficients tensor_project(const std::function<double(std::span<const double>)>& f,
                                  const TensorBasisSpec& spec);

/// Per-axis projection matrices for one sample grid, reusable across many
/// samples on that grid.
class TensorProjector {
public:
    TensorProjector(TensorBasisSpec spec, std::vector<std::vector<double>> axes);

    [[nodiscard]] const TensorBasisSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const std::vector<std::vector<double>>& axes() const noexcept { return axes_; }
    /// Orthonormal coefficients of the samples `values` (row-major over axes()).
    [[nodiscard]] std::vector<double> apply(std::span<const double> values) const;

private:
    TensorBasisSpec spec_;
    std::vector<std::vector<double>> axes_;
    std::vector<Eigen::MatrixXd> matrices_;
};

/// L2 norm over the cube of (multilinear interpolant of f) - expansion,
/// integrated exactly by Gauss-Legendre on the merged knot and sample
/// breakpoints of each axis. Throws DomainError when the sample grid leaves
/// the cube or its dimensionality differs.
double tensor_l2_error(const GridSamples& f, const TensorCoefficients& coeffs);

/// Linear-interpolation matrix: row q holds the weights of the samples at
/// `xs` that reproduce the piecewise-linear interpolant at `at[q]`.
Eigen::MatrixXd interpolation_matrix(std::span<const double> xs, std::span<const double> at);

}  // namespace tensorfda
