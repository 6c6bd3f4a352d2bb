#pragma once

// One-dimensional B-spline spaces on simple knots and their orthonormal
// ("splinet") bases.
//
// A knot vector a = xi_0 < xi_1 < ... < xi_{n+1} = b carries n interior
// knots. With the default zero boundary the basis of degree k consists of
// the n - k + 1 B-splines whose support lies inside [a, b]; every element
// vanishes at a and b together with its first k - 1 derivatives. The free
// boundary additionally keeps the k B-splines on each side that straddle
// an endpoint (built on simple knots extrapolated beyond [a, b]), giving the
// full n + k + 1 dimensional spline space restricted to [a, b].
//
// Basis functions are indexed from 0.

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace tensorfda {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] double length() const noexcept { return hi - lo; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Strictly increasing knot abscissae. Knots closer than 1e-12 * (b - a)
/// are rejected with ConditioningError instead of being merged.
class KnotVector {
public:
    explicit KnotVector(std::vector<double> knots);

    /// `interior` equally spaced interior knots on [a, b].
    static KnotVector uniform(double a, double b, std::size_t interior);

    [[nodiscard]] std::span<const double> values() const noexcept { return knots_; }
    [[nodiscard]] std::size_t size() const noexcept { return knots_.size(); }
    [[nodiscard]] std::size_t interior_count() const noexcept { return knots_.size() - 2; }
    [[nodiscard]] double a() const noexcept { return knots_.front(); }
    [[nodiscard]] double b() const noexcept { return knots_.back(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return knots_[i]; }

    /// Index j of the knot interval [xi_j, xi_{j+1}) holding x; the last
    /// interval is closed. x must lie in [a, b].
    [[nodiscard]] std::size_t interval_of(double x) const;

    friend bool operator==(const KnotVector&, const KnotVector&) = default;

private:
    std::vector<double> knots_;
};

enum class Boundary { zero, free };

class BasisSpec {
public:
    BasisSpec(KnotVector knots, int degree, Boundary boundary = Boundary::zero);

    [[nodiscard]] const KnotVector& knots() const noexcept { return knots_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] Boundary boundary() const noexcept { return boundary_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] double a() const noexcept { return knots_.a(); }
    [[nodiscard]] double b() const noexcept { return knots_.b(); }

    /// Support of basis function `index`, clipped to [a, b].
    [[nodiscard]] Interval support(std::size_t index) const;

    /// Writes the degree + 1 B-spline values that can be nonzero at x into
    /// `out` and returns the basis index of out[0]. The index may be
    /// negative, and entries may refer to indices >= dimension(); callers
    /// skip those (they are not part of the basis).
    std::ptrdiff_t nonzero_values(double x, std::span<double> out) const;

    friend bool operator==(const BasisSpec& l, const BasisSpec& r) {
        return l.knots_ == r.knots_ && l.degree_ == r.degree_ && l.boundary_ == r.boundary_;
    }

private:
    KnotVector knots_;
    int degree_;
    Boundary boundary_;
    std::size_t dimension_;
    std::ptrdiff_t offset_;       // padded knot index of basis function 0
    std::vector<double> padded_;  // knots extended by `degree` virtual knots per side
};

/// Value of B-spline `index` at x (de Boor-Cox recursion).
/// Throws DomainError when index >= dimension or x is outside [a, b].
double bspline_evaluate(const BasisSpec& spec, std::size_t index, double x);

/// All basis values at x; at most degree + 1 entries are nonzero.
Eigen::VectorXd basis_evaluate_all(const BasisSpec& spec, double x);

/// Matrix of basis values, one row per abscissa.
Eigen::MatrixXd basis_matrix(const BasisSpec& spec, std::span<const double> xs);

/// Unweighted L2 Gram matrix of the B-spline basis on [a, b], by
/// Gauss-Legendre quadrature with degree + 1 nodes per knot interval.
Eigen::MatrixXd gram_matrix(const BasisSpec& spec);

enum class OrthoScheme { dyadic, cholesky };

/// Orthonormal basis OB_j = sum_i C(i, j) B_i, so that C^T G C = I for the
/// B-spline Gram matrix G. C maps orthonormal coefficients w to B-spline
/// coefficients v = C w.
class OrthonormalBasis {
public:
    OrthonormalBasis(BasisSpec spec, Eigen::MatrixXd change_of_basis, OrthoScheme scheme);

    [[nodiscard]] const BasisSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const Eigen::MatrixXd& change_of_basis() const noexcept { return change_; }
    [[nodiscard]] OrthoScheme scheme() const noexcept { return scheme_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return spec_.dimension(); }

    [[nodiscard]] double evaluate(std::size_t index, double x) const;
    [[nodiscard]] Eigen::VectorXd evaluate_all(double x) const;
    /// Rows are abscissae, columns orthonormal basis functions.
    [[nodiscard]] Eigen::MatrixXd evaluation_matrix(std::span<const double> xs) const;

    friend bool operator==(const OrthonormalBasis& l, const OrthonormalBasis& r) {
        return l.spec_ == r.spec_ && l.scheme_ == r.scheme_ && l.change_.rows() == r.change_.rows() &&
               l.change_.cols() == r.change_.cols() && l.change_ == r.change_;
    }

private:
    BasisSpec spec_;
    Eigen::MatrixXd change_;
    OrthoScheme scheme_;
};

/// Builds the orthonormal basis. The dyadic scheme groups the B-splines into
/// consecutive blocks of `degree` functions, assigns block p (1-based) to the
/// pyramid level given by the number of trailing zero bits of p, and
/// processes levels bottom-up: each level is orthogonalized against all
/// lower levels and then symmetrically (Loewdin) within itself. When a level
/// is numerically degenerate the Cholesky factorization of the Gram matrix
/// is used instead and recorded in scheme().
/// Throws ConditioningError when the Gram matrix is numerically singular.
OrthonormalBasis orthonormalize(const BasisSpec& spec, OrthoScheme scheme = OrthoScheme::dyadic);

enum class BasisKind { bspline, orthonormal };

/// A spline in either coefficient system. B-spline coefficients are kept
/// so evaluation only touches the degree + 1 local basis functions.
class Spline {
public:
    Spline(BasisSpec spec, Eigen::VectorXd bspline_coefficients);
    Spline(const OrthonormalBasis& basis, Eigen::VectorXd coefficients);

    [[nodiscard]] const BasisSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] BasisKind basis_kind() const noexcept { return kind_; }
    /// Coefficients in the system named by basis_kind().
    [[nodiscard]] const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] const Eigen::VectorXd& bspline_coefficients() const noexcept { return bspline_; }

    [[nodiscard]] double operator()(double x) const;

private:
    BasisSpec spec_;
    BasisKind kind_;
    Eigen::VectorXd coefficients_;
    Eigen::VectorXd bspline_;
};

/// Linear map from sample values at `abscissae` to orthonormal coefficients
/// alpha_i = <f, OB_i>, where f is the piecewise-linear interpolant of the
/// samples (held constant outside the sampled range). Integrals are exact:
/// Gauss-Legendre on the union of knot and sample breakpoints.
/// Throws DomainError for abscissae outside [a, b], InputError when they
/// are not strictly increasing and RankError when fewer than dimension().
Eigen::MatrixXd projection_matrix(const OrthonormalBasis& basis, std::span<const double> abscissae);

/// Orthogonal projection of the piecewise-linear interpolant of (xs, ys).
Spline project_1d(std::span<const double> xs, std::span<const double> ys,
                  const OrthonormalBasis& basis);

/// Piecewise-linear interpolation of (xs, ys) at x, constant outside.
double interpolate_linear(std::span<const double> xs, std::span<const double> ys, double x);

}  // namespace tensorfda
