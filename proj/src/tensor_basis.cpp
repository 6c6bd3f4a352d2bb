#include "tensorfda/tensor_basis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "tensorfda/errors.hpp"
#include "tensorfda/quadrature.hpp"

namespace tensorfda {
namespace {

constexpr double kDomainSlack = 1e-12;

void check_grid(const GridSamples& f, const TensorBasisSpec& spec, const char* where) {
    if (f.axes.size() != spec.dims()) {
        throw DomainError(std::string(where) + ": sample grid has " + std::to_string(f.axes.size()) +
                          " axes, basis has " + std::to_string(spec.dims()));
    }
    if (f.values.size() != shape_size(f.shape())) {
        throw InputError(std::string(where) + ": sample value count does not match the grid");
    }
}

struct AxisQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre nodes on the merged knot and sample breakpoints.
AxisQuadrature axis_quadrature(const BasisSpec& spec, std::span<const double> xs) {
    const double a = spec.a();
    const double b = spec.b();
    const double slack = kDomainSlack * (b - a);
    std::vector<double> breaks(spec.knots().values().begin(), spec.knots().values().end());
    for (double x : xs) {
        if (x < a - slack || x > b + slack) {
            throw DomainError("tensor_l2_error: sample abscissa " + std::to_string(x) + " outside [" +
                              std::to_string(a) + ", " + std::to_string(b) + "]");
        }
        breaks.push_back(std::clamp(x, a, b));
    }
    std::sort(breaks.begin(), breaks.end());
    const double tiny = 1e-14 * (b - a);
    breaks.erase(std::unique(breaks.begin(), breaks.end(), [tiny](double l, double r) { return r - l <= tiny; }),
                 breaks.end());
    const GaussRule& rule = gauss_legendre(static_cast<std::size_t>(std::max(spec.degree(), 1)) + 1);
    AxisQuadrature q;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double mid = 0.5 * (breaks[p] + breaks[p + 1]);
        const double half = 0.5 * (breaks[p + 1] - breaks[p]);
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            q.nodes.push_back(mid + half * rule.nodes[g]);
            q.weights.push_back(half * rule.weights[g]);
        }
    }
    return q;
}

}  // namespace

std::size_t shape_size(const Shape& shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Shape GridSamples::shape() const {
    Shape s;
    for (const auto& ax : axes) s.push_back(ax.size());
    return s;
}

TensorBasisSpec::TensorBasisSpec(std::vector<OrthonormalBasis> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw InputError("TensorBasisSpec: need at least one axis");
    for (const auto& ax : axes_) shape_.push_back(ax.dimension());
}

TensorCoefficients::TensorCoefficients(TensorBasisSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
    if (values_.size() != spec_.dimension()) {
        throw InputError("TensorCoefficients: " + std::to_string(values_.size()) + " values for dimension " +
                         std::to_string(spec_.dimension()));
    }
    Shape shape = spec_.shape();
    bspline_ = values_;
    for (std::size_t j = 0; j < spec_.dims(); ++j) {
        bspline_ = mode_product(bspline_, shape, j, spec_.axis(j).change_of_basis());
    }
}

TensorCoefficients TensorCoefficients::zeros(TensorBasisSpec spec) {
    const std::size_t n = spec.dimension();
    return TensorCoefficients(std::move(spec), std::vector<double>(n, 0.0));
}

double TensorCoefficients::at(std::span<const std::size_t> index) const {
    const Shape& s = shape();
    if (index.size() != s.size()) throw DomainError("TensorCoefficients::at: wrong index arity");
    std::size_t flat = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (index[j] >= s[j]) throw DomainError("TensorCoefficients::at: index out of range");
        flat = flat * s[j] + index[j];
    }
    return values_[flat];
}

std::vector<double> mode_product(std::span<const double> data, Shape& shape, std::size_t axis,
                                 const Eigen::MatrixXd& m) {
    if (axis >= shape.size() || static_cast<std::size_t>(m.cols()) != shape[axis]) {
        throw InputError("mode_product: matrix does not match the contracted axis");
    }
    std::size_t outer = 1;
    for (std::size_t j = 0; j < axis; ++j) outer *= shape[j];
    std::size_t inner = 1;
    for (std::size_t j = axis + 1; j < shape.size(); ++j) inner *= shape[j];
    const auto n = static_cast<Eigen::Index>(shape[axis]);
    const auto r = m.rows();
    std::vector<double> out(outer * static_cast<std::size_t>(r) * inner);
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto in_stride = static_cast<std::size_t>(n) * inner;
    const auto out_stride = static_cast<std::size_t>(r) * inner;
    for (std::size_t o = 0; o < outer; ++o) {
        Eigen::Map<const RowMajor> slab(data.data() + o * in_stride, n, static_cast<Eigen::Index>(inner));
        Eigen::Map<RowMajor> dest(out.data() + o * out_stride, r, static_cast<Eigen::Index>(inner));
        dest.noalias() = m * slab;
    }
    shape[axis] = static_cast<std::size_t>(r);
    return out;
}

double tensor_evaluate(const TensorCoefficients& coeffs, std::span<const double> x) {
    const TensorBasisSpec& spec = coeffs.spec();
    const std::size_t d = spec.dims();
    if (x.size() != d) throw DomainError("tensor_evaluate: point has wrong dimension");
    std::vector<std::vector<double>> local(d);
    std::vector<std::ptrdiff_t> first(d);
    for (std::size_t j = 0; j < d; ++j) {
        const BasisSpec& bs = spec.axis(j).spec();
        const double slack = kDomainSlack * (bs.b() - bs.a());
        if (!(x[j] >= bs.a() - slack && x[j] <= bs.b() + slack)) {
            throw DomainError("tensor_evaluate: coordinate " + std::to_string(j) + " = " + std::to_string(x[j]) +
                              " outside the domain");
        }
        local[j].resize(static_cast<std::size_t>(bs.degree()) + 1);
        first[j] = bs.nonzero_values(std::clamp(x[j], bs.a(), bs.b()), local[j]);
    }
    const Shape& shape = spec.shape();
    const std::vector<double>& v = coeffs.bspline_values();
    std::vector<std::size_t> r(d, 0);
    double sum = 0.0;
    while (true) {
        double w = 1.0;
        std::size_t flat = 0;
        bool inside = true;
        for (std::size_t j = 0; j < d && inside; ++j) {
            const std::ptrdiff_t i = first[j] + static_cast<std::ptrdiff_t>(r[j]);
            if (i < 0 || i >= static_cast<std::ptrdiff_t>(shape[j])) {
                inside = false;
                break;
            }
            flat = flat * shape[j] + static_cast<std::size_t>(i);
            w *= local[j][r[j]];
        }
        if (inside) sum += w * v[flat];
        std::size_t j = d;
        while (j > 0) {
            --j;
            if (++r[j] < local[j].size()) break;
            r[j] = 0;
            if (j == 0) return sum;
        }
    }
}

std::vector<double> tensor_evaluate_grid(const TensorCoefficients& coeffs,
                                         const std::vector<std::vector<double>>& axes) {
    const TensorBasisSpec& spec = coeffs.spec();
    if (axes.size() != spec.dims()) throw DomainError("tensor_evaluate_grid: wrong number of axes");
    Shape shape = spec.shape();
    std::vector<double> out = coeffs.bspline_values();
    for (std::size_t j = 0; j < spec.dims(); ++j) {
        out = mode_product(out, shape, j, basis_matrix(spec.axis(j).spec(), axes[j]));
    }
    return out;
}

TensorProjector::TensorProjector(TensorBasisSpec spec, std::vector<std::vector<double>> axes)
    : spec_(std::move(spec)), axes_(std::move(axes)) {
    if (axes_.size() != spec_.dims()) throw DomainError("TensorProjector: axis count differs from the basis");
    for (std::size_t j = 0; j < axes_.size(); ++j) matrices_.push_back(projection_matrix(spec_.axis(j), axes_[j]));
}

std::vector<double> TensorProjector::apply(std::span<const double> values) const {
    Shape shape;
    for (const auto& ax : axes_) shape.push_back(ax.size());
    if (values.size() != shape_size(shape)) throw InputError("TensorProjector: value count does not match the grid");
    std::vector<double> alpha(values.begin(), values.end());
    for (std::size_t j = spec_.dims(); j-- > 0;) alpha = mode_product(alpha, shape, j, matrices_[j]);
    return alpha;
}

TensorCoefficients tensor_project(const GridSamples& f, const TensorBasisSpec& spec) {
    check_grid(f, spec, "tensor_project");
    return TensorCoefficients(spec, TensorProjector(spec, f.axes).apply(f.values));
}

TensorCoefficients tensor_project(const std::function<double(std::span<const double>)>& f,
                                  const TensorBasisSpec& spec) {
    std::vector<AxisQuadrature> quad;
    std::vector<Eigen::MatrixXd> matrices;
    Shape shape;
    for (const auto& ax : spec.axes()) {
        quad.push_back(axis_quadrature(ax.spec(), {}));
        const AxisQuadrature& q = quad.back();
        const Eigen::Map<const Eigen::VectorXd> w(q.weights.data(), static_cast<Eigen::Index>(q.weights.size()));
        matrices.push_back(ax.evaluation_matrix(q.nodes).transpose() * w.asDiagonal());
        shape.push_back(q.nodes.size());
    }
    std::vector<double> values;
    values.reserve(shape_size(shape));
    std::vector<std::size_t> idx(spec.dims(), 0);
    std::vector<double> x(spec.dims());
    for (std::size_t flat = 0; flat < shape_size(shape); ++flat) {
        for (std::size_t j = 0; j < spec.dims(); ++j) x[j] = quad[j].nodes[idx[j]];
        values.push_back(f(x));
        for (std::size_t j = spec.dims(); j-- > 0;) {
            if (++idx[j] < shape[j]) break;
            idx[j] = 0;
        }
    }
    for (std::size_t j = spec.dims(); j-- > 0;) values = mode_product(values, shape, j, matrices[j]);
    return TensorCoefficients(spec, std::move(values));
}

Eigen::MatrixXd interpolation_matrix(std::span<const double> xs, std::span<const double> at) {
    const std::size_t m = xs.size();
    if (m == 0) throw InputError("interpolation_matrix: no samples");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(at.size()), static_cast<Eigen::Index>(m));
    for (std::size_t q = 0; q < at.size(); ++q) {
        const auto row = static_cast<Eigen::Index>(q);
        const double x = at[q];
        if (x <= xs.front()) {
            out(row, 0) = 1.0;
        } else if (x >= xs.back()) {
            out(row, static_cast<Eigen::Index>(m - 1)) = 1.0;
        } else {
            const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
            const std::size_t lo = hi - 1;
            const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
            out(row, static_cast<Eigen::Index>(lo)) = 1.0 - t;
            out(row, static_cast<Eigen::Index>(hi)) = t;
        }
    }
    return out;
}

double tensor_l2_error(const GridSamples& f, const TensorCoefficients& coeffs) {
    const TensorBasisSpec& spec = coeffs.spec();
    check_grid(f, spec, "tensor_l2_error");
    const std::size_t d = spec.dims();
    std::vector<AxisQuadrature> quad;
    Shape fshape = f.shape();
    Shape cshape = spec.shape();
    std::vector<double> fv = f.values;
    std::vector<double> cv = coeffs.bspline_values();
    for (std::size_t j = 0; j < d; ++j) {
        const BasisSpec& bs = spec.axis(j).spec();
        quad.push_back(axis_quadrature(bs, f.axes[j]));
        fv = mode_product(fv, fshape, j, interpolation_matrix(f.axes[j], quad[j].nodes));
        cv = mode_product(cv, cshape, j, basis_matrix(bs, quad[j].nodes));
    }
    std::vector<std::size_t> idx(d, 0);
    double sum = 0.0;
    for (std::size_t flat = 0; flat < fv.size(); ++flat) {
        double w = 1.0;
        for (std::size_t j = 0; j < d; ++j) w *= quad[j].weights[idx[j]];
        const double r = fv[flat] - cv[flat];
        sum += w * r * r;
        for (std::size_t j = d; j-- > 0;) {
            if (++idx[j] < fshape[j]) break;
            idx[j] = 0;
        }
    }
    return std::sqrt(sum);
}

}  // namespace tensorfda
