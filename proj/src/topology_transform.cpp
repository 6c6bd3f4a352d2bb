#include "tensorfda/topology_transform.hpp"

#include <algorithm>
#include <cmath>

#include "tensorfda/errors.hpp"
#include "tensorfda/quadrature.hpp"

namespace tensorfda {
namespace {

constexpr double kDomainTolerance = 1e-9;

std::vector<double> uniform_grid(std::size_t n) {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    if (n > 1) u.back() = 1.0;
    return u;
}

void require_same_domain(const Box& a, const Box& b, const char* where) {
    bool same = a.dims() == b.dims();
    for (std::size_t j = 0; same && j < a.dims(); ++j) {
        const double tol = kDomainTolerance * std::max(a.width(j), b.width(j));
        same = std::abs(a.lo[j] - b.lo[j]) <= tol && std::abs(a.hi[j] - b.hi[j]) <= tol;
    }
    if (!same) throw InputError(std::string(where) + ": sample and density domains differ");
}

// Linear stencil of x on a sorted axis: (left index, weight of right node).
std::pair<std::size_t, double> stencil(const std::vector<double>& xs, double x) {
    if (xs.size() == 1 || x <= xs.front()) return {0, 0.0};
    if (x >= xs.back()) return {xs.size() - 2, 1.0};
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    const std::size_t lo = hi - 1;
    return {lo, (x - xs[lo]) / (xs[hi] - xs[lo])};
}

double lerp(double a, double b, double t) { return a + t * (b - a); }

// Interpolation in a cell; written as a + t (b - a) so constants are exact.
double cell_value(const FunctionalSample& s, std::size_t i, double t, std::size_t k, double u) {
    const std::size_t i1 = std::min(i + 1, s.axes[0].size() - 1);
    const auto& v = s.values;
    if (s.dims() == 1) return lerp(v[i], v[i1], t);
    const std::size_t ny = s.axes[1].size();
    const std::size_t k1 = std::min(k + 1, ny - 1);
    return lerp(lerp(v[i * ny + k], v[i * ny + k1], u), lerp(v[i1 * ny + k], v[i1 * ny + k1], u), t);
}

double interpolate(const FunctionalSample& s, std::span<const double> p) {
    const auto [i, t] = stencil(s.axes[0], p[0]);
    if (s.dims() == 1) return cell_value(s, i, t, 0, 0.0);
    const auto [k, u] = stencil(s.axes[1], p[1]);
    return cell_value(s, i, t, k, u);
}

// Flat index -> point of a sample grid.
void point_of(const FunctionalSample& s, std::size_t flat, double* p) {
    p[1] = 0.0;
    if (s.dims() == 1) {
        p[0] = s.axes[0][flat];
    } else {
        const std::size_t ny = s.axes[1].size();
        p[0] = s.axes[0][flat / ny];
        p[1] = s.axes[1][flat % ny];
    }
}

std::vector<double> grid_weights(const std::vector<std::vector<double>>& axes) {
    std::vector<double> w = trapezoid_weights(axes[0]);
    if (axes.size() == 1) return w;
    const std::vector<double> wy = trapezoid_weights(axes[1]);
    std::vector<double> out;
    out.reserve(w.size() * wy.size());
    for (double a : w) {
        for (double b : wy) out.push_back(a * b);
    }
    return out;
}

// Values of k on the grid of h.
std::vector<double> values_on(const FunctionalSample& k, const FunctionalSample& h) {
    if (k.axes == h.axes) return k.values;
    std::vector<double> out(h.values.size());
    double p[2];
    for (std::size_t f = 0; f < out.size(); ++f) {
        point_of(h, f, p);
        out[f] = interpolate(k, std::span<const double>(p, h.dims()));
    }
    return out;
}

}  // namespace

void FunctionalSample::validate() const {
    if (axes.empty() || axes.size() > 2) throw InputError("FunctionalSample: only 1D and 2D samples are supported");
    if (domain.dims() != axes.size()) throw InputError("FunctionalSample: domain dimension mismatch");
    std::size_t total = 1;
    for (std::size_t j = 0; j < axes.size(); ++j) {
        const auto& ax = axes[j];
        if (ax.empty()) throw InputError("FunctionalSample: empty axis");
        for (std::size_t i = 1; i < ax.size(); ++i) {
            if (!(ax[i] > ax[i - 1])) throw InputError("FunctionalSample: abscissae must be strictly increasing");
        }
        const double tol = kDomainTolerance * domain.width(j);
        if (ax.front() < domain.lo[j] - tol || ax.back() > domain.hi[j] + tol) {
            throw InputError("FunctionalSample: abscissae outside the declared domain");
        }
        total *= ax.size();
    }
    if (values.size() != total) throw InputError("FunctionalSample: value count does not match the abscissae");
}

FunctionalSample make_sample(std::vector<double> xs, std::vector<double> ys) {
    if (xs.empty()) throw InputError("make_sample: no abscissae");
    FunctionalSample s;
    s.domain = Box{{xs.front()}, {xs.back()}};
    s.axes = {std::move(xs)};
    s.values = std::move(ys);
    s.validate();
    return s;
}

FunctionalSample make_sample_2d(std::vector<double> xs, std::vector<double> ys, std::vector<double> values) {
    if (xs.empty() || ys.empty()) throw InputError("make_sample_2d: no abscissae");
    FunctionalSample s;
    s.domain = Box{{xs.front(), ys.front()}, {xs.back(), ys.back()}};
    s.axes = {std::move(xs), std::move(ys)};
    s.values = std::move(values);
    s.validate();
    return s;
}

FunctionalSample state_transform(const FunctionalSample& x, const DensityModel& g) {
    x.validate();
    require_same_domain(x.domain, g.domain(), "state_transform");
    if (x.tag != DomainTag::original) throw InputError("state_transform: sample is already transformed");
    FunctionalSample out = x;
    double p[2];
    for (std::size_t f = 0; f < out.values.size(); ++f) {
        point_of(x, f, p);
        out.values[f] *= std::sqrt(g.evaluate(std::span<const double>(p, x.dims())));
    }
    out.tag = DomainTag::state_transformed;
    return out;
}

FunctionalSample inverse_state_transform(const FunctionalSample& x, const DensityModel& g) {
    x.validate();
    require_same_domain(x.domain, g.domain(), "inverse_state_transform");
    if (x.tag != DomainTag::state_transformed) {
        throw InputError("inverse_state_transform: sample is not state-transformed");
    }
    FunctionalSample out = x;
    double p[2];
    for (std::size_t f = 0; f < out.values.size(); ++f) {
        point_of(x, f, p);
        const double gv = g.evaluate(std::span<const double>(p, x.dims()));
        if (!(gv > 0.0) || gv < g.floor() * (1.0 - 1e-12)) {
            throw ConditioningError("inverse_state_transform: density below its floor");
        }
        out.values[f] /= std::sqrt(gv);
    }
    out.tag = DomainTag::original;
    return out;
}

DomainWarp make_domain_warp(const CdfModel& cdf, const std::vector<std::vector<double>>& input_axes,
                            std::optional<std::size_t> resolution) {
    const std::size_t d = cdf.dims();
    if (input_axes.size() != d) throw InputError("make_domain_warp: grid and density dimensions differ");
    DomainWarp w;
    w.input_axes = input_axes;
    for (std::size_t j = 0; j < d; ++j) {
        if (input_axes[j].size() < 2) throw InputError("make_domain_warp: need at least two abscissae per axis");
        const std::size_t m = resolution ? *resolution : 2 * input_axes[j].size();
        if (m < 2) throw ConfigError("make_domain_warp: resolution must be at least 2");
        w.output_axes.push_back(uniform_grid(m));
    }
    const auto& xs = input_axes[0];
    if (d == 1) {
        for (double u : w.output_axes[0]) {
            const auto [i, t] = stencil(xs, inverse_cdf(cdf, u));
            w.cell_x.push_back(i);
            w.tx.push_back(t);
        }
        return w;
    }
    const auto& ys = input_axes[1];
    for (double u0 : w.output_axes[0]) {
        for (double u1 : w.output_axes[1]) {
            const double u[2] = {u0, u1};
            const auto p = inverse_uniformize_2d(cdf, u);
            const auto [i, t] = stencil(xs, p[0]);
            const auto [k, s] = stencil(ys, p[1]);
            w.cell_x.push_back(i);
            w.cell_y.push_back(k);
            w.tx.push_back(t);
            w.ty.push_back(s);
        }
    }
    return w;
}

FunctionalSample domain_transform(const FunctionalSample& x, const DomainWarp& warp) {
    x.validate();
    if (x.tag != DomainTag::original) throw InputError("domain_transform: sample is already transformed");
    if (x.axes != warp.input_axes) throw InputError("domain_transform: sample grid differs from the warp grid");
    FunctionalSample out;
    out.axes = warp.output_axes;
    out.domain = Box::unit(x.dims());
    out.tag = DomainTag::domain_transformed;
    out.density_id = x.density_id;
    const std::size_t n = warp.cell_x.size();
    out.values.resize(n);
    for (std::size_t q = 0; q < n; ++q) {
        out.values[q] = x.dims() == 1 ? cell_value(x, warp.cell_x[q], warp.tx[q], 0, 0.0)
                                      : cell_value(x, warp.cell_x[q], warp.tx[q], warp.cell_y[q], warp.ty[q]);
    }
    return out;
}

FunctionalSample domain_transform(const FunctionalSample& x, const CdfModel& cdf, std::optional<std::size_t> resolution) {
    x.validate();
    require_same_domain(x.domain, cdf.density().domain(), "domain_transform");
    return domain_transform(x, make_domain_warp(cdf, x.axes, resolution));
}

double weighted_inner_product(const FunctionalSample& h, const FunctionalSample& k, const DensityModel& g) {
    h.validate();
    k.validate();
    require_same_domain(h.domain, g.domain(), "weighted_inner_product");
    require_same_domain(k.domain, g.domain(), "weighted_inner_product");
    std::vector<std::vector<double>> axes;
    for (std::size_t j = 0; j < h.dims(); ++j) {
        std::vector<double> merged = h.axes[j];
        for (double x : g.axis_nodes(j)) {
            if (x >= h.axes[j].front() && x <= h.axes[j].back()) merged.push_back(x);
        }
        std::sort(merged.begin(), merged.end());
        const double tiny = 1e-14 * g.domain().width(j);
        merged.erase(std::unique(merged.begin(), merged.end(), [tiny](double l, double r) { return r - l <= tiny; }),
                     merged.end());
        axes.push_back(std::move(merged));
    }
    const std::vector<double> w = grid_weights(axes);
    FunctionalSample grid;
    grid.axes = axes;
    grid.values.resize(w.size());
    double sum = 0.0;
    double p[2];
    for (std::size_t f = 0; f < w.size(); ++f) {
        point_of(grid, f, p);
        const std::span<const double> pt(p, h.dims());
        sum += w[f] * interpolate(h, pt) * interpolate(k, pt) * g.evaluate(pt);
    }
    return sum;
}

double l2_inner_product(const FunctionalSample& h, const FunctionalSample& k) {
    h.validate();
    k.validate();
    require_same_domain(h.domain, k.domain, "l2_inner_product");
    const std::vector<double> kv = values_on(k, h);
    const std::vector<double> w = grid_weights(h.axes);
    double sum = 0.0;
    for (std::size_t f = 0; f < w.size(); ++f) sum += w[f] * h.values[f] * kv[f];
    return sum;
}

double Equivalence::max_discrepancy() const {
    return std::max({std::abs(weighted - state), std::abs(weighted - domain), std::abs(state - domain)});
}

Equivalence equivalence_check(const FunctionalSample& h, const FunctionalSample& k, const DensityModel& g,
                              std::optional<std::size_t> resolution) {
    if (h.dims() != 1 || k.dims() != 1) throw InputError("equivalence_check: 1D only");
    const CdfModel cdf(g);
    const std::size_t m = resolution ? *resolution : h.axes[0].size();
    Equivalence e;
    e.weighted = weighted_inner_product(h, k, g);
    e.state = l2_inner_product(state_transform(h, g), state_transform(k, g));
    e.domain = l2_inner_product(domain_transform(h, cdf, m), domain_transform(k, cdf, m));
    return e;
}

}  // namespace tensorfda
