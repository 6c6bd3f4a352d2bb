#include "tensorfda/density_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "tensorfda/errors.hpp"
#include "tensorfda/tensor_basis.hpp"

namespace tensorfda {
namespace {

constexpr double kDomainSlack = 1e-12;

double clamp_axis(const Box& box, std::size_t axis, double x, const char* where) {
    const double slack = kDomainSlack * box.width(axis);
    if (!(x >= box.lo[axis] - slack && x <= box.hi[axis] + slack)) {
        throw DomainError(std::string(where) + ": coordinate " + std::to_string(axis) + " = " + std::to_string(x) +
                          " outside the domain");
    }
    return std::clamp(x, box.lo[axis], box.hi[axis]);
}

// Locates x on a uniform grid: returns the cell index and the offset from
// its left node.
std::pair<std::size_t, double> locate(double x, double lo, double h, std::size_t nodes) {
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor((x - lo) / h)));
    i = std::min(i, nodes - 2);
    return {i, std::clamp(x - (lo + h * static_cast<double>(i)), 0.0, h)};
}

// Running integral of a piecewise-linear function given by node values.
std::vector<double> cumulative(std::span<const double> v, double h) {
    std::vector<double> c(v.size(), 0.0);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) c[i + 1] = c[i] + 0.5 * h * (v[i] + v[i + 1]);
    return c;
}

double partial_integral(std::span<const double> v, std::span<const double> c, double lo, double h, double x) {
    const auto [i, s] = locate(x, lo, h, v.size());
    return c[i] + v[i] * s + (v[i + 1] - v[i]) * s * s / (2.0 * h);
}

// Smallest x with integral_lo^x = target, exact for the piecewise-linear
// integrand.
double invert_integral(std::span<const double> v, std::span<const double> c, double lo, double h, double target) {
    if (target <= 0.0) return lo;
    const auto it = std::lower_bound(c.begin() + 1, c.end(), target);
    if (it == c.end()) return lo + h * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(it - c.begin()) - 1;
    const double rest = target - c[i];
    const double x0 = lo + h * static_cast<double>(i);
    if (rest <= 0.0) return x0;
    const double qa = (v[i + 1] - v[i]) / (2.0 * h);
    const double qb = v[i];
    const double disc = std::max(0.0, qb * qb + 4.0 * qa * rest);
    const double denom = qb + std::sqrt(disc);
    const double s = denom > 0.0 ? 2.0 * rest / denom : 0.0;
    return x0 + std::clamp(s, 0.0, h);
}

double normal_mass(double lo, double hi, double mu, double h) {
    const double zl = (lo - mu) / (h * std::numbers::sqrt2);
    const double zh = (hi - mu) / (h * std::numbers::sqrt2);
    if (zl > 0.0) return 0.5 * (std::erfc(zl) - std::erfc(zh));
    if (zh < 0.0) return 0.5 * (std::erfc(-zh) - std::erfc(-zl));
    return 0.5 * (std::erf(zh) - std::erf(zl));
}

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t j = std::min(i + 1, v.size() - 1);
    return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
}

std::vector<double> trapezoid_node_weights(std::size_t nodes, double h) {
    std::vector<double> w(nodes, h);
    w.front() = w.back() = 0.5 * h;
    return w;
}

}  // namespace

// -------------------------------------------------------------- DensityModel

DensityModel::DensityModel(Box domain, std::vector<std::size_t> nodes, std::vector<double> values, double floor,
                           std::vector<double> bandwidth)
    : domain_(std::move(domain)), nodes_(std::move(nodes)), bandwidth_(std::move(bandwidth)), floor_(floor) {
    const std::size_t d = domain_.dims();
    if (d < 1 || d > 2) throw InputError("DensityModel: only 1D and 2D domains are supported");
    if (nodes_.size() != d) throw InputError("DensityModel: node counts do not match the domain");
    for (std::size_t j = 0; j < d; ++j) {
        if (!(domain_.width(j) > 0.0) || !std::isfinite(domain_.width(j))) {
            throw InputError("DensityModel: domain has zero area");
        }
        if (nodes_[j] < 2) throw InputError("DensityModel: need at least two grid nodes per axis");
    }
    const std::size_t total =
        std::accumulate(nodes_.begin(), nodes_.end(), std::size_t{1}, std::multiplies<>());
    if (values.size() != total) throw InputError("DensityModel: value count does not match the grid");
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) throw InputError("DensityModel: density values must be finite and >= 0");
    }
    const double vol = domain_.volume();
    if (!(floor_ >= 0.0) || floor_ * vol >= 1.0) {
        throw ConfigError("DensityModel: floor must be >= 0 and below the uniform height");
    }

    values_ = std::move(values);
    const double raw = integral();
    if (!(raw > 0.0)) {
        if (floor_ == 0.0) throw InputError("DensityModel: density integrates to zero");
        std::fill(values_.begin(), values_.end(), 1.0 / vol);
        return;
    }
    std::vector<double> base = values_;
    auto mass = [&](double c) {
        for (std::size_t i = 0; i < base.size(); ++i) values_[i] = std::max(c * base[i], floor_);
        return integral();
    };
    double lo = 0.0;
    double hi = 1.0 / raw;
    if (floor_ == 0.0) {
        mass(hi);
    } else {
        // mass(c) is increasing, mass(0) = floor * vol < 1 <= mass(1 / raw).
        for (int iter = 0; iter < 200 && hi - lo > 1e-17 * hi; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (mass(mid) < 1.0 ? lo : hi) = mid;
        }
        mass(hi);
    }
}

DensityModel DensityModel::restore(Box domain, std::vector<std::size_t> nodes, std::vector<double> values, double floor,
                                   std::vector<double> bandwidth) {
    DensityModel g;
    try {
        // Validates the layout; the normalized copy is discarded.
        const DensityModel check(domain, nodes, values, floor, bandwidth);
    } catch (const Error& e) {
        throw FormatError(std::string("DensityModel::restore: ") + e.what());
    }
    g.domain_ = std::move(domain);
    g.nodes_ = std::move(nodes);
    g.values_ = std::move(values);
    g.floor_ = floor;
    g.bandwidth_ = std::move(bandwidth);
    if (std::abs(g.integral() - 1.0) > 1e-9) throw FormatError("DensityModel::restore: stored density is not normalized");
    return g;
}

double DensityModel::spacing(std::size_t axis) const {
    return domain_.width(axis) / static_cast<double>(nodes_.at(axis) - 1);
}

double DensityModel::node(std::size_t axis, std::size_t i) const {
    if (i + 1 == nodes_.at(axis)) return domain_.hi[axis];
    return domain_.lo[axis] + spacing(axis) * static_cast<double>(i);
}

std::vector<double> DensityModel::axis_nodes(std::size_t axis) const {
    std::vector<double> out(nodes_.at(axis));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(axis, i);
    return out;
}

double DensityModel::evaluate(std::span<const double> x) const {
    if (x.size() != dims()) throw DomainError("DensityModel::evaluate: point has wrong dimension");
    const double x0 = clamp_axis(domain_, 0, x[0], "DensityModel::evaluate");
    const auto [i, s] = locate(x0, domain_.lo[0], spacing(0), nodes_[0]);
    const double t = s / spacing(0);
    if (dims() == 1) return (1.0 - t) * values_[i] + t * values_[i + 1];
    const double y0 = clamp_axis(domain_, 1, x[1], "DensityModel::evaluate");
    const auto [k, r] = locate(y0, domain_.lo[1], spacing(1), nodes_[1]);
    const double u = r / spacing(1);
    const std::size_t ny = nodes_[1];
    auto at = [&](std::size_t a, std::size_t b) { return values_[a * ny + b]; };
    return (1.0 - t) * ((1.0 - u) * at(i, k) + u * at(i, k + 1)) + t * ((1.0 - u) * at(i + 1, k) + u * at(i + 1, k + 1));
}

double DensityModel::integral() const {
    const std::vector<double> wx = trapezoid_node_weights(nodes_[0], spacing(0));
    if (dims() == 1) return std::inner_product(wx.begin(), wx.end(), values_.begin(), 0.0);
    const std::vector<double> wy = trapezoid_node_weights(nodes_[1], spacing(1));
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_[0]; ++i) {
        double row = 0.0;
        for (std::size_t k = 0; k < nodes_[1]; ++k) row += wy[k] * values_[i * nodes_[1] + k];
        sum += wx[i] * row;
    }
    return sum;
}

Box DensityModel::support_box(double threshold) const {
    Box box{std::vector<double>(dims(), 0.0), std::vector<double>(dims(), 0.0)};
    bool any = false;
    const std::size_t ny = dims() == 2 ? nodes_[1] : 1;
    for (std::size_t flat = 0; flat < values_.size(); ++flat) {
        if (!(values_[flat] > threshold)) continue;
        const std::size_t idx[2] = {flat / ny, flat % ny};
        for (std::size_t j = 0; j < dims(); ++j) {
            const double x = node(j, idx[j]);
            if (!any || x < box.lo[j]) box.lo[j] = x;
            if (!any || x > box.hi[j]) box.hi[j] = x;
        }
        any = true;
    }
    return any ? box : domain_;
}

// -------------------------------------------------------------- estimation

std::vector<double> silverman_bandwidth(const PointSet& points, std::size_t resolution, const Box& domain) {
    const std::size_t n = points.size();
    const std::size_t d = points.dims;
    std::vector<double> h(d);
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = points.point(i)[j];
        const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(n);
        double var = 0.0;
        for (double v : c) var += (v - mean) * (v - mean);
        const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
        double spread = sd;
        double factor = std::pow(static_cast<double>(n), -1.0 / 6.0);
        if (d == 1) {
            const double iqr = (quantile(c, 0.75) - quantile(c, 0.25)) / 1.34;
            if (iqr > 0.0) spread = std::min(sd, iqr);
            factor = 0.9 * std::pow(static_cast<double>(n), -0.2);
        }
        h[j] = spread > 0.0 ? spread * factor : domain.width(j) / static_cast<double>(resolution - 1);
    }
    return h;
}

DensityModel estimate_density(const KnotCandidateSet& knots, const DensityOptions& options) {
    const PointSet& pts = knots.points;
    const Box& domain = knots.domain;
    const std::size_t d = domain.dims();
    if (d < 1 || d > 2 || pts.dims != d) throw InputError("estimate_density: knots and domain dimensions differ");
    if (pts.size() < 2) throw InputError("estimate_density: need at least two knot points");
    for (std::size_t j = 0; j < d; ++j) {
        if (!(domain.width(j) > 0.0)) throw InputError("estimate_density: domain has zero area");
    }
    const std::size_t res = options.resolution != 0
                                ? options.resolution
                                : (d == 1 ? kDefaultDensityResolution1d : kDefaultDensityResolution2d);
    if (res < 2) throw ConfigError("estimate_density: resolution must be at least 2");

    std::vector<double> h;
    if (options.bandwidth.empty()) {
        h = silverman_bandwidth(pts, res, domain);
    } else if (options.bandwidth.size() == 1 || options.bandwidth.size() == d) {
        for (std::size_t j = 0; j < d; ++j) h.push_back(options.bandwidth[options.bandwidth.size() == 1 ? 0 : j]);
    } else {
        throw ConfigError("estimate_density: bandwidth needs one value or one per axis");
    }
    for (double v : h) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("estimate_density: bandwidth must be positive");
    }
    const double floor = options.floor ? *options.floor : kDefaultFloorFraction / domain.volume();

    // Per axis, the average of each kernel over the dual cell of every node.
    const std::size_t n = pts.size();
    std::vector<std::vector<double>> axis_avg(d, std::vector<double>(n * res));
    for (std::size_t j = 0; j < d; ++j) {
        const double step = domain.width(j) / static_cast<double>(res - 1);
        for (std::size_t q = 0; q < res; ++q) {
            const double xq = domain.lo[j] + step * static_cast<double>(q);
            const double lo = q == 0 ? domain.lo[j] : xq - 0.5 * step;
            const double hi = q + 1 == res ? domain.hi[j] : xq + 0.5 * step;
            for (std::size_t i = 0; i < n; ++i) {
                axis_avg[j][i * res + q] = normal_mass(lo, hi, pts.point(i)[j], h[j]) / (hi - lo);
            }
        }
    }
    std::vector<double> g;
    if (d == 1) {
        g.assign(res, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t q = 0; q < res; ++q) g[q] += axis_avg[0][i * res + q];
        }
    } else {
        g.assign(res * res, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t q = 0; q < res; ++q) {
                const double ax = axis_avg[0][i * res + q];
                if (ax == 0.0) continue;
                for (std::size_t r = 0; r < res; ++r) g[q * res + r] += ax * axis_avg[1][i * res + r];
            }
        }
    }
    for (double& v : g) v /= static_cast<double>(n);
    return DensityModel(domain, std::vector<std::size_t>(d, res), std::move(g), floor, std::move(h));
}

double empirical_cdf(const KnotCandidateSet& knots, std::span<const double> query) {
    const PointSet& pts = knots.points;
    if (query.size() != pts.dims) throw DomainError("empirical_cdf: query has wrong dimension");
    if (pts.size() == 0) return 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool below = true;
        for (std::size_t j = 0; j < pts.dims; ++j) below = below && pts.point(i)[j] <= query[j];
        if (below) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(pts.size());
}

DensityModel smooth_density(const DensityModel& g, const TensorBasisSpec& basis) {
    GridSamples grid;
    for (std::size_t j = 0; j < g.dims(); ++j) grid.axes.push_back(g.axis_nodes(j));
    grid.values = g.values();
    const TensorCoefficients c = tensor_project(grid, basis);
    std::vector<double> v = tensor_evaluate_grid(c, grid.axes);
    for (double& x : v) x = std::max(x, 0.0);
    return DensityModel(g.domain(), g.nodes(), std::move(v), g.floor(), g.bandwidth());
}

// ----------------------------------------------------------------- CdfModel

CdfModel::CdfModel(const DensityModel& g) : density_(g) {
    const std::size_t nx = g.nodes()[0];
    const double total = g.integral();
    values_ = g.values();
    for (double& v : values_) v /= total;
    if (g.dims() == 1) {
        marginal_density_ = values_;
    } else {
        const std::size_t ny = g.nodes()[1];
        row_cumulative_.resize(nx * ny);
        marginal_density_.resize(nx);
        for (std::size_t q = 0; q < nx; ++q) {
            const std::vector<double> c = cumulative(std::span<const double>(values_).subspan(q * ny, ny), g.spacing(1));
            std::copy(c.begin(), c.end(), row_cumulative_.begin() + static_cast<std::ptrdiff_t>(q * ny));
            marginal_density_[q] = c.back();
        }
    }
    marginal_cdf_ = cumulative(marginal_density_, g.spacing(0));
    marginal_cdf_.front() = 0.0;
    marginal_cdf_.back() = 1.0;
}

std::span<const double> CdfModel::row(std::size_t q) const {
    const std::size_t ny = density_.nodes()[1];
    return std::span<const double>(values_).subspan(q * ny, ny);
}

std::span<const double> CdfModel::row_cumulative(std::size_t q) const {
    const std::size_t ny = density_.nodes()[1];
    return std::span<const double>(row_cumulative_).subspan(q * ny, ny);
}

double CdfModel::marginal(double x) const {
    const Box& box = density_.domain();
    const double xc = clamp_axis(box, 0, x, "CdfModel::marginal");
    if (xc >= box.hi[0]) return 1.0;
    return std::clamp(partial_integral(marginal_density_, marginal_cdf_, box.lo[0], density_.spacing(0), xc), 0.0, 1.0);
}

double CdfModel::inverse_marginal(double u) const {
    const Box& box = density_.domain();
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("CdfModel::inverse_marginal: u outside [0, 1]");
    if (u >= 1.0) return box.hi[0];
    return std::min(invert_integral(marginal_density_, marginal_cdf_, box.lo[0], density_.spacing(0), u), box.hi[0]);
}

double CdfModel::conditional(double y, double x) const {
    if (dims() != 2) throw InputError("CdfModel::conditional: 2D only");
    const Box& box = density_.domain();
    const double xc = clamp_axis(box, 0, x, "CdfModel::conditional");
    const double yc = clamp_axis(box, 1, y, "CdfModel::conditional");
    const auto [q, s] = locate(xc, box.lo[0], density_.spacing(0), density_.nodes()[0]);
    const double t = s / density_.spacing(0);
    const double total = (1.0 - t) * marginal_density_[q] + t * marginal_density_[q + 1];
    if (!(total > 0.0)) return (yc - box.lo[1]) / box.width(1);
    if (yc >= box.hi[1]) return 1.0;
    const double hy = density_.spacing(1);
    const double num = (1.0 - t) * partial_integral(row(q), row_cumulative(q), box.lo[1], hy, yc) +
                       t * partial_integral(row(q + 1), row_cumulative(q + 1), box.lo[1], hy, yc);
    return std::clamp(num / total, 0.0, 1.0);
}

double CdfModel::inverse_conditional(double u, double x) const {
    if (dims() != 2) throw InputError("CdfModel::inverse_conditional: 2D only");
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("CdfModel::inverse_conditional: u outside [0, 1]");
    const Box& box = density_.domain();
    const double xc = clamp_axis(box, 0, x, "CdfModel::inverse_conditional");
    const std::size_t ny = density_.nodes()[1];
    const auto [q, s] = locate(xc, box.lo[0], density_.spacing(0), density_.nodes()[0]);
    const double t = s / density_.spacing(0);
    if (u >= 1.0) return box.hi[1];
    std::vector<double> blend(ny);
    const auto r0 = row(q);
    const auto r1 = row(q + 1);
    for (std::size_t k = 0; k < ny; ++k) blend[k] = (1.0 - t) * r0[k] + t * r1[k];
    const double hy = density_.spacing(1);
    const std::vector<double> c = cumulative(blend, hy);
    if (!(c.back() > 0.0)) return box.lo[1] + u * box.width(1);
    return std::min(invert_integral(blend, c, box.lo[1], hy, u * c.back()), box.hi[1]);
}

double CdfModel::value(std::span<const double> x) const {
    if (x.size() != dims()) throw DomainError("CdfModel::value: point has wrong dimension");
    if (dims() == 1) return marginal(x[0]);
    const Box& box = density_.domain();
    const double xc = clamp_axis(box, 0, x[0], "CdfModel::value");
    const double yc = clamp_axis(box, 1, x[1], "CdfModel::value");
    const double hx = density_.spacing(0);
    const double hy = density_.spacing(1);
    // H_q(y) = integral_c^y g(x_q, v) dv is linear in x between rows.
    auto h = [&](std::size_t q) { return partial_integral(row(q), row_cumulative(q), box.lo[1], hy, yc); };
    const auto [qx, s] = locate(xc, box.lo[0], hx, density_.nodes()[0]);
    double sum = 0.0;
    double prev = h(0);
    for (std::size_t q = 0; q < qx; ++q) {
        const double next = h(q + 1);
        sum += 0.5 * hx * (prev + next);
        prev = next;
    }
    const double next = h(qx + 1);
    sum += prev * s + (next - prev) * s * s / (2.0 * hx);
    return std::clamp(sum, 0.0, 1.0);
}

CdfModel cdf_from_density(const DensityModel& g) { return CdfModel(g); }

double inverse_cdf(const CdfModel& cdf, double u) {
    if (cdf.dims() != 1) throw InputError("inverse_cdf: 1D only");
    return cdf.inverse_marginal(u);
}

std::vector<double> uniformize_2d(const CdfModel& cdf, std::span<const double> p) {
    if (cdf.dims() != 2 || p.size() != 2) throw InputError("uniformize_2d: 2D only");
    return {cdf.marginal(p[0]), cdf.conditional(p[1], p[0])};
}

std::vector<double> inverse_uniformize_2d(const CdfModel& cdf, std::span<const double> u) {
    if (cdf.dims() != 2 || u.size() != 2) throw InputError("inverse_uniformize_2d: 2D only");
    const double x = cdf.inverse_marginal(u[0]);
    return {x, cdf.inverse_conditional(u[1], x)};
}

}  // namespace tensorfda
