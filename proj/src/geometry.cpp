#include "tensorfda/geometry.hpp"

#include <algorithm>
#include <limits>

#include "tensorfda/errors.hpp"

namespace tensorfda {

Box Box::unit(std::size_t dims) { return Box{std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)}; }

double Box::volume() const {
    double v = 1.0;
    for (std::size_t j = 0; j < dims(); ++j) v *= width(j);
    return v;
}

std::vector<double> Box::center() const {
    std::vector<double> c(dims());
    for (std::size_t j = 0; j < dims(); ++j) c[j] = 0.5 * (lo[j] + hi[j]);
    return c;
}

bool Box::contains(std::span<const double> x, double slack) const {
    if (x.size() != dims()) return false;
    for (std::size_t j = 0; j < dims(); ++j) {
        const double s = slack * width(j);
        if (x[j] < lo[j] - s || x[j] > hi[j] + s) return false;
    }
    return true;
}

Box PointSet::bounds() const {
    if (size() == 0) throw InputError("PointSet::bounds: empty point set");
    Box box{std::vector<double>(dims, std::numeric_limits<double>::infinity()),
            std::vector<double>(dims, -std::numeric_limits<double>::infinity())};
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = 0; j < dims; ++j) {
            box.lo[j] = std::min(box.lo[j], coords[i * dims + j]);
            box.hi[j] = std::max(box.hi[j], coords[i * dims + j]);
        }
    }
    return box;
}

}  // namespace tensorfda
