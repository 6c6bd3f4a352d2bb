#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tensorfda {

/// Axis-aligned box [lo_0, hi_0] x ... x [lo_{d-1}, hi_{d-1}].
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box unit(std::size_t dims);

    [[nodiscard]] std::size_t dims() const noexcept { return lo.size(); }
    [[nodiscard]] double width(std::size_t axis) const { return hi.at(axis) - lo.at(axis); }
    [[nodiscard]] double volume() const;
    [[nodiscard]] std::vector<double> center() const;
    [[nodiscard]] bool contains(std::span<const double> x, double slack = 0.0) const;

    friend bool operator==(const Box&, const Box&) = default;
};

/// n points in d dimensions stored row-major (point i at coords[i*d .. i*d+d)).
struct PointSet {
    std::size_t dims = 1;
    std::vector<double> coords;

    [[nodiscard]] std::size_t size() const noexcept { return dims == 0 ? 0 : coords.size() / dims; }
    [[nodiscard]] std::span<const double> point(std::size_t i) const {
        return std::span<const double>(coords).subspan(i * dims, dims);
    }
    void push(std::span<const double> p) { coords.insert(coords.end(), p.begin(), p.end()); }

    /// Smallest box holding every point.
    [[nodiscard]] Box bounds() const;

    friend bool operator==(const PointSet&, const PointSet&) = default;
};

}  // namespace tensorfda
