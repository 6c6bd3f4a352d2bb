#include "tensorfda/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tensorfda/errors.hpp"

namespace tensorfda {
namespace {

// Quadrant rotation of the classic xy <-> d construction.
void rotate(std::uint64_t n, std::uint64_t& x, std::uint64_t& y, std::uint64_t rx, std::uint64_t ry) {
    if (ry == 0) {
        if (rx == 1) {
            x = n - 1 - x;
            y = n - 1 - y;
        }
        std::swap(x, y);
    }
}

FunctionalSample unit_sample(std::vector<double> values) {
    const std::size_t n = values.size();
    std::vector<double> t(n);
    for (std::size_t q = 0; q < n; ++q) t[q] = n == 1 ? 0.0 : static_cast<double>(q) / static_cast<double>(n - 1);
    if (n > 1) t.back() = 1.0;
    FunctionalSample s;
    s.axes = {std::move(t)};
    s.values = std::move(values);
    s.domain = Box::unit(1);
    return s;
}

}  // namespace

ImageGrid::ImageGrid(std::size_t w, std::size_t h, std::vector<double> p) : width(w), height(h), pixels(std::move(p)) {
    if (pixels.size() != width * height) {
        throw InputError("ImageGrid: " + std::to_string(pixels.size()) + " pixels for a " + std::to_string(width) +
                         "x" + std::to_string(height) + " image");
    }
}

ImageGrid ImageGrid::filled(std::size_t w, std::size_t h, double value) {
    return ImageGrid(w, h, std::vector<double>(w * h, value));
}

HilbertMap::HilbertMap(int order) : order_(order) {
    if (order < 1 || order > kMaxHilbertOrder) {
        throw InputError("hilbert_map: order must be in 1.." + std::to_string(kMaxHilbertOrder));
    }
}

std::uint64_t HilbertMap::forward(Cell c) const {
    const std::uint64_t n = size();
    if (c.i >= n || c.j >= n) throw DomainError("HilbertMap::forward: cell outside the grid");
    std::uint64_t x = c.i;
    std::uint64_t y = c.j;
    std::uint64_t d = 0;
    for (std::uint64_t s = n / 2; s > 0; s /= 2) {
        const std::uint64_t rx = (x & s) > 0 ? 1 : 0;
        const std::uint64_t ry = (y & s) > 0 ? 1 : 0;
        d += s * s * ((3 * rx) ^ ry);
        rotate(n, x, y, rx, ry);
    }
    return d;
}

Cell HilbertMap::backward(std::uint64_t t) const {
    const std::uint64_t n = size();
    if (t >= n * n) throw DomainError("HilbertMap::backward: index outside the curve");
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    for (std::uint64_t s = 1; s < n; s *= 2) {
        const std::uint64_t rx = 1 & (t / 2);
        const std::uint64_t ry = 1 & (t ^ rx);
        rotate(s, x, y, rx, ry);
        x += s * rx;
        y += s * ry;
        t /= 4;
    }
    return Cell{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)};
}

HilbertMap hilbert_map(int order) { return HilbertMap(order); }

int hilbert_order_for(const ImageGrid& img) {
    const std::size_t side = std::max<std::size_t>({img.width, img.height, 2});
    int order = 1;
    while ((std::size_t{1} << order) < side) ++order;
    if (order > kMaxHilbertOrder) throw InputError("hilbert_order_for: image too large for a Hilbert map");
    return order;
}

ImageGrid pad_to_square(const ImageGrid& img, std::size_t side) {
    if (img.width > side || img.height > side) {
        throw InputError("pad_to_square: image larger than " + std::to_string(side));
    }
    if (img.width == side && img.height == side) return img;
    ImageGrid out = ImageGrid::filled(side, side, 0.0);
    const std::size_t top = (side - img.height) / 2;
    const std::size_t left = (side - img.width) / 2;
    for (std::size_t i = 0; i < img.height; ++i) {
        for (std::size_t j = 0; j < img.width; ++j) out.at(top + i, left + j) = img.at(i, j);
    }
    return out;
}

FunctionalSample image_to_sequence(const ImageGrid& img, const HilbertMap& map) {
    if (img.pixels.size() != img.width * img.height) throw InputError("image_to_sequence: inconsistent image");
    const ImageGrid sq = pad_to_square(img, map.size());
    std::vector<double> v(map.length());
    for (std::uint64_t t = 0; t < v.size(); ++t) {
        const Cell c = map.backward(t);
        v[t] = sq.at(c.i, c.j);
    }
    return unit_sample(std::move(v));
}

ImageGrid sequence_to_image(const FunctionalSample& seq, const HilbertMap& map) {
    if (seq.values.size() != map.length()) {
        throw InputError("sequence_to_image: expected " + std::to_string(map.length()) + " values, got " +
                         std::to_string(seq.values.size()));
    }
    ImageGrid out = ImageGrid::filled(map.size(), map.size(), 0.0);
    for (std::uint64_t t = 0; t < seq.values.size(); ++t) {
        const Cell c = map.backward(t);
        out.at(c.i, c.j) = seq.values[t];
    }
    return out;
}

FunctionalSample column_major_sequence(const ImageGrid& img) {
    if (img.pixels.empty() || img.pixels.size() != img.width * img.height) {
        throw InputError("column_major_sequence: empty or inconsistent image");
    }
    std::vector<double> v;
    v.reserve(img.pixels.size());
    for (std::size_t j = 0; j < img.width; ++j) {
        for (std::size_t i = 0; i < img.height; ++i) v.push_back(img.at(i, j));
    }
    return unit_sample(std::move(v));
}

ImageGrid gradient_image(const ImageGrid& img) {
    if (img.width < 3 || img.height < 3) throw InputError("gradient_image: image must be at least 3x3");
    if (img.pixels.size() != img.width * img.height) throw InputError("gradient_image: inconsistent image");
    ImageGrid out = ImageGrid::filled(img.width, img.height, 0.0);
    for (std::size_t i = 0; i < img.height; ++i) {
        const std::size_t up = i == 0 ? 0 : i - 1;
        const std::size_t down = std::min(i + 1, img.height - 1);
        for (std::size_t j = 0; j < img.width; ++j) {
            const std::size_t lt = j == 0 ? 0 : j - 1;
            const std::size_t rt = std::min(j + 1, img.width - 1);
            const double dx = (img.at(down, j) - img.at(up, j)) / 2.0;
            const double dy = (img.at(i, rt) - img.at(i, lt)) / 2.0;
            out.at(i, j) = std::hypot(dx, dy);
        }
    }
    return out;
}

}  // namespace tensorfda
