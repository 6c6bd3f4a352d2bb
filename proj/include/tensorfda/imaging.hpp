#pragma once

// Images as functional data: Hilbert-curve and column-major linearizations,
// and the central-difference gradient magnitude.
//
// Pixel (i, j) is row i, column j; pixels are stored row-major.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "tensorfda/topology_transform.hpp"

namespace tensorfda {

struct ImageGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;

    ImageGrid() = default;
    ImageGrid(std::size_t width, std::size_t height, std::vector<double> pixels);
    /// width x height image filled with `value`.
    static ImageGrid filled(std::size_t width, std::size_t height, double value);

    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return pixels[i * width + j]; }
    [[nodiscard]] double& at(std::size_t i, std::size_t j) { return pixels[i * width + j]; }

    friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

struct Cell {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Hilbert curve on a 2^order x 2^order grid. Index 0 is cell (0, 0) and the
/// first step goes to (0, 1).
class HilbertMap {
public:
    explicit HilbertMap(int order);

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] std::size_t size() const noexcept { return std::size_t{1} << order_; }
    [[nodiscard]] std::size_t length() const noexcept { return size() * size(); }

    /// Throws DomainError for a cell outside the grid.
    [[nodiscard]] std::uint64_t forward(Cell c) const;
    /// Throws DomainError for t >= length().
    [[nodiscard]] Cell backward(std::uint64_t t) const;

    friend bool operator==(const HilbertMap&, const HilbertMap&) = default;

private:
    int order_;
};

inline constexpr int kMaxHilbertOrder = 12;

/// Throws InputError unless 1 <= order <= kMaxHilbertOrder.
HilbertMap hilbert_map(int order);

/// Smallest order whose side holds both image dimensions.
int hilbert_order_for(const ImageGrid& img);

/// Zero-pads the image symmetrically to side x side (extra odd row or column
/// at the bottom or right). Throws InputError when the image is larger.
ImageGrid pad_to_square(const ImageGrid& img, std::size_t side);

/// Pixels along the curve, on abscissae t / (4^n - 1). Images smaller than
/// the map are padded with pad_to_square first.
FunctionalSample image_to_sequence(const ImageGrid& img, const HilbertMap& map);

/// Inverse of image_to_sequence for a square image of the map's side.
/// Throws InputError unless the sample has 4^n values.
ImageGrid sequence_to_image(const FunctionalSample& seq, const HilbertMap& map);

/// Column-stacked pixels on abscissae t / (width * height - 1).
FunctionalSample column_major_sequence(const ImageGrid& img);

/// sqrt(dx^2 + dy^2) with dx = (I(i+1, j) - I(i-1, j)) / 2 and dy likewise
/// along columns; out-of-range neighbors replicate the border pixel.
/// Throws InputError when either side is below 3.
ImageGrid gradient_image(const ImageGrid& img);

}  // namespace tensorfda
