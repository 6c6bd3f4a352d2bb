#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <random>
#include <set>

#include "tensorfda/errors.hpp"
#include "tensorfda/imaging.hpp"

using namespace tensorfda;

namespace {

// Recursive quadrant subdivision; (xi, xj) is the first-move direction of
// the top-level curve, (yi, yj) the second.
void recursive_hilbert(double x0, double y0, double xi, double xj, double yi, double yj, int n,
                       std::vector<Cell>& out, double side) {
    if (n <= 0) {
        const double x = x0 + (xi + yi) / 2;
        const double y = y0 + (xj + yj) / 2;
        out.push_back(Cell{static_cast<std::uint32_t>(std::floor(x * side)),
                           static_cast<std::uint32_t>(std::floor(y * side))});
        return;
    }
    recursive_hilbert(x0, y0, yi / 2, yj / 2, xi / 2, xj / 2, n - 1, out, side);
    recursive_hilbert(x0 + xi / 2, y0 + xj / 2, xi / 2, xj / 2, yi / 2, yj / 2, n - 1, out, side);
    recursive_hilbert(x0 + xi / 2 + yi / 2, y0 + xj / 2 + yj / 2, xi / 2, xj / 2, yi / 2, yj / 2, n - 1, out, side);
    recursive_hilbert(x0 + xi / 2 + yi, y0 + xj / 2 + yj, -yi / 2, -yj / 2, -xi / 2, -xj / 2, n - 1, out, side);
}

std::vector<Cell> oracle_curve(int order) {
    std::vector<Cell> out;
    // Major axis along j so the curve ends at (side - 1, 0).
    recursive_hilbert(0, 0, 0, 1, 1, 0, order, out, static_cast<double>(1 << order));
    return out;
}

ImageGrid random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u;
    std::vector<double> p(w * h);
    for (double& v : p) v = u(rng);
    return ImageGrid(w, h, p);
}

double brute_gradient(const ImageGrid& img, long i, long j) {
    auto px = [&](long a, long b) {
        a = std::clamp<long>(a, 0, static_cast<long>(img.height) - 1);
        b = std::clamp<long>(b, 0, static_cast<long>(img.width) - 1);
        return img.pixels[static_cast<std::size_t>(a) * img.width + static_cast<std::size_t>(b)];
    };
    const double dx = (px(i + 1, j) - px(i - 1, j)) / 2;
    const double dy = (px(i, j + 1) - px(i, j - 1)) / 2;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

TEST_CASE("order-1 curve matches the hand enumeration") {
    const HilbertMap m = hilbert_map(1);
    const std::vector<Cell> expect{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    for (std::uint64_t t = 0; t < 4; ++t) {
        CHECK(m.backward(t) == expect[t]);
        CHECK(m.forward(expect[t]) == t);
    }
}

TEST_CASE("bijection and unit adjacency for orders 1 to 8") {
    for (int order = 1; order <= 8; ++order) {
        const HilbertMap m = hilbert_map(order);
        const std::size_t n = m.size();
        std::vector<char> seen(n * n, 0);
        bool adjacent = true;
        bool inverse = true;
        Cell prev = m.backward(0);
        for (std::uint64_t t = 0; t < m.length(); ++t) {
            const Cell c = m.backward(t);
            seen[c.i * n + c.j] = 1;
            inverse = inverse && m.forward(c) == t;
            if (t > 0) {
                const long d = std::labs(long(c.i) - long(prev.i)) + std::labs(long(c.j) - long(prev.j));
                adjacent = adjacent && d == 1;
            }
            prev = c;
        }
        CHECK(adjacent);
        CHECK(inverse);
        CHECK(std::count(seen.begin(), seen.end(), 1) == static_cast<long>(n * n));
        std::set<std::uint64_t> indices;
        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::uint32_t j = 0; j < n; ++j) indices.insert(m.forward(Cell{i, j}));
        }
        CHECK(indices.size() == n * n);
        CHECK(*indices.rbegin() == n * n - 1);
    }
}

TEST_CASE("curve agrees with recursive subdivision") {
    for (int order = 1; order <= 6; ++order) {
        const auto expect = oracle_curve(order);
        const HilbertMap m = hilbert_map(order);
        REQUIRE(expect.size() == m.length());
        bool same = true;
        for (std::uint64_t t = 0; t < m.length(); ++t) same = same && m.backward(t) == expect[t];
        CHECK_MESSAGE(same, "order " << order);
        CHECK(m.backward(m.length() - 1) == Cell{static_cast<std::uint32_t>(m.size() - 1), 0});
    }
}

TEST_CASE("hilbert map limits") {
    CHECK_THROWS_AS(hilbert_map(0), InputError);
    CHECK_THROWS_AS(hilbert_map(13), InputError);
    const HilbertMap m12 = hilbert_map(12);
    const Cell c{4095, 17};
    CHECK(m12.backward(m12.forward(c)) == c);
    CHECK_THROWS_AS((void)m12.backward(m12.length()), DomainError);
    CHECK_THROWS_AS((void)hilbert_map(2).forward(Cell{4, 0}), DomainError);
}

TEST_CASE("image to sequence") {
    const HilbertMap m1 = hilbert_map(1);
    ImageGrid img = ImageGrid::filled(2, 2, 0.0);
    img.at(0, 0) = 1;
    img.at(0, 1) = 2;
    img.at(1, 1) = 3;
    img.at(1, 0) = 4;
    const FunctionalSample s = image_to_sequence(img, m1);
    CHECK(s.values == std::vector<double>{1, 2, 3, 4});
    CHECK(s.axes[0] == std::vector<double>{0.0, 1.0 / 3, 2.0 / 3, 1.0});
    CHECK(sequence_to_image(s, m1) == img);

    const HilbertMap m4 = hilbert_map(4);
    for (double v : image_to_sequence(ImageGrid::filled(16, 16, 0.7), m4).values) CHECK(v == 0.7);
    const ImageGrid r = random_image(16, 16, 9);
    CHECK(sequence_to_image(image_to_sequence(r, m4), m4) == r);

    FunctionalSample short_seq = s;
    short_seq.values.pop_back();
    CHECK_THROWS_AS(sequence_to_image(short_seq, m1), InputError);
    CHECK_THROWS_AS(image_to_sequence(random_image(32, 32, 1), m4), InputError);
}

TEST_CASE("symmetric zero padding") {
    const ImageGrid r = random_image(28, 28, 5);
    CHECK(hilbert_order_for(r) == 5);
    const ImageGrid p = pad_to_square(r, 32);
    for (std::size_t i = 0; i < 32; ++i) {
        for (std::size_t j = 0; j < 32; ++j) {
            const bool inside = i >= 2 && i < 30 && j >= 2 && j < 30;
            CHECK(p.at(i, j) == (inside ? r.at(i - 2, j - 2) : 0.0));
        }
    }
    const HilbertMap m = hilbert_map(5);
    CHECK(sequence_to_image(image_to_sequence(r, m), m) == p);

    const ImageGrid odd = random_image(5, 2, 3);
    const ImageGrid q = pad_to_square(odd, 8);
    CHECK(q.at(3, 1) == odd.at(0, 0));
    CHECK(q.at(4, 5) == odd.at(1, 4));
}

TEST_CASE("column-major vectorizer equals a direct reshape") {
    const ImageGrid r = random_image(7, 5, 11);
    const FunctionalSample s = column_major_sequence(r);
    REQUIRE(s.values.size() == 35);
    for (std::size_t q = 0; q < 35; ++q) CHECK(s.values[q] == r.pixels[(q % 5) * 7 + q / 5]);
    CHECK(s.axes[0].front() == 0.0);
    CHECK(s.axes[0].back() == 1.0);
}

TEST_CASE("gradient image") {
    for (double v : gradient_image(ImageGrid::filled(9, 6, 3.25)).pixels) CHECK(v == 0.0);

    ImageGrid ramp = ImageGrid::filled(8, 8, 0.0);
    ImageGrid diag = ramp;
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            ramp.at(i, j) = 2.0 * static_cast<double>(i);
            diag.at(i, j) = static_cast<double>(i + j);
        }
    }
    const ImageGrid gr = gradient_image(ramp);
    const ImageGrid gd = gradient_image(diag);
    for (std::size_t i = 1; i < 7; ++i) {
        for (std::size_t j = 1; j < 7; ++j) {
            CHECK(gr.at(i, j) == 2.0);
            CHECK(std::abs(gd.at(i, j) - std::sqrt(2.0)) < 1e-12);
        }
    }

    const ImageGrid r = random_image(13, 10, 17);
    const ImageGrid g = gradient_image(r);
    for (long i = 0; i < 10; ++i) {
        for (long j = 0; j < 13; ++j) {
            CHECK(g.at(std::size_t(i), std::size_t(j)) == doctest::Approx(brute_gradient(r, i, j)).epsilon(1e-14));
        }
    }

    // A locally constant plateau yields exact zeros inside it.
    ImageGrid plateau = random_image(12, 12, 4);
    for (std::size_t i = 3; i < 8; ++i) {
        for (std::size_t j = 3; j < 8; ++j) plateau.at(i, j) = 0.5;
    }
    const ImageGrid gp = gradient_image(plateau);
    for (std::size_t i = 4; i < 7; ++i) {
        for (std::size_t j = 4; j < 7; ++j) CHECK(gp.at(i, j) == 0.0);
    }

    CHECK_THROWS_AS(gradient_image(ImageGrid::filled(2, 5, 1.0)), InputError);
}
