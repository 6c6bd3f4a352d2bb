#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tensorfda/errors.hpp"
#include "tensorfda/tensor_basis.hpp"

using namespace tensorfda;

namespace {

OrthonormalBasis axis_basis(double a, double b, std::size_t interior, int degree, Boundary boundary) {
    return orthonormalize(BasisSpec(KnotVector::uniform(a, b, interior), degree, boundary));
}

std::vector<double> knots_of(const OrthonormalBasis& ob) {
    const auto v = ob.spec().knots().values();
    return {v.begin(), v.end()};
}

GridSamples sample_grid(const std::function<double(double, double)>& f, std::vector<double> xs,
                        std::vector<double> ys) {
    GridSamples g;
    for (double x : xs) {
        for (double y : ys) g.values.push_back(f(x, y));
    }
    g.axes = {std::move(xs), std::move(ys)};
    return g;
}

// Bilinear interpolant of a 2D sample grid, built directly from the samples.
double bilinear(const GridSamples& g, double x, double y) {
    const auto& xs = g.axes[0];
    const auto& ys = g.axes[1];
    std::vector<double> row(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::vector<double> col(g.values.begin() + static_cast<std::ptrdiff_t>(i * ys.size()),
                                g.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * ys.size()));
        row[i] = oracle::lerp_samples(ys, col, y);
    }
    return oracle::lerp_samples(xs, row, x);
}

TensorCoefficients indicator(const TensorBasisSpec& spec, std::size_t flat) {
    std::vector<double> v(spec.dimension(), 0.0);
    v[flat] = 1.0;
    return TensorCoefficients(spec, v);
}

double sinsin(double x, double y) { return std::sin(2 * std::numbers::pi * x) * std::sin(2 * std::numbers::pi * y); }

}  // namespace

TEST_CASE("tensor_evaluate is the product of axis functions") {
    const TensorBasisSpec spec({axis_basis(0, 1, 6, 2, Boundary::zero), axis_basis(-1, 2, 5, 3, Boundary::free)});
    CHECK(spec.shape() == Shape{5, 9});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::uniform_real_distribution<double> uy(-1.0, 2.0);
    const TensorCoefficients zero = TensorCoefficients::zeros(spec);
    for (std::size_t i1 : {0u, 2u, 4u}) {
        for (std::size_t i2 : {0u, 3u, 8u}) {
            const TensorCoefficients c = indicator(spec, i1 * 9 + i2);
            for (int t = 0; t < 30; ++t) {
                const double x[2] = {ux(rng), uy(rng)};
                const double expect = spec.axis(0).evaluate(i1, x[0]) * spec.axis(1).evaluate(i2, x[1]);
                CHECK(tensor_evaluate(c, x) == doctest::Approx(expect).epsilon(1e-12));
                CHECK(tensor_evaluate(zero, x) == 0.0);
            }
        }
    }
    const double outside[2] = {0.5, 2.5};
    CHECK_THROWS_AS((void)tensor_evaluate(zero, outside), DomainError);
}

TEST_CASE("bilinear functions are reproduced by the degree-1 free tensor space") {
    const TensorBasisSpec spec({axis_basis(0, 1, 7, 1, Boundary::free), axis_basis(0, 1, 4, 1, Boundary::free)});
    const GridSamples g =
        sample_grid([](double x, double y) { return x * y; }, oracle::linspace(0, 1, 41), oracle::linspace(0, 1, 23));
    const TensorCoefficients c = tensor_project(g, spec);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const double x[2] = {u(rng), u(rng)};
        CHECK(std::abs(tensor_evaluate(c, x) - x[0] * x[1]) < 1e-8);
    }
    CHECK(tensor_l2_error(g, c) < 1e-8);
}

TEST_CASE("tensor_project recovers basis elements and zero") {
    const TensorBasisSpec spec({axis_basis(0, 1, 5, 3, Boundary::zero), axis_basis(0, 2, 4, 2, Boundary::zero)});
    const std::size_t flat = 1 * spec.shape()[1] + 2;
    const TensorCoefficients element = indicator(spec, flat);
    GridSamples g;
    g.axes = {oracle::linspace(0, 1, 4001), oracle::linspace(0, 2, 4001)};
    g.values = tensor_evaluate_grid(element, g.axes);
    const TensorCoefficients back = tensor_project(g, spec);
    for (std::size_t i = 0; i < spec.dimension(); ++i) {
        CHECK(std::abs(back.values()[i] - (i == flat ? 1.0 : 0.0)) < 1e-6);
    }
    g.values.assign(g.values.size(), 0.0);
    const TensorCoefficients zero = tensor_project(g, spec);
    for (double v : zero.values()) CHECK(v == 0.0);

    GridSamples coarse;
    coarse.axes = {oracle::linspace(0, 1, 2), oracle::linspace(0, 2, 50)};
    coarse.values.assign(2 * 50, 1.0);
    CHECK_THROWS_AS(tensor_project(coarse, spec), RankError);
}

TEST_CASE("tensor basis is orthonormal under brute-force 2D quadrature") {
    const TensorBasisSpec spec({axis_basis(0, 1, 6, 2, Boundary::zero), axis_basis(0, 1.5, 8, 3, Boundary::free)});
    // 5 x 12 elements; check a 5 x 5 block of axis-1 indices.
    const auto xb = knots_of(spec.axis(0));
    const auto yb = knots_of(spec.axis(1));
    std::vector<std::size_t> chosen;
    for (std::size_t i1 = 0; i1 < 5; ++i1) {
        for (std::size_t i2 : {0u, 1u, 5u, 10u, 11u}) chosen.push_back(i1 * spec.shape()[1] + i2);
    }
    std::vector<TensorCoefficients> elements;
    for (std::size_t f : chosen) elements.push_back(indicator(spec, f));
    for (std::size_t p = 0; p < chosen.size(); ++p) {
        for (std::size_t q = p; q < chosen.size(); ++q) {
            const double ip = oracle::integrate_2d(
                [&](double x, double y) {
                    const double pt[2] = {x, y};
                    return tensor_evaluate(elements[p], pt) * tensor_evaluate(elements[q], pt);
                },
                xb, yb, 4);
            CHECK(std::abs(ip - (p == q ? 1.0 : 0.0)) < 1e-7);
        }
    }
}

TEST_CASE("Parseval and separability against full 2D quadrature") {
    const TensorBasisSpec spec({axis_basis(0, 1, 3, 2, Boundary::zero), axis_basis(0, 1, 2, 1, Boundary::free)});
    CHECK(spec.shape() == Shape{2, 4});
    const GridSamples g = sample_grid([](double x, double y) { return std::exp(x) * std::cos(3 * y) + x * x * y; },
                                      oracle::linspace(0, 1, 9), {0.0, 0.1, 0.25, 0.3, 0.6, 0.7, 0.95, 1.0});
    const TensorCoefficients c = tensor_project(g, spec);
    const auto xb = oracle::merged_breaks(knots_of(spec.axis(0)), g.axes[0]);
    const auto yb = oracle::merged_breaks(knots_of(spec.axis(1)), g.axes[1]);
    for (std::size_t f = 0; f < spec.dimension(); ++f) {
        const std::size_t i1 = f / spec.shape()[1];
        const std::size_t i2 = f % spec.shape()[1];
        const double brute = oracle::integrate_2d(
            [&](double x, double y) {
                return bilinear(g, x, y) * spec.axis(0).evaluate(i1, x) * spec.axis(1).evaluate(i2, y);
            },
            xb, yb, 4);
        CHECK(std::abs(c.values()[f] - brute) < 1e-8);
    }
    double sum_sq = 0.0;
    for (double a : c.values()) sum_sq += a * a;
    const double norm_sq = oracle::integrate_2d(
        [&](double x, double y) {
            const double pt[2] = {x, y};
            const double v = tensor_evaluate(c, pt);
            return v * v;
        },
        xb, yb, 4);
    CHECK(std::abs(norm_sq - sum_sq) < 1e-6);

    // The residual norm agrees with brute force as well.
    const double resid = std::sqrt(oracle::integrate_2d(
        [&](double x, double y) {
            const double pt[2] = {x, y};
            const double r = bilinear(g, x, y) - tensor_evaluate(c, pt);
            return r * r;
        },
        xb, yb, 4));
    CHECK(tensor_l2_error(g, c) == doctest::Approx(resid).epsilon(1e-9));
}

TEST_CASE("tensor_l2_error examples") {
    const TensorBasisSpec spec({axis_basis(0, 1, 5, 1, Boundary::free), axis_basis(0, 1, 5, 1, Boundary::free)});
    const GridSamples g =
        sample_grid([](double x, double y) { return x * y; }, oracle::linspace(0, 1, 31), oracle::linspace(0, 1, 31));
    // ||x y|| on the unit square is 1/3.
    CHECK(tensor_l2_error(g, TensorCoefficients::zeros(spec)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    GridSamples wrong = g;
    wrong.axes[0].back() = 1.5;
    CHECK_THROWS_AS((void)tensor_l2_error(wrong, TensorCoefficients::zeros(spec)), DomainError);
    GridSamples flat;
    flat.axes = {oracle::linspace(0, 1, 31)};
    flat.values.assign(31, 0.0);
    CHECK_THROWS_AS((void)tensor_l2_error(flat, TensorCoefficients::zeros(spec)), DomainError);
}

TEST_CASE("projection is the best approximation") {
    const TensorBasisSpec spec({axis_basis(0, 1, 6, 3, Boundary::zero), axis_basis(0, 1, 5, 2, Boundary::free)});
    const GridSamples g = sample_grid([](double x, double y) { return std::sin(5 * x + y) + x * y * y; },
                                      oracle::linspace(0, 1, 57), oracle::linspace(0, 1, 43));
    const TensorCoefficients c = tensor_project(g, spec);
    const double best = tensor_l2_error(g, c);
    for (std::size_t f = 0; f < spec.dimension(); ++f) {
        for (double delta : {1e-3, -1e-3}) {
            std::vector<double> v = c.values();
            v[f] += delta;
            const double e = tensor_l2_error(g, TensorCoefficients(spec, v));
            CHECK(e > best);
            // Orthonormality gives the exact Pythagorean increase.
            CHECK(e * e - best * best == doctest::Approx(delta * delta).epsilon(1e-5));
        }
    }
}

TEST_CASE("sin-sin reconstruction and refinement") {
    const auto grid = oracle::linspace(0, 1, 257);
    const GridSamples g = sample_grid(sinsin, grid, grid);
    // Norm and residual measured against the function itself on a 2D
    // composite rule, independent of tensor_l2_error.
    auto true_error = [&](const TensorCoefficients& c) {
        const auto breaks = oracle::linspace(0, 1, 65);
        return std::sqrt(oracle::integrate_2d(
            [&](double x, double y) {
                const double pt[2] = {x, y};
                const double r = sinsin(x, y) - tensor_evaluate(c, pt);
                return r * r;
            },
            breaks, breaks, 3));
    };
    const double norm = 0.5;
    const TensorBasisSpec fine({axis_basis(0, 1, 32, 3, Boundary::free), axis_basis(0, 1, 32, 3, Boundary::free)});
    CHECK(true_error(tensor_project(g, fine)) / norm < 1e-3);

    for (Boundary boundary : {Boundary::zero, Boundary::free}) {
        double previous = 1e300;
        for (std::size_t n : {8u, 16u, 32u}) {
            const TensorBasisSpec spec({axis_basis(0, 1, n, 3, boundary), axis_basis(0, 1, n, 3, boundary)});
            const double e = tensor_l2_error(g, tensor_project(g, spec));
            CHECK(e < previous);
            previous = e;
        }
    }
}

TEST_CASE("function projection reproduces members of the tensor space") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal;
    for (int degree : {1, 2, 3}) {
        const auto interior = static_cast<std::size_t>(12 - degree - 1);
        const TensorBasisSpec spec({axis_basis(0, 1, interior, degree, Boundary::free),
                                    orthonormalize(BasisSpec(KnotVector(oracle::random_knots(rng, 0, 1, interior)),
                                                             degree, Boundary::free))});
        CHECK(spec.shape() == Shape{12, 12});
        std::vector<double> v(spec.dimension());
        for (double& e : v) e = normal(rng);
        const TensorCoefficients truth(spec, v);
        const TensorCoefficients back =
            tensor_project([&](std::span<const double> x) { return tensor_evaluate(truth, x); }, spec);
        double worst = 0.0;
        for (std::size_t f = 0; f < v.size(); ++f) worst = std::max(worst, std::abs(back.values()[f] - v[f]));
        CHECK(worst < 1e-8);
    }
    const TensorBasisSpec spec({axis_basis(0, 1, 4, 2, Boundary::zero), axis_basis(0, 1, 3, 3, Boundary::free)});
    const TensorCoefficients zero = tensor_project([](std::span<const double>) { return 0.0; }, spec);
    for (double a : zero.values()) CHECK(a == 0.0);
}
