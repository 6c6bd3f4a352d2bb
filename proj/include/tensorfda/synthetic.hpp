#pragma once

// Synthetic labeled curves on [0, 1] drawn from a truncated Karhunen-Loeve
// model x(t) = mu(t) + sum_i sqrt(lambda_i) Z_i e_i(t) + noise, with
// e_i(t) = sqrt(2) sin(i pi t) and independent standard normal Z_i.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tensorfda/topology_transform.hpp"

namespace tensorfda {

/// Orthonormal eigenfunction sqrt(2) sin(i pi t), i >= 1.
double kl_eigenfunction(std::size_t i, double t);

struct KlClassSpec {
    int label = 0;
    /// mu(t) = height * exp(-((t - center) / width)^2).
    double mean_center = 0.5;
    double mean_width = 0.1;
    double mean_height = 1.0;
    /// lambda_1, lambda_2, ... attached to e_{1 + mode_offset}, ...
    std::vector<double> eigenvalues{0.04, 0.02, 0.01};
    std::size_t mode_offset = 0;

    [[nodiscard]] double mean(double t) const;
};

struct SyntheticConfig {
    std::vector<KlClassSpec> classes;
    std::size_t samples_per_class = 100;
    std::size_t points = 257;
    double noise_sd = 0.0;
    std::uint64_t seed = 0;
};

struct LabeledSamples {
    std::vector<FunctionalSample> samples;
    std::vector<int> labels;
};

/// Two bump-mean classes with 3 components each (the default test set).
SyntheticConfig default_two_class_config(std::size_t samples_per_class, std::uint64_t seed);

/// Samples class by class in order, on `points` equispaced abscissae.
/// Throws ConfigError for fewer than 2 points or no classes.
LabeledSamples generate_kl_dataset(const SyntheticConfig& config);

}  // namespace tensorfda
