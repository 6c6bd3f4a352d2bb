#include "tensorfda/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "tensorfda/errors.hpp"

namespace tensorfda {

double kl_eigenfunction(std::size_t i, double t) {
    return std::numbers::sqrt2 * std::sin(static_cast<double>(i) * std::numbers::pi * t);
}

double KlClassSpec::mean(double t) const {
    const double z = (t - mean_center) / mean_width;
    return mean_height * std::exp(-z * z);
}

SyntheticConfig default_two_class_config(std::size_t samples_per_class, std::uint64_t seed) {
    SyntheticConfig c;
    c.samples_per_class = samples_per_class;
    c.seed = seed;
    c.noise_sd = 0.01;
    KlClassSpec a;
    a.label = 0;
    a.mean_center = 0.3;
    a.mean_width = 0.08;
    KlClassSpec b;
    b.label = 1;
    b.mean_center = 0.7;
    b.mean_width = 0.08;
    b.mode_offset = 1;
    c.classes = {a, b};
    return c;
}

LabeledSamples generate_kl_dataset(const SyntheticConfig& config) {
    if (config.classes.empty()) throw ConfigError("generate_kl_dataset: no classes");
    if (config.points < 2) throw ConfigError("generate_kl_dataset: need at least 2 points");
    if (!(config.noise_sd >= 0.0)) throw ConfigError("generate_kl_dataset: noise_sd must be non-negative");
    std::vector<double> t(config.points);
    for (std::size_t q = 0; q < t.size(); ++q) t[q] = static_cast<double>(q) / static_cast<double>(t.size() - 1);
    t.back() = 1.0;

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal;
    LabeledSamples out;
    for (const KlClassSpec& spec : config.classes) {
        for (double l : spec.eigenvalues) {
            if (!(l >= 0.0)) throw ConfigError("generate_kl_dataset: eigenvalues must be non-negative");
        }
        // Tabulate mu and sqrt(lambda_i) e_i once per class.
        std::vector<double> mu(t.size());
        for (std::size_t q = 0; q < t.size(); ++q) mu[q] = spec.mean(t[q]);
        std::vector<std::vector<double>> modes;
        for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
            std::vector<double> m(t.size());
            const double s = std::sqrt(spec.eigenvalues[i]);
            for (std::size_t q = 0; q < t.size(); ++q) m[q] = s * kl_eigenfunction(i + 1 + spec.mode_offset, t[q]);
            modes.push_back(std::move(m));
        }
        for (std::size_t n = 0; n < config.samples_per_class; ++n) {
            std::vector<double> y = mu;
            for (const auto& m : modes) {
                const double z = normal(rng);
                for (std::size_t q = 0; q < y.size(); ++q) y[q] += z * m[q];
            }
            if (config.noise_sd > 0.0) {
                for (double& v : y) v += config.noise_sd * normal(rng);
            }
            out.samples.push_back(make_sample(t, std::move(y)));
            out.labels.push_back(spec.label);
        }
    }
    return out;
}

}  // namespace tensorfda
