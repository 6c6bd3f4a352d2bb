#pragma once

// End-to-end classification pipeline: load -> split -> (gradient) ->
// (linearize) -> knot selection per class -> density per class -> embed ->
// shared-lattice projection -> FPCA -> component selection -> evaluation.
//
// Configuration is one JSON object; every stage is also callable on its own.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tensorfda/archive.hpp"
#include "tensorfda/imaging.hpp"
#include "tensorfda/synthetic.hpp"

namespace tensorfda {

enum class DatasetFormat { synthetic, csv, idx };
enum class Linearization { hilbert, column_major, grid };

struct CsvSource {
    std::filesystem::path path;
    int label = 0;
};

struct PipelineConfig {
    // Dataset.
    DatasetFormat format = DatasetFormat::synthetic;
    SyntheticConfig synthetic = default_two_class_config(350, 1);
    std::vector<CsvSource> csv;
    std::filesystem::path idx_images;
    std::filesystem::path idx_labels;
    std::vector<int> idx_classes;        // empty: every label
    std::size_t idx_limit_per_class = 0;  // 0: no limit
    bool gradient = false;
    Linearization linearize = Linearization::hilbert;

    // Split (stratified per class).
    double train_fraction = 4.0 / 7.0;
    double validation_fraction = 1.0 / 7.0;
    double test_fraction = 2.0 / 7.0;
    std::uint64_t seed = 1;

    // Knot selection.
    std::size_t max_leaves = 20;
    std::size_t min_cell_points = 5;
    std::size_t noise_trials = 50;
    std::optional<std::size_t> knot_count;  // overrides the noise-curve rule

    // Density.
    std::vector<double> bandwidth;
    double floor_fraction = kDefaultFloorFraction;  // times the uniform height
    std::size_t density_resolution = 0;
    bool uniform_density = false;

    // Embedding and basis.
    TransformKind transform = TransformKind::state;
    int degree = 3;
    std::size_t interior_knots = 30;  // per axis
    Boundary boundary = Boundary::free;
    std::optional<std::size_t> warp_resolution;

    // FPCA.
    std::vector<std::size_t> candidates{1, 2, 3, 4, 5, 6, 7, 8};

    // Outputs.
    bool svg = false;
    std::size_t plot_samples = 3;
};

/// Unknown keys and invalid values throw ConfigError.
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
/// Every field, defaults included; FNV-1a of its canonical dump is the
/// provenance config hash.
nlohmann::json config_to_json(const PipelineConfig& config);

struct Dataset {
    std::vector<FunctionalSample> samples;
    std::vector<int> labels;
};

/// Loads and preprocesses (gradient, linearization) the configured data.
Dataset load_dataset(const PipelineConfig& config);
/// Image preprocessing alone.
FunctionalSample image_to_sample(const ImageGrid& img, bool gradient, Linearization linearize);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Per class, shuffles the indices (seeded Fisher-Yates) and cuts them by
/// the rounded fractions. ConfigError unless every fraction is positive,
/// they sum to 1 and each class gets >= 2 training, >= 1 validation and
/// >= 1 test samples.
Split split_dataset(const std::vector<int>& labels, const PipelineConfig& config);

/// Sorted distinct labels.
std::vector<int> distinct_labels(const std::vector<int>& labels);

/// Tree fit on the pointwise mean of the class samples, stopping curves
/// against the noise reference and the selected knot candidates.
DdkDiagnostics run_ddk(const std::vector<FunctionalSample>& class_samples, int label, const PipelineConfig& config);

/// Kernel density of the candidates over `domain` (uniform when fewer than
/// 2 candidates or when uniform_density is set).
DensityModel class_density(const DdkDiagnostics& ddk, const Box& domain, const PipelineConfig& config);

/// Uniform-lattice orthonormal tensor basis on `domain`.
TensorBasisSpec lattice_basis(const PipelineConfig& config, const Box& domain);

/// Domain of the embedded data: the sample domain, or the unit cube for the
/// domain transform.
Box embedded_domain(const PipelineConfig& config, const Box& sample_domain);

struct TrainingResult {
    ModelArchive archive;
    double validation_accuracy = 0.0;
};

/// Knot selection, densities, FPCA and component selection on the split.
TrainingResult train_classifier(const PipelineConfig& config, const Dataset& data, const Split& split);

struct PipelineReport {
    TrainingResult training;
    Evaluation test;
    nlohmann::json metrics;
    std::vector<std::filesystem::path> written;
};

/// Runs every stage. With an output directory writes model.json,
/// metrics.json and plot-data CSVs (plus SVGs when enabled). Stage errors
/// are rethrown with the stage name prefixed.
PipelineReport run_pipeline(const PipelineConfig& config,
                            const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Subsets by index.
Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices);

/// Plot-data CSVs and SVGs for a trained model (1D data only for curves).
std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& dir, const ModelArchive& archive,
                                                   const Dataset& test, const PipelineConfig& config);

/// Polyline chart of the columns against x.
void write_svg_lines(const std::filesystem::path& path, const std::string& title, const std::vector<double>& x,
                     const std::vector<std::vector<double>>& columns, const std::vector<std::string>& names);

}  // namespace tensorfda
