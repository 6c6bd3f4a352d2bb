#pragma once

// Class-wise functional PCA in a shared orthonormal tensor basis and the
// eigenspace-residual classifier. Each class k embeds a sample with its own
// density g_k (state or domain transform) before projecting it; residuals
// are measured in the coefficient metric, which equals the L2 metric of the
// embedded functions restricted to the basis span.

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tensorfda/density_model.hpp"
#include "tensorfda/tensor_basis.hpp"
#include "tensorfda/topology_transform.hpp"

namespace tensorfda {

enum class TransformKind { none, state, domain };

[[nodiscard]] std::string_view to_string(TransformKind kind) noexcept;
/// "none", "state" or "domain"; ConfigError otherwise.
TransformKind parse_transform_kind(std::string_view name);

struct FpcaClassModel {
    int label = 0;
    Eigen::VectorXd mean;
    /// Full spectrum of the coefficient covariance, non-increasing, negative
    /// round-off clipped to 0.
    Eigen::VectorXd eigenvalues;
    /// Orthonormal eigenvectors of the components with eigenvalue above
    /// 1e-12 times the largest, one per column.
    Eigen::MatrixXd eigenvectors;
    /// Components used for projection (n_k); at most stored().
    std::size_t retained = 0;
    std::string density_id;
    TransformKind transform = TransformKind::none;

    [[nodiscard]] std::size_t stored() const noexcept { return static_cast<std::size_t>(eigenvectors.cols()); }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(mean.size()); }

    friend bool operator==(const FpcaClassModel& l, const FpcaClassModel& r);
};

/// Mean and eigendecomposition of the 1/(m-1) sample covariance of the
/// coefficient vectors. Each eigenvector's largest-magnitude entry is made
/// positive. retained starts at stored(). Throws InputError for fewer than
/// 2 samples or unequal lengths.
FpcaClassModel fit_class_fpca(const std::vector<Eigen::VectorXd>& coefficients, int label = 0);

/// Projects already-transformed samples onto the basis first. The samples
/// must share domain and transform tag.
FpcaClassModel fit_class_fpca(const std::vector<FunctionalSample>& samples, const TensorBasisSpec& basis,
                              int label = 0);

/// mean + sum_{i < n} <f - mean, e_i> e_i with n = min(count, stored()),
/// count defaulting to retained. Throws InputError on a length mismatch.
Eigen::VectorXd project_eigenspace(const Eigen::VectorXd& f, const FpcaClassModel& model,
                                   std::optional<std::size_t> count = std::nullopt);

/// || f - project_eigenspace(f, model, count) ||.
double residual_norm(const Eigen::VectorXd& f, const FpcaClassModel& model,
                     std::optional<std::size_t> count = std::nullopt);

/// K class models sharing one basis and one transform kind. Class k uses
/// densities[k] (unused for TransformKind::none).
class ClassifierModel {
public:
    ClassifierModel(TensorBasisSpec basis, TransformKind transform, std::vector<FpcaClassModel> classes,
                    std::vector<DensityModel> densities, std::optional<std::size_t> warp_resolution = std::nullopt);

    [[nodiscard]] const TensorBasisSpec& basis() const noexcept { return basis_; }
    [[nodiscard]] TransformKind transform() const noexcept { return transform_; }
    [[nodiscard]] const std::vector<FpcaClassModel>& classes() const noexcept { return classes_; }
    [[nodiscard]] const std::vector<DensityModel>& densities() const noexcept { return densities_; }
    [[nodiscard]] std::optional<std::size_t> warp_resolution() const noexcept { return warp_resolution_; }
    [[nodiscard]] std::size_t class_count() const noexcept { return classes_.size(); }
    [[nodiscard]] std::vector<int> labels() const;

    /// The sample in the topology of class k. Throws InputError on a domain
    /// mismatch.
    [[nodiscard]] FunctionalSample embed(const FunctionalSample& x, std::size_t k) const;
    /// Orthonormal coefficients of embed(x, k).
    [[nodiscard]] Eigen::VectorXd coefficients(const FunctionalSample& x, std::size_t k) const;

    /// Copy with retained counts replaced.
    [[nodiscard]] ClassifierModel with_retained(const std::vector<std::size_t>& counts) const;

    friend bool operator==(const ClassifierModel& l, const ClassifierModel& r);

private:
    TensorBasisSpec basis_;
    TransformKind transform_;
    std::vector<FpcaClassModel> classes_;
    std::vector<DensityModel> densities_;
    std::optional<std::size_t> warp_resolution_;
    std::vector<CdfModel> cdfs_;
};

struct ClassificationResult {
    int label = 0;
    std::size_t class_index = 0;
    std::vector<double> residuals;
    /// residual_k^2 / sum_j residual_j^2 (uniform when every residual is 0).
    std::vector<double> weights;
};

/// Decision from per-class residuals: argmin, ties to the lowest index.
ClassificationResult decide(std::vector<double> residuals, const std::vector<int>& labels);

ClassificationResult classify(const FunctionalSample& x, const ClassifierModel& model);

/// Coefficients of samples embedded with one topology (density unused and
/// may be null for TransformKind::none). Samples sharing a grid share one
/// domain warp and projector.
std::vector<Eigen::VectorXd> embedded_coefficients(const std::vector<FunctionalSample>& samples,
                                                   const TensorBasisSpec& basis, TransformKind kind,
                                                   const DensityModel* density,
                                                   std::optional<std::size_t> warp_resolution = std::nullopt);

/// Coefficients of every sample in every class topology: result[k][l].
std::vector<std::vector<Eigen::VectorXd>> class_coefficients(const std::vector<FunctionalSample>& samples,
                                                             const ClassifierModel& model);

std::vector<ClassificationResult> classify_batch(const std::vector<FunctionalSample>& samples,
                                                 const ClassifierModel& model);

/// Same from precomputed class_coefficients.
std::vector<ClassificationResult> classify_coefficients(const std::vector<std::vector<Eigen::VectorXd>>& coefficients,
                                                        const ClassifierModel& model);

/// Candidate n_k for class k maximizing validation accuracy with the other
/// classes held at their retained counts; ties go to the smaller count.
/// Throws InputError for empty candidates or validation data.
std::size_t select_components(const ClassifierModel& model, std::size_t k,
                              const std::vector<std::vector<Eigen::VectorXd>>& validation_coefficients,
                              const std::vector<int>& validation_labels, const std::vector<std::size_t>& candidates);

struct Evaluation {
    double accuracy = 0.0;
    std::vector<int> labels;  // row/column order of the confusion matrix
    /// confusion[t][p]: samples of true label labels[t] predicted labels[p].
    std::vector<std::vector<std::size_t>> confusion;
};

/// Labels are the sorted union of predicted and true labels.
/// Throws InputError on a length mismatch or empty input.
Evaluation evaluate(const std::vector<int>& predicted, const std::vector<int>& truth);
Evaluation evaluate(const std::vector<ClassificationResult>& results, const std::vector<int>& truth);

}  // namespace tensorfda
