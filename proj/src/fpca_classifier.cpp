#include "tensorfda/fpca_classifier.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tensorfda/errors.hpp"

namespace tensorfda {
namespace {

constexpr double kRelativeEigenFloor = 1e-12;
constexpr double kDomainTolerance = 1e-9;

Box basis_box(const TensorBasisSpec& basis) {
    Box b;
    for (const auto& ax : basis.axes()) {
        b.lo.push_back(ax.spec().a());
        b.hi.push_back(ax.spec().b());
    }
    return b;
}

bool same_box(const Box& a, const Box& b) {
    if (a.dims() != b.dims()) return false;
    for (std::size_t j = 0; j < a.dims(); ++j) {
        const double tol = kDomainTolerance * std::max(a.width(j), b.width(j));
        if (std::abs(a.lo[j] - b.lo[j]) > tol || std::abs(a.hi[j] - b.hi[j]) > tol) return false;
    }
    return true;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

TransformKind kind_of(DomainTag tag) {
    switch (tag) {
        case DomainTag::original: return TransformKind::none;
        case DomainTag::state_transformed: return TransformKind::state;
        case DomainTag::domain_transformed: return TransformKind::domain;
    }
    return TransformKind::none;
}

std::size_t effective_count(const FpcaClassModel& model, std::optional<std::size_t> count) {
    return std::min(count ? *count : model.retained, model.stored());
}

}  // namespace

std::string_view to_string(TransformKind kind) noexcept {
    switch (kind) {
        case TransformKind::none: return "none";
        case TransformKind::state: return "state";
        case TransformKind::domain: return "domain";
    }
    return "none";
}

TransformKind parse_transform_kind(std::string_view name) {
    if (name == "none") return TransformKind::none;
    if (name == "state") return TransformKind::state;
    if (name == "domain") return TransformKind::domain;
    throw ConfigError("unknown transform kind '" + std::string(name) + "' (expected none, state or domain)");
}

bool operator==(const FpcaClassModel& l, const FpcaClassModel& r) {
    auto same = [](const auto& a, const auto& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; };
    return l.label == r.label && same(l.mean, r.mean) && same(l.eigenvalues, r.eigenvalues) &&
           same(l.eigenvectors, r.eigenvectors) && l.retained == r.retained && l.density_id == r.density_id &&
           l.transform == r.transform;
}

FpcaClassModel fit_class_fpca(const std::vector<Eigen::VectorXd>& coefficients, int label) {
    const std::size_t m = coefficients.size();
    if (m < 2) throw InputError("fit_class_fpca: need at least 2 samples, got " + std::to_string(m));
    const Eigen::Index p = coefficients.front().size();
    if (p == 0) throw InputError("fit_class_fpca: empty coefficient vectors");
    Eigen::MatrixXd x(p, static_cast<Eigen::Index>(m));
    for (std::size_t l = 0; l < m; ++l) {
        if (coefficients[l].size() != p) throw InputError("fit_class_fpca: coefficient vectors differ in length");
        x.col(static_cast<Eigen::Index>(l)) = coefficients[l];
    }
    FpcaClassModel model;
    model.label = label;
    model.mean = x.rowwise().mean();
    const Eigen::MatrixXd centered = x.colwise() - model.mean;
    Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(m - 1);
    cov = 0.5 * (cov + cov.transpose()).eval();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw ConditioningError("fit_class_fpca: eigendecomposition failed");
    // Eigen returns ascending order.
    const Eigen::VectorXd values = solver.eigenvalues().reverse();
    const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
    model.eigenvalues = values.cwiseMax(0.0);
    const double top = model.eigenvalues.size() > 0 ? model.eigenvalues(0) : 0.0;
    Eigen::Index kept = 0;
    while (kept < p && top > 0.0 && model.eigenvalues(kept) > kRelativeEigenFloor * top) ++kept;
    model.eigenvectors = vectors.leftCols(kept);
    for (Eigen::Index c = 0; c < kept; ++c) {
        Eigen::Index arg = 0;
        model.eigenvectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (model.eigenvectors(arg, c) < 0.0) model.eigenvectors.col(c) *= -1.0;
    }
    model.retained = static_cast<std::size_t>(kept);
    return model;
}

FpcaClassModel fit_class_fpca(const std::vector<FunctionalSample>& samples, const TensorBasisSpec& basis, int label) {
    if (samples.size() < 2) throw InputError("fit_class_fpca: need at least 2 samples");
    std::vector<Eigen::VectorXd> coeffs;
    coeffs.reserve(samples.size());
    std::optional<TensorProjector> projector;
    for (const FunctionalSample& s : samples) {
        s.validate();
        if (!same_box(s.domain, samples.front().domain) || s.tag != samples.front().tag) {
            throw InputError("fit_class_fpca: samples differ in domain or transform");
        }
        if (!projector || projector->axes() != s.axes) projector.emplace(basis, s.axes);
        coeffs.push_back(to_vector(projector->apply(s.values)));
    }
    FpcaClassModel model = fit_class_fpca(coeffs, label);
    model.transform = kind_of(samples.front().tag);
    return model;
}

Eigen::VectorXd project_eigenspace(const Eigen::VectorXd& f, const FpcaClassModel& model,
                                   std::optional<std::size_t> count) {
    if (f.size() != model.mean.size()) {
        throw InputError("project_eigenspace: coefficient length " + std::to_string(f.size()) + " differs from " +
                         std::to_string(model.mean.size()));
    }
    const auto n = static_cast<Eigen::Index>(effective_count(model, count));
    if (n == 0) return model.mean;
    const auto e = model.eigenvectors.leftCols(n);
    return model.mean + e * (e.transpose() * (f - model.mean));
}

double residual_norm(const Eigen::VectorXd& f, const FpcaClassModel& model, std::optional<std::size_t> count) {
    return (f - project_eigenspace(f, model, count)).norm();
}

ClassifierModel::ClassifierModel(TensorBasisSpec basis, TransformKind transform, std::vector<FpcaClassModel> classes,
                                 std::vector<DensityModel> densities, std::optional<std::size_t> warp_resolution)
    : basis_(std::move(basis)),
      transform_(transform),
      classes_(std::move(classes)),
      densities_(std::move(densities)),
      warp_resolution_(warp_resolution) {
    if (classes_.empty()) throw InputError("ClassifierModel: no classes");
    for (const auto& c : classes_) {
        if (c.dimension() != basis_.dimension()) throw InputError("ClassifierModel: class model and basis differ");
    }
    if (transform_ != TransformKind::none) {
        if (densities_.size() != classes_.size()) throw InputError("ClassifierModel: one density per class required");
        const Box target = transform_ == TransformKind::domain ? Box::unit(basis_.dims()) : densities_.front().domain();
        if (!same_box(basis_box(basis_), target)) {
            throw InputError("ClassifierModel: basis domain does not match the embedded domain");
        }
        for (const auto& g : densities_) cdfs_.emplace_back(g);
    }
}

std::vector<int> ClassifierModel::labels() const {
    std::vector<int> out;
    for (const auto& c : classes_) out.push_back(c.label);
    return out;
}

FunctionalSample ClassifierModel::embed(const FunctionalSample& x, std::size_t k) const {
    x.validate();
    if (k >= classes_.size()) throw InputError("ClassifierModel::embed: class index out of range");
    switch (transform_) {
        case TransformKind::none:
            if (!same_box(x.domain, basis_box(basis_))) throw InputError("classify: sample domain differs from the basis");
            return x;
        case TransformKind::state: return state_transform(x, densities_[k]);
        case TransformKind::domain: return domain_transform(x, cdfs_[k], warp_resolution_);
    }
    return x;
}

Eigen::VectorXd ClassifierModel::coefficients(const FunctionalSample& x, std::size_t k) const {
    const FunctionalSample e = embed(x, k);
    return to_vector(TensorProjector(basis_, e.axes).apply(e.values));
}

ClassifierModel ClassifierModel::with_retained(const std::vector<std::size_t>& counts) const {
    if (counts.size() != classes_.size()) throw InputError("with_retained: one count per class required");
    ClassifierModel out = *this;
    for (std::size_t k = 0; k < counts.size(); ++k) out.classes_[k].retained = counts[k];
    return out;
}

bool operator==(const ClassifierModel& l, const ClassifierModel& r) {
    return l.basis_ == r.basis_ && l.transform_ == r.transform_ && l.classes_ == r.classes_ &&
           l.densities_ == r.densities_ && l.warp_resolution_ == r.warp_resolution_;
}

ClassificationResult decide(std::vector<double> residuals, const std::vector<int>& labels) {
    if (residuals.empty() || residuals.size() != labels.size()) throw InputError("decide: residual/label mismatch");
    ClassificationResult out;
    out.class_index = static_cast<std::size_t>(std::min_element(residuals.begin(), residuals.end()) - residuals.begin());
    out.label = labels[out.class_index];
    double total = 0.0;
    for (double r : residuals) total += r * r;
    out.weights.resize(residuals.size());
    for (std::size_t k = 0; k < residuals.size(); ++k) {
        out.weights[k] = total > 0.0 ? residuals[k] * residuals[k] / total : 1.0 / static_cast<double>(residuals.size());
    }
    out.residuals = std::move(residuals);
    return out;
}

ClassificationResult classify(const FunctionalSample& x, const ClassifierModel& model) {
    std::vector<double> residuals;
    for (std::size_t k = 0; k < model.class_count(); ++k) {
        residuals.push_back(residual_norm(model.coefficients(x, k), model.classes()[k]));
    }
    return decide(std::move(residuals), model.labels());
}

std::vector<Eigen::VectorXd> embedded_coefficients(const std::vector<FunctionalSample>& samples,
                                                   const TensorBasisSpec& basis, TransformKind kind,
                                                   const DensityModel* density,
                                                   std::optional<std::size_t> warp_resolution) {
    std::vector<Eigen::VectorXd> out;
    if (samples.empty()) return out;
    if (kind != TransformKind::none && density == nullptr) {
        throw InputError("embedded_coefficients: transform requires a density");
    }
    const Box target = kind == TransformKind::domain ? Box::unit(basis.dims()) : basis_box(basis);
    out.reserve(samples.size());
    std::optional<CdfModel> cdf;
    if (kind == TransformKind::domain) cdf.emplace(*density);
    std::optional<TensorProjector> projector;
    std::optional<DomainWarp> warp;
    std::vector<double> scale;
    const FunctionalSample* grid = nullptr;  // sample whose grid the caches belong to
    for (const auto& s : samples) {
        s.validate();
        if (s.tag != DomainTag::original) throw InputError("classify: sample is already transformed");
        if (grid == nullptr || s.axes != grid->axes || !same_box(s.domain, grid->domain)) {
            grid = &s;
            scale.clear();
            switch (kind) {
                case TransformKind::none:
                    if (!same_box(s.domain, target)) throw InputError("classify: sample domain differs from the basis");
                    projector.emplace(basis, s.axes);
                    break;
                case TransformKind::state: {
                    FunctionalSample unit = s;
                    std::fill(unit.values.begin(), unit.values.end(), 1.0);
                    scale = state_transform(unit, *density).values;
                    projector.emplace(basis, s.axes);
                    break;
                }
                case TransformKind::domain:
                    if (!same_box(s.domain, density->domain())) {
                        throw InputError("classify: sample and density domains differ");
                    }
                    warp = make_domain_warp(*cdf, s.axes, warp_resolution);
                    projector.emplace(basis, warp->output_axes);
                    break;
            }
        }
        std::vector<double> values;
        switch (kind) {
            case TransformKind::none: values = s.values; break;
            case TransformKind::state:
                values = s.values;
                for (std::size_t q = 0; q < values.size(); ++q) values[q] *= scale[q];
                break;
            case TransformKind::domain: values = domain_transform(s, *warp).values; break;
        }
        out.push_back(to_vector(projector->apply(values)));
    }
    return out;
}

std::vector<std::vector<Eigen::VectorXd>> class_coefficients(const std::vector<FunctionalSample>& samples,
                                                             const ClassifierModel& model) {
    std::vector<std::vector<Eigen::VectorXd>> out;
    for (std::size_t k = 0; k < model.class_count(); ++k) {
        const DensityModel* g = model.transform() == TransformKind::none ? nullptr : &model.densities()[k];
        out.push_back(embedded_coefficients(samples, model.basis(), model.transform(), g, model.warp_resolution()));
    }
    return out;
}

std::vector<ClassificationResult> classify_coefficients(const std::vector<std::vector<Eigen::VectorXd>>& coefficients,
                                                        const ClassifierModel& model) {
    if (coefficients.size() != model.class_count()) throw InputError("classify_coefficients: one row per class required");
    const std::size_t n = coefficients.front().size();
    std::vector<ClassificationResult> out;
    out.reserve(n);
    const std::vector<int> labels = model.labels();
    for (std::size_t l = 0; l < n; ++l) {
        std::vector<double> residuals;
        for (std::size_t k = 0; k < model.class_count(); ++k) {
            residuals.push_back(residual_norm(coefficients[k].at(l), model.classes()[k]));
        }
        out.push_back(decide(std::move(residuals), labels));
    }
    return out;
}

std::vector<ClassificationResult> classify_batch(const std::vector<FunctionalSample>& samples,
                                                 const ClassifierModel& model) {
    if (samples.empty()) return {};
    return classify_coefficients(class_coefficients(samples, model), model);
}

std::size_t select_components(const ClassifierModel& model, std::size_t k,
                              const std::vector<std::vector<Eigen::VectorXd>>& validation_coefficients,
                              const std::vector<int>& validation_labels, const std::vector<std::size_t>& candidates) {
    if (candidates.empty()) throw InputError("select_components: no candidate counts");
    if (validation_labels.empty()) throw InputError("select_components: empty validation set");
    if (k >= model.class_count()) throw InputError("select_components: class index out of range");
    if (validation_coefficients.size() != model.class_count() ||
        validation_coefficients[k].size() != validation_labels.size()) {
        throw InputError("select_components: validation coefficients do not match the labels");
    }
    std::vector<std::size_t> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    // Residuals of the other classes do not depend on the candidate.
    const std::size_t n = validation_labels.size();
    std::vector<std::vector<double>> fixed(model.class_count(), std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < model.class_count(); ++j) {
        if (j == k) continue;
        for (std::size_t l = 0; l < n; ++l) fixed[j][l] = residual_norm(validation_coefficients[j][l], model.classes()[j]);
    }
    const std::vector<int> labels = model.labels();
    std::size_t best = sorted.front();
    std::size_t best_correct = 0;
    bool first = true;
    for (std::size_t c : sorted) {
        std::size_t correct = 0;
        for (std::size_t l = 0; l < n; ++l) {
            std::vector<double> r(model.class_count());
            for (std::size_t j = 0; j < model.class_count(); ++j) {
                r[j] = j == k ? residual_norm(validation_coefficients[k][l], model.classes()[k], c) : fixed[j][l];
            }
            if (decide(std::move(r), labels).label == validation_labels[l]) ++correct;
        }
        if (first || correct > best_correct) {
            best = c;
            best_correct = correct;
            first = false;
        }
    }
    return best;
}

Evaluation evaluate(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw InputError("evaluate: predictions and labels differ in length");
    if (truth.empty()) throw InputError("evaluate: no samples");
    Evaluation out;
    out.labels = truth;
    out.labels.insert(out.labels.end(), predicted.begin(), predicted.end());
    std::sort(out.labels.begin(), out.labels.end());
    out.labels.erase(std::unique(out.labels.begin(), out.labels.end()), out.labels.end());
    const std::size_t k = out.labels.size();
    out.confusion.assign(k, std::vector<std::size_t>(k, 0));
    auto index = [&](int label) {
        return static_cast<std::size_t>(std::lower_bound(out.labels.begin(), out.labels.end(), label) - out.labels.begin());
    };
    std::size_t correct = 0;
    for (std::size_t l = 0; l < truth.size(); ++l) {
        ++out.confusion[index(truth[l])][index(predicted[l])];
        if (truth[l] == predicted[l]) ++correct;
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    return out;
}

Evaluation evaluate(const std::vector<ClassificationResult>& results, const std::vector<int>& truth) {
    std::vector<int> predicted;
    predicted.reserve(results.size());
    for (const auto& r : results) predicted.push_back(r.label);
    return evaluate(predicted, truth);
}

}  // namespace tensorfda
