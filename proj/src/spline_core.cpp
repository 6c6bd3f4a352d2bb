#include "tensorfda/spline_core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "tensorfda/errors.hpp"
#include "tensorfda/quadrature.hpp"

namespace tensorfda {
namespace {

constexpr double kCoincidentKnotGap = 1e-12;
constexpr double kDomainSlack = 1e-12;
constexpr int kMaxDegree = 30;

double clamp_to_domain(double x, double a, double b, const char* where) {
    const double slack = kDomainSlack * (b - a);
    if (!(x >= a - slack && x <= b + slack)) {
        throw DomainError(std::string(where) + ": x = " + std::to_string(x) + " outside [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return std::clamp(x, a, b);
}

}  // namespace

// ---------------------------------------------------------------- KnotVector

KnotVector::KnotVector(std::vector<double> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw InputError("KnotVector: need at least two knots");
    const double span = knots_.back() - knots_.front();
    if (!(span > 0.0) || !std::isfinite(span)) throw InputError("KnotVector: empty or non-finite domain");
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        const double gap = knots_[i + 1] - knots_[i];
        if (!(gap > 0.0)) throw InputError("KnotVector: knots must be strictly increasing");
        if (gap < kCoincidentKnotGap * span) {
            throw ConditioningError("KnotVector: knots " + std::to_string(i) + " and " +
                                    std::to_string(i + 1) + " nearly coincide");
        }
    }
}

KnotVector KnotVector::uniform(double a, double b, std::size_t interior) {
    std::vector<double> k(interior + 2);
    const double n = static_cast<double>(interior + 1);
    for (std::size_t i = 0; i < k.size(); ++i) {
        k[i] = a + (b - a) * (static_cast<double>(i) / n);
    }
    k.back() = b;
    return KnotVector(std::move(k));
}

std::size_t KnotVector::interval_of(double x) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    if (it == knots_.begin()) return 0;
    const auto j = static_cast<std::size_t>(it - knots_.begin()) - 1;
    return std::min(j, knots_.size() - 2);
}

// ----------------------------------------------------------------- BasisSpec

BasisSpec::BasisSpec(KnotVector knots, int degree, Boundary boundary)
    : knots_(std::move(knots)), degree_(degree), boundary_(boundary) {
    if (degree_ < 0 || degree_ > kMaxDegree) {
        throw InputError("BasisSpec: degree must lie in [0, " + std::to_string(kMaxDegree) + "]");
    }
    const auto k = static_cast<std::size_t>(degree_);
    const std::size_t n = knots_.interior_count();
    if (knots_.size() < k + 2) {
        throw InputError("BasisSpec: degree " + std::to_string(degree_) + " needs at least " +
                         std::to_string(k + 2) + " knots");
    }
    dimension_ = boundary_ == Boundary::zero ? n - k + 1 : n + k + 1;
    offset_ = boundary_ == Boundary::zero ? degree_ : 0;

    padded_.resize(knots_.size() + 2 * k);
    const double h_left = knots_[1] - knots_[0];
    const double h_right = knots_[n + 1] - knots_[n];
    for (std::size_t q = 0; q < padded_.size(); ++q) {
        const auto p = static_cast<std::ptrdiff_t>(q) - degree_;
        if (p < 0) {
            padded_[q] = knots_.a() + static_cast<double>(p) * h_left;
        } else if (p > static_cast<std::ptrdiff_t>(n + 1)) {
            padded_[q] = knots_.b() + static_cast<double>(p - static_cast<std::ptrdiff_t>(n + 1)) * h_right;
        } else {
            padded_[q] = knots_[static_cast<std::size_t>(p)];
        }
    }
}

Interval BasisSpec::support(std::size_t index) const {
    const auto q = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(index) + offset_);
    return {std::max(padded_[q], a()), std::min(padded_[q + static_cast<std::size_t>(degree_) + 1], b())};
}

std::ptrdiff_t BasisSpec::nonzero_values(double x, std::span<double> out) const {
    const auto k = static_cast<std::size_t>(degree_);
    const std::size_t j = knots_.interval_of(x);
    const std::size_t span_index = j + k;  // padded index of the knot interval

    // Cox-de Boor triangle (left/right differences form).
    double left[kMaxDegree + 1];
    double right[kMaxDegree + 1];
    out[0] = 1.0;
    for (std::size_t d = 1; d <= k; ++d) {
        left[d] = x - padded_[span_index + 1 - d];
        right[d] = padded_[span_index + d] - x;
        double saved = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            const double temp = out[r] / (right[r + 1] + left[d - r]);
            out[r] = saved + right[r + 1] * temp;
            saved = left[d - r] * temp;
        }
        out[d] = saved;
    }
    return static_cast<std::ptrdiff_t>(j) - offset_;
}

double bspline_evaluate(const BasisSpec& spec, std::size_t index, double x) {
    if (index >= spec.dimension()) {
        throw DomainError("bspline_evaluate: index " + std::to_string(index) + " out of range [0, " +
                          std::to_string(spec.dimension()) + ")");
    }
    x = clamp_to_domain(x, spec.a(), spec.b(), "bspline_evaluate");
    std::vector<double> values(static_cast<std::size_t>(spec.degree()) + 1);
    const std::ptrdiff_t first = spec.nonzero_values(x, values);
    const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(index) - first;
    if (r < 0 || r > spec.degree()) return 0.0;
    return values[static_cast<std::size_t>(r)];
}

Eigen::VectorXd basis_evaluate_all(const BasisSpec& spec, double x) {
    x = clamp_to_domain(x, spec.a(), spec.b(), "basis_evaluate_all");
    Eigen::VectorXd all = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.dimension()));
    std::vector<double> values(static_cast<std::size_t>(spec.degree()) + 1);
    const std::ptrdiff_t first = spec.nonzero_values(x, values);
    for (std::size_t r = 0; r < values.size(); ++r) {
        const std::ptrdiff_t i = first + static_cast<std::ptrdiff_t>(r);
        if (i >= 0 && i < all.size()) all(i) = values[r];
    }
    return all;
}

Eigen::MatrixXd basis_matrix(const BasisSpec& spec, std::span<const double> xs) {
    const auto dim = static_cast<Eigen::Index>(spec.dimension());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()), dim);
    std::vector<double> values(static_cast<std::size_t>(spec.degree()) + 1);
    for (std::size_t row = 0; row < xs.size(); ++row) {
        const double x = clamp_to_domain(xs[row], spec.a(), spec.b(), "basis_matrix");
        const std::ptrdiff_t first = spec.nonzero_values(x, values);
        for (std::size_t r = 0; r < values.size(); ++r) {
            const std::ptrdiff_t i = first + static_cast<std::ptrdiff_t>(r);
            if (i >= 0 && i < dim) out(static_cast<Eigen::Index>(row), i) = values[r];
        }
    }
    return out;
}

Eigen::MatrixXd gram_matrix(const BasisSpec& spec) {
    const auto dim = static_cast<Eigen::Index>(spec.dimension());
    const auto k = static_cast<std::size_t>(spec.degree());
    const GaussRule& rule = gauss_legendre(k + 1);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<double> values(k + 1);
    const auto knots = spec.knots().values();
    for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
        const double mid = 0.5 * (knots[j] + knots[j + 1]);
        const double half = 0.5 * (knots[j + 1] - knots[j]);
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double x = mid + half * rule.nodes[g];
            const double w = half * rule.weights[g];
            const std::ptrdiff_t first = spec.nonzero_values(x, values);
            for (std::size_t r = 0; r <= k; ++r) {
                const std::ptrdiff_t i = first + static_cast<std::ptrdiff_t>(r);
                if (i < 0 || i >= dim) continue;
                for (std::size_t s = r; s <= k; ++s) {
                    const std::ptrdiff_t l = first + static_cast<std::ptrdiff_t>(s);
                    if (l < 0 || l >= dim) continue;
                    gram(i, l) += w * values[r] * values[s];
                }
            }
        }
    }
    gram.triangularView<Eigen::StrictlyLower>() = gram.transpose().triangularView<Eigen::StrictlyLower>();
    return gram;
}

// ---------------------------------------------------------- OrthonormalBasis

OrthonormalBasis::OrthonormalBasis(BasisSpec spec, Eigen::MatrixXd change_of_basis, OrthoScheme scheme)
    : spec_(std::move(spec)), change_(std::move(change_of_basis)), scheme_(scheme) {
    const auto dim = static_cast<Eigen::Index>(spec_.dimension());
    if (change_.rows() != dim || change_.cols() != dim) {
        throw InputError("OrthonormalBasis: change of basis must be " + std::to_string(dim) + " x " +
                         std::to_string(dim));
    }
}

double OrthonormalBasis::evaluate(std::size_t index, double x) const {
    if (index >= dimension()) throw DomainError("OrthonormalBasis::evaluate: index out of range");
    return evaluate_all(x)(static_cast<Eigen::Index>(index));
}

Eigen::VectorXd OrthonormalBasis::evaluate_all(double x) const {
    return change_.transpose() * basis_evaluate_all(spec_, x);
}

Eigen::MatrixXd OrthonormalBasis::evaluation_matrix(std::span<const double> xs) const {
    return basis_matrix(spec_, xs) * change_;
}

namespace {

constexpr double kSingularGram = 1e-14;
constexpr double kDegenerateLevel = 1e-12;
constexpr double kOrthonormalityCheck = 1e-10;

Eigen::MatrixXd cholesky_change(const Eigen::MatrixXd& gram) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw ConditioningError("orthonormalize: Gram matrix is not positive definite");
    const auto dim = gram.rows();
    Eigen::MatrixXd upper = llt.matrixU();
    return upper.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(dim, dim));
}

// Returns false when some pyramid level is numerically degenerate.
bool dyadic_change(const Eigen::MatrixXd& gram, int degree, Eigen::MatrixXd& change) {
    const auto dim = gram.rows();
    const Eigen::Index block = std::max(degree, 1);
    const Eigen::Index blocks = (dim + block - 1) / block;

    int top_level = 0;
    for (Eigen::Index b = 0; b < blocks; ++b) {
        top_level = std::max(top_level, std::countr_zero(static_cast<unsigned long long>(b + 1)));
    }

    change = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd done(dim, 0);  // orthonormal columns from lower levels
    for (int level = 0; level <= top_level; ++level) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index b = 0; b < blocks; ++b) {
            if (std::countr_zero(static_cast<unsigned long long>(b + 1)) != level) continue;
            for (Eigen::Index i = b * block; i < std::min(dim, (b + 1) * block); ++i) members.push_back(i);
        }
        if (members.empty()) continue;
        const auto width = static_cast<Eigen::Index>(members.size());
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(dim, width);
        for (Eigen::Index c = 0; c < width; ++c) v(members[static_cast<std::size_t>(c)], c) = 1.0;
        if (done.cols() > 0) {
            for (int pass = 0; pass < 2; ++pass) v -= done * (done.transpose() * (gram * v));
        }
        Eigen::MatrixXd m = v.transpose() * gram * v;
        m = 0.5 * (m + m.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
        if (eig.info() != Eigen::Success) return false;
        const Eigen::VectorXd& lambda = eig.eigenvalues();
        if (!(lambda.minCoeff() > kDegenerateLevel * lambda.maxCoeff())) return false;
        const Eigen::MatrixXd inv_sqrt =
            eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
        const Eigen::MatrixXd w = v * inv_sqrt;
        for (Eigen::Index c = 0; c < width; ++c) change.col(members[static_cast<std::size_t>(c)]) = w.col(c);
        Eigen::MatrixXd grown(dim, done.cols() + width);
        grown << done, w;
        done = std::move(grown);
    }
    const Eigen::MatrixXd check = change.transpose() * gram * change - Eigen::MatrixXd::Identity(dim, dim);
    return check.cwiseAbs().maxCoeff() < kOrthonormalityCheck;
}

}  // namespace

OrthonormalBasis orthonormalize(const BasisSpec& spec, OrthoScheme scheme) {
    const Eigen::MatrixXd gram = gram_matrix(spec);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > kSingularGram * hi)) {
        throw ConditioningError("orthonormalize: Gram matrix is numerically singular (lambda_min / lambda_max = " +
                                std::to_string(lo / hi) + ")");
    }
    if (scheme == OrthoScheme::dyadic) {
        Eigen::MatrixXd change;
        if (dyadic_change(gram, spec.degree(), change)) {
            return OrthonormalBasis(spec, std::move(change), OrthoScheme::dyadic);
        }
    }
    return OrthonormalBasis(spec, cholesky_change(gram), OrthoScheme::cholesky);
}

// -------------------------------------------------------------------- Spline

Spline::Spline(BasisSpec spec, Eigen::VectorXd bspline_coefficients)
    : spec_(std::move(spec)), kind_(BasisKind::bspline), coefficients_(bspline_coefficients),
      bspline_(std::move(bspline_coefficients)) {
    if (static_cast<std::size_t>(bspline_.size()) != spec_.dimension()) {
        throw InputError("Spline: coefficient count does not match basis dimension");
    }
}

Spline::Spline(const OrthonormalBasis& basis, Eigen::VectorXd coefficients)
    : spec_(basis.spec()), kind_(BasisKind::orthonormal), coefficients_(std::move(coefficients)) {
    if (static_cast<std::size_t>(coefficients_.size()) != spec_.dimension()) {
        throw InputError("Spline: coefficient count does not match basis dimension");
    }
    bspline_ = basis.change_of_basis() * coefficients_;
}

double Spline::operator()(double x) const {
    x = clamp_to_domain(x, spec_.a(), spec_.b(), "Spline");
    std::vector<double> values(static_cast<std::size_t>(spec_.degree()) + 1);
    const std::ptrdiff_t first = spec_.nonzero_values(x, values);
    double sum = 0.0;
    for (std::size_t r = 0; r < values.size(); ++r) {
        const std::ptrdiff_t i = first + static_cast<std::ptrdiff_t>(r);
        if (i >= 0 && i < bspline_.size()) sum += bspline_(i) * values[r];
    }
    return sum;
}

// ---------------------------------------------------------------- projection

double interpolate_linear(std::span<const double> xs, std::span<const double> ys, double x) {
    if (xs.empty()) throw InputError("interpolate_linear: no samples");
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

Eigen::MatrixXd projection_matrix(const OrthonormalBasis& basis, std::span<const double> abscissae) {
    const BasisSpec& spec = basis.spec();
    const auto dim = static_cast<Eigen::Index>(spec.dimension());
    const std::size_t m = abscissae.size();
    if (m < spec.dimension()) {
        throw RankError("projection: " + std::to_string(m) + " samples for a basis of dimension " +
                        std::to_string(spec.dimension()));
    }
    std::vector<double> xs(abscissae.begin(), abscissae.end());
    for (std::size_t s = 0; s < m; ++s) {
        xs[s] = clamp_to_domain(xs[s], spec.a(), spec.b(), "projection");
        if (s > 0 && !(xs[s] > xs[s - 1])) throw InputError("projection: abscissae must be strictly increasing");
    }

    std::vector<double> breaks;
    breaks.reserve(spec.knots().size() + m);
    std::merge(spec.knots().values().begin(), spec.knots().values().end(), xs.begin(), xs.end(),
               std::back_inserter(breaks));
    const double tiny = 1e-14 * (spec.b() - spec.a());
    breaks.erase(std::unique(breaks.begin(), breaks.end(), [tiny](double l, double r) { return r - l <= tiny; }),
                 breaks.end());

    const auto k = static_cast<std::size_t>(spec.degree());
    const GaussRule& rule = gauss_legendre(k + 1);
    std::vector<double> values(k + 1);
    Eigen::MatrixXd moments = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(m));
    std::size_t s = 0;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double lo = breaks[p];
        const double hi = breaks[p + 1];
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        while (s + 2 < m && xs[s + 1] <= mid) ++s;
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double x = mid + half * rule.nodes[g];
            const double w = half * rule.weights[g];
            double w_lo = 1.0;
            double w_hi = 0.0;
            std::size_t s_lo = s;
            std::size_t s_hi = s;
            if (m > 1) {
                if (mid <= xs.front()) {
                    s_lo = s_hi = 0;
                } else if (mid >= xs.back()) {
                    s_lo = s_hi = m - 1;
                } else {
                    s_hi = s + 1;
                    w_hi = (x - xs[s]) / (xs[s + 1] - xs[s]);
                    w_lo = 1.0 - w_hi;
                }
            }
            const std::ptrdiff_t first = spec.nonzero_values(x, values);
            for (std::size_t r = 0; r <= k; ++r) {
                const std::ptrdiff_t i = first + static_cast<std::ptrdiff_t>(r);
                if (i < 0 || i >= dim) continue;
                const double bw = w * values[r];
                moments(i, static_cast<Eigen::Index>(s_lo)) += bw * w_lo;
                if (w_hi != 0.0) moments(i, static_cast<Eigen::Index>(s_hi)) += bw * w_hi;
            }
        }
    }
    return basis.change_of_basis().transpose() * moments;
}

Spline project_1d(std::span<const double> xs, std::span<const double> ys, const OrthonormalBasis& basis) {
    if (xs.size() != ys.size()) throw InputError("project_1d: abscissae and values differ in length");
    const Eigen::MatrixXd p = projection_matrix(basis, xs);
    const Eigen::Map<const Eigen::VectorXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
    return Spline(basis, p * y);
}

}  // namespace tensorfda
