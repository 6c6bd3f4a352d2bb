#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "tensorfda/errors.hpp"
#include "tensorfda/fpca_classifier.hpp"
#include "tensorfda/synthetic.hpp"

using namespace tensorfda;

namespace {

Eigen::VectorXd unit(Eigen::Index p, Eigen::Index i) { return Eigen::VectorXd::Unit(p, i); }

// Cyclic Jacobi eigenvalues of a symmetric matrix, descending.
std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a) {
    const Eigen::Index n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                const double t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> out;
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(a(i, i));
    std::sort(out.rbegin(), out.rend());
    return out;
}

Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& x) {
    const Eigen::Index p = x.front().size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (const auto& v : x) mean += v;
    mean /= static_cast<double>(x.size());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
    for (const auto& v : x) c += (v - mean) * (v - mean).transpose();
    return c / static_cast<double>(x.size() - 1);
}

// Coefficient-space draws mu + sum_i sqrt(lambda_i) Z_i u_{axes[i]} + noise.
std::vector<Eigen::VectorXd> gaussian_cloud(std::size_t m, const Eigen::VectorXd& mu, const std::vector<double>& lambda,
                                            const std::vector<Eigen::Index>& axes, double noise, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    std::vector<Eigen::VectorXd> out;
    for (std::size_t j = 0; j < m; ++j) {
        Eigen::VectorXd v = mu;
        for (std::size_t i = 0; i < lambda.size(); ++i) v(axes[i]) += std::sqrt(lambda[i]) * normal(rng);
        for (auto& c : v) c += noise * normal(rng);
        out.push_back(v);
    }
    return out;
}

std::vector<Eigen::VectorXd> gaussian_cloud(std::size_t m, const Eigen::VectorXd& mu, const std::vector<double>& lambda,
                                            Eigen::Index offset, double noise, std::mt19937_64& rng) {
    std::vector<Eigen::Index> axes;
    for (std::size_t i = 0; i < lambda.size(); ++i) axes.push_back(offset + static_cast<Eigen::Index>(i));
    return gaussian_cloud(m, mu, lambda, axes, noise, rng);
}

OrthonormalBasis curve_basis() { return orthonormalize(BasisSpec(KnotVector::uniform(0, 1, 30), 3, Boundary::free)); }

}  // namespace

TEST_CASE("identical samples have a zero spectrum") {
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(6, -1, 2);
    const FpcaClassModel m = fit_class_fpca(std::vector<Eigen::VectorXd>(5, v), 3);
    CHECK(m.label == 3);
    CHECK(m.mean == v);
    CHECK(m.eigenvalues.size() == 6);
    CHECK(m.eigenvalues.maxCoeff() == 0.0);
    CHECK(m.stored() == 0);
    CHECK(project_eigenspace(v + unit(6, 2), m) == v);
    CHECK_THROWS_AS(fit_class_fpca(std::vector<Eigen::VectorXd>(1, v)), InputError);
}

TEST_CASE("rank-one variation") {
    const Eigen::Index p = 8;
    Eigen::VectorXd e = Eigen::VectorXd::LinSpaced(p, 1, 3).array().sin();
    e.normalize();
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(p, 0.25);
    std::vector<Eigen::VectorXd> x;
    for (double c : {-1.5, 0.2, 0.7, 2.0, -0.4, 1.1}) x.push_back(mu + c * e);
    const FpcaClassModel m = fit_class_fpca(x);
    CHECK(m.stored() == 1);
    CHECK(m.eigenvalues(0) > 0.0);
    for (Eigen::Index i = 1; i < p; ++i) CHECK(m.eigenvalues(i) <= 1e-12 * m.eigenvalues(0));
    CHECK(std::abs(std::abs(m.eigenvectors.col(0).dot(e)) - 1.0) < 1e-8);
    CHECK((m.eigenvectors.col(0) - e).cwiseAbs().maxCoeff() < 1e-8);  // e has positive largest entry
    CHECK((m.mean - (mu + (2.1 / 6) * e)).norm() < 1e-14);
}

TEST_CASE("spectrum matches a Jacobi eigenvalue oracle") {
    std::mt19937_64 rng(8);
    const Eigen::VectorXd mu = Eigen::VectorXd::Zero(10);
    const auto x = gaussian_cloud(60, mu, {3, 2, 1.5, 1, 0.5}, 2, 0.1, rng);
    const FpcaClassModel m = fit_class_fpca(x);
    const auto oracle_values = jacobi_eigenvalues(sample_covariance(x));
    for (std::size_t i = 0; i < oracle_values.size(); ++i) {
        CHECK(std::abs(m.eigenvalues(static_cast<Eigen::Index>(i)) - oracle_values[i]) < 1e-10);
    }
    const Eigen::MatrixXd gram = m.eigenvectors.transpose() * m.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index i = 1; i < m.eigenvalues.size(); ++i) CHECK(m.eigenvalues(i) <= m.eigenvalues(i - 1));

    // Budget: retained eigenvalues sum to at most the total variance, with
    // equality at full rank.
    const double total = sample_covariance(x).trace();
    CHECK(m.eigenvalues.head(3).sum() <= total);
    CHECK(std::abs(m.eigenvalues.sum() - total) < 1e-8 * total);
}

TEST_CASE("two orthogonal directions with variances 4 and 1") {
    // Each draw of 200 samples gives a ratio with about 14% spread, so the
    // 10% band is checked on the average over independent draws and each
    // draw is compared to its own sample-covariance oracle.
    double sum = 0.0;
    const int draws = 40;
    for (int s = 0; s < draws; ++s) {
        std::mt19937_64 rng(100 + s);
        const auto x = gaussian_cloud(200, Eigen::VectorXd::Zero(6), {4, 1}, 1, 0.0, rng);
        const FpcaClassModel m = fit_class_fpca(x);
        const auto o = jacobi_eigenvalues(sample_covariance(x));
        CHECK(std::abs(m.eigenvalues(0) - o[0]) < 1e-10);
        CHECK(std::abs(m.eigenvalues(1) - o[1]) < 1e-10);
        CHECK(m.stored() == 2);
        sum += m.eigenvalues(0) / m.eigenvalues(1);
    }
    const double mean_ratio = sum / draws;
    MESSAGE("mean eigenvalue ratio over " << draws << " draws: " << mean_ratio);
    CHECK(std::abs(mean_ratio / 4.0 - 1.0) < 0.10);
}

TEST_CASE("eigenspace projection") {
    std::mt19937_64 rng(21);
    const Eigen::Index p = 12;
    const auto x = gaussian_cloud(80, Eigen::VectorXd::LinSpaced(p, 0, 1), {5, 3, 2}, 0, 0.05, rng);
    FpcaClassModel m = fit_class_fpca(x);
    m.retained = 3;
    CHECK(project_eigenspace(m.mean, m) == m.mean);
    CHECK(residual_norm(m.mean, m) == 0.0);
    const Eigen::VectorXd f1 = m.mean + m.eigenvectors.col(0);
    CHECK((project_eigenspace(f1, m) - f1).cwiseAbs().maxCoeff() < 1e-14);

    // Orthogonal complement oracle: QR of the retained eigenvectors.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m.eigenvectors.leftCols(3));
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::VectorXd v = 0.7 * q.col(5) - 1.3 * q.col(9);
    CHECK((project_eigenspace(m.mean + v, m) - m.mean).norm() < 1e-13);
    CHECK(std::abs(residual_norm(m.mean + v, m) - v.norm()) < 1e-13);
    CHECK_THROWS_AS(project_eigenspace(Eigen::VectorXd::Zero(p + 1), m), InputError);
}

TEST_CASE("coefficient residuals equal functional L2 residuals") {
    const OrthonormalBasis ob = curve_basis();
    const TensorBasisSpec basis({ob});
    const auto dim = static_cast<Eigen::Index>(ob.dimension());
    std::mt19937_64 rng(33);
    const auto train = gaussian_cloud(40, Eigen::VectorXd::Zero(dim), {1, 0.5, 0.25, 0.1}, 3, 0.01, rng);
    FpcaClassModel m = fit_class_fpca(train);
    m.retained = 4;
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd f(dim);
        for (auto& c : f) c = normal(rng);
        const Eigen::VectorXd fh = project_eigenspace(f, m);
        const Spline diff(ob, f - fh);
        const double l2 = std::sqrt(oracle::piecewise_romberg([&](double t) { return diff(t) * diff(t); },
                                                              std::vector<double>(ob.spec().knots().values().begin(),
                                                                                  ob.spec().knots().values().end()),
                                                              6));
        CHECK(std::abs(l2 - residual_norm(f, m)) < 1e-6);
    }
}

TEST_CASE("mean squared residual matches the discarded spectrum") {
    const OrthonormalBasis ob = curve_basis();
    const TensorBasisSpec basis({ob});
    SyntheticConfig cfg;
    KlClassSpec cls;
    cls.eigenvalues.clear();
    for (int i = 1; i <= 8; ++i) cls.eigenvalues.push_back(1.0 / (i * i));
    cfg.classes = {cls};
    cfg.samples_per_class = 500;
    cfg.points = 513;
    cfg.seed = 5;
    const auto train = generate_kl_dataset(cfg);
    cfg.seed = 6;
    const auto test = generate_kl_dataset(cfg);
    FpcaClassModel m = fit_class_fpca(train.samples, basis);
    for (std::size_t n : {1, 2, 3, 5}) {
        m.retained = n;
        double mean_sq = 0.0;
        for (const auto& s : test.samples) {
            const Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(
                tensor_project(GridSamples{s.axes, s.values}, basis).values().data(), ob.dimension());
            const double r = residual_norm(f, m);
            mean_sq += r * r;
        }
        mean_sq /= static_cast<double>(test.samples.size());
        double tail = 0.0;
        for (std::size_t i = n; i < cls.eigenvalues.size(); ++i) tail += cls.eigenvalues[i];
        MESSAGE("n_k=" << n << " mean residual^2 " << mean_sq << " vs tail " << tail);
        CHECK(std::abs(mean_sq / tail - 1.0) < 0.15);
    }
}

TEST_CASE("decision rule and weights") {
    const ClassificationResult tie = decide({1.5, 1.5}, {4, 9});
    CHECK(tie.label == 4);
    CHECK(tie.class_index == 0);
    CHECK(tie.weights == std::vector<double>{0.5, 0.5});

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> r(4);
        for (double& v : r) v = u(rng);
        const ClassificationResult a = decide(r, {0, 1, 2, 3});
        const double sum = std::accumulate(a.weights.begin(), a.weights.end(), 0.0);
        CHECK(std::abs(sum - 1.0) < 1e-12);
        for (double w : a.weights) CHECK(w >= 0.0);
        // Argmin residual is the smallest weight.
        CHECK(std::min_element(a.weights.begin(), a.weights.end()) - a.weights.begin() ==
              static_cast<long>(a.class_index));
        std::vector<double> scaled = r;
        for (double& v : scaled) v *= 7.25;
        CHECK(decide(scaled, {0, 1, 2, 3}).label == a.label);
    }
    const ClassificationResult zero = decide({0.0, 0.0, 0.0}, {0, 1, 2});
    CHECK(zero.label == 0);
    CHECK(std::abs(zero.weights[1] - 1.0 / 3) < 1e-15);
}

TEST_CASE("evaluate") {
    const Evaluation ok = evaluate(std::vector<int>{0, 1, 1, 0}, std::vector<int>{0, 1, 1, 0});
    CHECK(ok.accuracy == 1.0);
    CHECK(ok.confusion == std::vector<std::vector<std::size_t>>{{2, 0}, {0, 2}});
    const Evaluation one = evaluate(std::vector<int>{1, 1, 1, 1}, std::vector<int>{0, 1, 0, 1});
    CHECK(one.accuracy == 0.5);
    CHECK(one.confusion == std::vector<std::vector<std::size_t>>{{0, 2}, {0, 2}});

    std::mt19937_64 rng(12);
    std::vector<int> truth(60);
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = static_cast<int>(i % 6);
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> predicted;
    for (int t : truth) predicted.push_back(perm[static_cast<std::size_t>(t)]);
    int fixed = 0;
    for (int i = 0; i < 6; ++i) fixed += perm[static_cast<std::size_t>(i)] == i;
    CHECK(evaluate(predicted, truth).accuracy == doctest::Approx(fixed / 6.0).epsilon(1e-15));
    CHECK_THROWS_AS(evaluate(std::vector<int>{1}, std::vector<int>{1, 2}), InputError);
}

TEST_CASE("component selection") {
    const Eigen::Index p = 20;
    std::mt19937_64 rng(77);
    const Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
    // The classes share two modes and differ in the third, so class 0
    // needs 3 components to separate them.
    const std::vector<double> lambda{4, 3, 2};
    const std::vector<Eigen::Index> axes_a{0, 1, 2};
    const std::vector<Eigen::Index> axes_b{0, 1, 3};
    auto a = fit_class_fpca(gaussian_cloud(150, mu, lambda, axes_a, 0.1, rng), 0);
    auto b = fit_class_fpca(gaussian_cloud(150, mu, lambda, axes_b, 0.1, rng), 1);
    a.retained = 3;
    b.retained = 3;
    const TensorBasisSpec dummy({orthonormalize(BasisSpec(KnotVector::uniform(0, 1, 22), 3, Boundary::zero))});
    REQUIRE(dummy.dimension() == static_cast<std::size_t>(p));
    const ClassifierModel model(dummy, TransformKind::none, {a, b}, {});

    const auto va = gaussian_cloud(100, mu, lambda, axes_a, 0.1, rng);
    const auto vb = gaussian_cloud(100, mu, lambda, axes_b, 0.1, rng);
    std::vector<std::vector<Eigen::VectorXd>> coeffs(2);
    std::vector<int> labels;
    for (const auto& v : va) {
        coeffs[0].push_back(v);
        coeffs[1].push_back(v);
        labels.push_back(0);
    }
    for (const auto& v : vb) {
        coeffs[0].push_back(v);
        coeffs[1].push_back(v);
        labels.push_back(1);
    }
    CHECK(select_components(model, 0, coeffs, labels, {5}) == 5);
    // Exhaustive accuracy scan oracle.
    std::vector<std::size_t> cands;
    for (std::size_t c = 1; c <= 15; ++c) cands.push_back(c);
    std::size_t best = 0;
    double best_acc = -1;
    for (std::size_t c : cands) {
        const auto res = classify_coefficients(coeffs, model.with_retained({c, 3}));
        const double acc = evaluate(res, labels).accuracy;
        if (acc > best_acc) {
            best_acc = acc;
            best = c;
        }
    }
    const std::size_t chosen = select_components(model, 0, coeffs, labels, cands);
    MESSAGE("selected " << chosen << " at validation accuracy " << best_acc);
    CHECK(chosen == best);
    CHECK(chosen >= 3);
    CHECK(chosen <= 6);

    // Flat accuracy: with one class every candidate scores the same.
    const ClassifierModel single(dummy, TransformKind::none, {a}, {});
    std::vector<std::vector<Eigen::VectorXd>> one{coeffs[0]};
    std::vector<int> zeros(labels.size(), 0);
    CHECK(select_components(single, 0, one, zeros, {9, 4, 7}) == 4);
    CHECK_THROWS_AS(select_components(model, 0, coeffs, labels, {}), InputError);
}

TEST_CASE("end-to-end classification of synthetic Karhunen-Loeve classes") {
    const OrthonormalBasis ob = curve_basis();
    const TensorBasisSpec basis({ob});
    const auto train = generate_kl_dataset(default_two_class_config(200, 1));
    const auto test = generate_kl_dataset(default_two_class_config(100, 2));
    std::vector<FunctionalSample> c0(train.samples.begin(), train.samples.begin() + 200);
    std::vector<FunctionalSample> c1(train.samples.begin() + 200, train.samples.end());

    FpcaClassModel m0 = fit_class_fpca(c0, basis, 0);
    FpcaClassModel m1 = fit_class_fpca(c1, basis, 1);
    m0.retained = 3;
    m1.retained = 3;
    const ClassifierModel plain(basis, TransformKind::none, {m0, m1}, {});
    const Evaluation e = evaluate(classify_batch(test.samples, plain), test.labels);
    MESSAGE("accuracy without transform: " << e.accuracy);
    CHECK(e.accuracy >= 0.95);

    // The stored mean's pre-image lands in its own class. Its residual is
    // bounded by the L2 error of sampling and re-interpolating the mean.
    std::vector<double> mean_values;
    const Spline mean_curve(ob, m1.mean);
    const auto& ts = c1.front().axes[0];
    for (double t : ts) mean_values.push_back(mean_curve(t));
    const ClassificationResult r = classify(make_sample(ts, mean_values), plain);
    const double sampling = std::sqrt(oracle::piecewise_romberg(
        [&](double t) {
            const double d = oracle::lerp_samples(ts, mean_values, t) - mean_curve(t);
            return d * d;
        },
        ts, 4));
    MESSAGE("mean pre-image residual " << r.residuals[1] << ", sampling bound " << sampling);
    CHECK(r.label == 1);
    CHECK(r.residuals[1] <= sampling * (1 + 1e-6) + 1e-12);
    CHECK(r.residuals[0] > 0.1);

    // classify and classify_batch agree.
    const auto batch = classify_batch(std::vector<FunctionalSample>(test.samples.begin(), test.samples.begin() + 5), plain);
    for (std::size_t l = 0; l < 5; ++l) {
        const auto single = classify(test.samples[l], plain);
        CHECK(single.label == batch[l].label);
        for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(single.residuals[k] - batch[l].residuals[k]) < 1e-12);
    }
}

TEST_CASE("uniform density state transform changes nothing") {
    const OrthonormalBasis ob = curve_basis();
    const TensorBasisSpec basis({ob});
    const auto train = generate_kl_dataset(default_two_class_config(60, 3));
    const auto test = generate_kl_dataset(default_two_class_config(30, 4));
    const DensityModel flat(Box::unit(1), {256}, std::vector<double>(256, 1.0), 0.0);
    std::vector<FpcaClassModel> models;
    for (int k = 0; k < 2; ++k) {
        std::vector<FunctionalSample> cls(train.samples.begin() + 60 * k, train.samples.begin() + 60 * (k + 1));
        models.push_back(fit_class_fpca(cls, basis, k));
        models.back().retained = 3;
    }
    const ClassifierModel plain(basis, TransformKind::none, models, {});
    const ClassifierModel state(basis, TransformKind::state, models, {flat, flat});
    const auto a = classify_batch(test.samples, plain);
    const auto b = classify_batch(test.samples, state);
    for (std::size_t l = 0; l < a.size(); ++l) {
        CHECK(a[l].label == b[l].label);
        CHECK(std::abs(a[l].residuals[0] - b[l].residuals[0]) < 1e-12);
    }
    CHECK_THROWS_AS(ClassifierModel(basis, TransformKind::state, models, {flat}), InputError);
}

TEST_CASE("fitting is deterministic") {
    const OrthonormalBasis ob = curve_basis();
    const TensorBasisSpec basis({ob});
    const auto train = generate_kl_dataset(default_two_class_config(30, 9));
    CHECK(fit_class_fpca(train.samples, basis) == fit_class_fpca(train.samples, basis));
    CHECK(generate_kl_dataset(default_two_class_config(30, 9)).samples.back().values == train.samples.back().values);
}
