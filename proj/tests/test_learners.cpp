#include <doctest.h>

#include <cmath>
#include <random>

#include "telem/learners.hpp"

using namespace telem;

namespace {

struct Separable {
    std::vector<std::vector<double>> X;
    std::vector<std::uint8_t> y;
};

Separable separable_1d(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    Separable out;
    for (std::size_t i = 0; i < n; ++i) {
        double x = u(rng);
        if (std::abs(x) < 0.05) x = x < 0 ? -0.05 : 0.05;
        out.X.push_back({x});
        out.y.push_back(x > 0);
    }
    return out;
}

double accuracy(const TrainedClassifier& c, const Separable& d) {
    auto p = c.predict_proba(d.X);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < d.y.size(); ++i)
        hit += (p[i] >= 0.5) == (d.y[i] == 1);
    return static_cast<double>(hit) / static_cast<double>(d.y.size());
}

// Weighted regularized negative log-likelihood for logreg, coded
// independently of the implementation for gradient cross-checks.
double logreg_objective(const std::vector<double>& w, double b,
                        const std::vector<std::vector<double>>& X,
                        const std::vector<std::uint8_t>& y, double l2,
                        double pos_weight) {
    double obj = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double z = b;
        for (std::size_t d = 0; d < w.size(); ++d) z += w[d] * X[i][d];
        double weight = y[i] ? pos_weight : 1.0;
        // log(1+e^z) - y*z, numerically stabilized
        double log1pe = z > 0 ? z + std::log1p(std::exp(-z))
                              : std::log1p(std::exp(z));
        obj += weight * (log1pe - (y[i] ? z : 0.0));
    }
    for (double wd : w) obj += 0.5 * l2 * wd * wd;
    return obj;
}

}  // namespace

TEST_CASE("spec validation rejects unknown and out-of-range parameters") {
    auto spec = ClassifierSpec::defaults(ClassifierKind::gbt);
    CHECK_NOTHROW(spec.validate());
    spec.params["bogus"] = 1;
    CHECK_THROWS(spec.validate());
    spec.params.erase("bogus");
    spec.params["max_depth"] = 0;
    CHECK_THROWS(spec.validate());

    auto lr = ClassifierSpec::defaults(ClassifierKind::logreg);
    CHECK_NOTHROW(lr.validate());
    lr.params["l2_penalty"] = -1;
    CHECK_THROWS(lr.validate());
}

TEST_CASE("both learners separate 1-D data at >= 0.99 accuracy") {
    auto data = separable_1d(200, 9);
    for (auto kind : {ClassifierKind::gbt, ClassifierKind::logreg}) {
        auto model = fit(ClassifierSpec::defaults(kind, 3), data.X, data.y);
        CHECK(accuracy(model, data) >= 0.99);
    }
}

TEST_CASE("degenerate single-class targets give clamped constants") {
    std::vector<std::vector<double>> X = {{1}, {2}, {3}};
    auto zero = fit(ClassifierSpec::defaults(ClassifierKind::gbt), X, {0, 0, 0});
    CHECK(zero.form() == TrainedClassifier::Form::constant);
    for (double p : zero.predict_proba(X)) CHECK(p == doctest::Approx(1e-6));
    auto one = fit(ClassifierSpec::defaults(ClassifierKind::logreg), X, {1, 1, 1});
    for (double p : one.predict_proba(X)) CHECK(p == doctest::Approx(1 - 1e-6));
}

TEST_CASE("training is deterministic") {
    auto data = separable_1d(150, 4);
    auto spec = ClassifierSpec::defaults(ClassifierKind::gbt, 7);
    spec.params["subsample"] = 0.8;
    auto a = fit(spec, data.X, data.y);
    auto b = fit(spec, data.X, data.y);
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("gbt loss is non-increasing per boosting round") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-2, 2);
    std::vector<std::vector<double>> X;
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 300; ++i) {
        double a = u(rng), b = u(rng);
        X.push_back({a, b});
        y.push_back(a * a + b > 1.0 || u(rng) > 1.8);
    }
    auto spec = ClassifierSpec::defaults(ClassifierKind::gbt, 5);
    spec.params["n_trees"] = 40;
    auto model = fit(spec, X, y);
    const auto& losses = model.round_losses();
    REQUIRE(losses.size() >= 2);
    for (std::size_t i = 1; i < losses.size(); ++i)
        CHECK(losses[i] <= losses[i - 1] + 1e-10);
}

TEST_CASE("gbt single-split tree is monotone in the split feature") {
    auto data = separable_1d(200, 21);
    auto spec = ClassifierSpec::defaults(ClassifierKind::gbt, 1);
    spec.params["n_trees"] = 1;
    spec.params["max_depth"] = 1;
    auto model = fit(spec, data.X, data.y);
    REQUIRE(model.trees().size() == 1);
    double lo = model.predict_one({-1.0});
    double hi = model.predict_one({1.0});
    CHECK(hi > lo);
    // finer sweep: probability non-decreasing through the single threshold
    double prev = -1;
    for (double x = -1; x <= 1; x += 0.05) {
        double p = model.predict_one({x});
        CHECK(p >= prev - 1e-12);
        prev = p;
    }
}

TEST_CASE("logreg gradient vanishes at the fitted optimum") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0, 1);
    std::vector<std::vector<double>> X;
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 250; ++i) {
        double a = g(rng), b = g(rng);
        X.push_back({a, b});
        y.push_back(sigmoid(1.5 * a - b) > 0.5 ? (g(rng) < 1.2) : (g(rng) < -1.2));
    }
    double pos = 0;
    for (auto v : y) pos += v;
    double pos_weight = (static_cast<double>(y.size()) - pos) / pos;

    auto spec = ClassifierSpec::defaults(ClassifierKind::logreg);
    spec.params["l2_penalty"] = 0.5;
    spec.params["tol"] = 1e-10;
    auto model = fit(spec, X, y);
    auto w = model.weights();
    double b = model.intercept();

    // finite-difference gradient of the independent objective
    const double h = 1e-6;
    double base = logreg_objective(w, b, X, y, 0.5, pos_weight);
    (void)base;
    for (std::size_t d = 0; d <= w.size(); ++d) {
        auto wp = w;
        double bp = b;
        if (d < w.size()) wp[d] += h; else bp += h;
        auto wm = w;
        double bm = b;
        if (d < w.size()) wm[d] -= h; else bm -= h;
        double fd = (logreg_objective(wp, bp, X, y, 0.5, pos_weight) -
                     logreg_objective(wm, bm, X, y, 0.5, pos_weight)) /
                    (2 * h);
        CHECK(std::abs(fd) <= 1e-4 * std::max(1.0, std::abs(base)));
    }
}

TEST_CASE("logreg weights are row-order independent") {
    std::mt19937_64 rng(44);
    std::normal_distribution<double> g(0, 1);
    std::vector<std::vector<double>> X;
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 120; ++i) {
        X.push_back({g(rng), g(rng)});
        y.push_back(g(rng) > 0.3);
    }
    auto spec = ClassifierSpec::defaults(ClassifierKind::logreg);
    spec.params["tol"] = 1e-12;
    auto a = fit(spec, X, y);

    std::vector<std::size_t> perm(X.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> Xp;
    std::vector<std::uint8_t> yp;
    for (auto i : perm) {
        Xp.push_back(X[i]);
        yp.push_back(y[i]);
    }
    auto b = fit(spec, Xp, yp);
    REQUIRE(a.weights().size() == b.weights().size());
    for (std::size_t d = 0; d < a.weights().size(); ++d)
        CHECK(std::abs(a.weights()[d] - b.weights()[d]) <= 1e-8);
    CHECK(std::abs(a.intercept() - b.intercept()) <= 1e-8);
}

TEST_CASE("probabilities stay strictly inside (0,1)") {
    auto data = separable_1d(200, 31);
    for (auto kind : {ClassifierKind::gbt, ClassifierKind::logreg}) {
        auto model = fit(ClassifierSpec::defaults(kind, 3), data.X, data.y);
        for (double p : model.predict_proba({{-1e9}, {0.0}, {1e9}})) {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
        }
    }
}

TEST_CASE("predict rejects dimension mismatch, fit rejects bad input") {
    auto data = separable_1d(50, 2);
    auto model = fit(ClassifierSpec::defaults(ClassifierKind::logreg), data.X,
                     data.y);
    CHECK_THROWS(model.predict_proba({{1.0, 2.0}}));
    CHECK_THROWS(fit(ClassifierSpec::defaults(ClassifierKind::gbt), {{1.0}},
                     {0, 1}));
    CHECK_THROWS(fit(ClassifierSpec::defaults(ClassifierKind::gbt),
                     {{std::numeric_limits<double>::infinity()}}, {1}));
}

TEST_CASE("model json round trip preserves predictions") {
    auto data = separable_1d(150, 77);
    for (auto kind : {ClassifierKind::gbt, ClassifierKind::logreg}) {
        auto model = fit(ClassifierSpec::defaults(kind, 6), data.X, data.y);
        auto back = TrainedClassifier::from_json(model.to_json());
        auto p0 = model.predict_proba(data.X);
        auto p1 = back.predict_proba(data.X);
        for (std::size_t i = 0; i < p0.size(); ++i)
            CHECK(p0[i] == doctest::Approx(p1[i]).epsilon(1e-15));
    }
}
