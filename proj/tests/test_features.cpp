#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "telem/features.hpp"

using namespace telem;

namespace {

// Independent brute-force oracle: direct summation from the definitions,
// no code shared with the implementation.
std::vector<double> oracle_features(const std::vector<double>& x) {
    const std::size_t T = x.size();
    const double Td = static_cast<double>(T);
    double mu = 0;
    for (double v : x) mu += v;
    mu /= Td;
    double var = 0, m3 = 0, m4 = 0;
    for (double v : x) {
        double d = v - mu;
        var += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    var /= Td;
    m3 /= Td;
    m4 /= Td;
    double sd = std::sqrt(var);
    double skew = sd > 0 ? m3 / (sd * sd * sd) : 0.0;
    double kurt = sd > 0 ? m4 / (var * var) - 3.0 : 0.0;

    // Hann-windowed DFT computed straight from the definition.
    const double pi = std::acos(-1.0);
    std::vector<std::complex<double>> X(T);
    for (std::size_t b = 0; b < T; ++b) {
        std::complex<double> acc(0, 0);
        for (std::size_t t = 0; t < T; ++t) {
            double w = 0.5 - 0.5 * std::cos(2.0 * pi * t / Td);
            double ang = -2.0 * pi * static_cast<double>(b * t) / Td;
            acc += w * x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        X[b] = acc;
    }
    double energy = 0;
    for (std::size_t b = 1; b < T; ++b) energy += std::norm(X[b]);
    double num = 0, den = 0;
    for (std::size_t b = 1; b <= T / 2; ++b) {
        double mag = std::abs(X[b]);
        num += mag * (static_cast<double>(b) / Td);
        den += mag;
    }
    double sc = den > 0 ? num / den : 0.0;

    // least-squares slope over abscissa 0..T-1
    double tbar = (Td - 1.0) / 2.0, sxy = 0, sxx = 0;
    for (std::size_t t = 0; t < T; ++t) {
        sxy += (t - tbar) * (x[t] - mu);
        sxx += (t - tbar) * (t - tbar);
    }
    double slope = sxy / sxx;

    double dmu = 0;
    for (std::size_t t = 1; t < T; ++t) dmu += x[t] - x[t - 1];
    dmu /= (Td - 1.0);
    double dvar = 0;
    for (std::size_t t = 1; t < T; ++t) {
        double d = x[t] - x[t - 1] - dmu;
        dvar += d * d;
    }
    dvar /= (Td - 1.0);

    return {mu, var, sd, skew, kurt, energy, sc, slope, dvar};
}

double rel_err(double got, double want) {
    double scale = std::max({1.0, std::abs(got), std::abs(want)});
    return std::abs(got - want) / scale;
}

}  // namespace

TEST_CASE("segmentize window placement") {
    ChannelSeries s;
    s.channel_id = "ch";
    for (int i = 0; i < 10; ++i) {
        s.timestamps.push_back(i);
        s.values.push_back(i * 1.0);
        s.labels.push_back(i == 7);
    }
    auto segs = segmentize(s, {{0, 10}}, 4, 2);
    REQUIRE(segs.size() == 4);
    std::vector<std::int64_t> starts;
    for (const auto& g : segs) starts.push_back(g.start);
    CHECK(starts == std::vector<std::int64_t>{0, 2, 4, 6});
    // OR label: segments covering index 7 are anomalous
    CHECK(segs[0].label == 0);
    CHECK(segs[2].label == 1);
    CHECK(segs[3].label == 1);

    CHECK(segmentize(s, {{0, 3}}, 4, 2).empty());

    // no window may straddle the hole between the two runs
    auto holed = segmentize(s, {{0, 5}, {6, 10}}, 4, 1);
    CHECK(holed.size() == 3);
    for (const auto& g : holed) {
        bool crosses = g.start < 5 && g.end > 5;
        CHECK(!crosses);
    }
}

TEST_CASE("base feature values on hand-checkable inputs") {
    auto f = base_features(std::vector<double>{2, 4, 6});
    CHECK(f[0] == doctest::Approx(4.0));  // mean
    CHECK(f[7] == doctest::Approx(2.0));  // slope
    CHECK(f[8] == doctest::Approx(0.0));  // diff_var of exact line

    auto g = base_features(std::vector<double>{1, 2, 3});
    CHECK(g[1] == doctest::Approx(2.0 / 3.0));
    CHECK(g[3] == doctest::Approx(0.0));   // skew of symmetric data
    CHECK(g[4] == doctest::Approx(-1.5));  // kurtosis

    auto c = base_features(std::vector<double>{5, 5, 5, 5});
    CHECK(c[1] == 0.0);
    CHECK(c[2] == 0.0);
    CHECK(c[3] == 0.0);  // sigma = 0 convention
    CHECK(c[4] == 0.0);
}

TEST_CASE("pure tone has spectral centroid at the tone bin") {
    const double pi = std::acos(-1.0);
    for (std::size_t T : {16u, 32u, 64u}) {
        for (std::size_t k : {2u, 5u}) {
            std::vector<double> x(T);
            for (std::size_t t = 0; t < T; ++t)
                x[t] = std::cos(2.0 * pi * static_cast<double>(k * t) /
                                static_cast<double>(T));
            auto f = base_features(x);
            CHECK(f[6] == doctest::Approx(static_cast<double>(k) /
                                          static_cast<double>(T))
                              .epsilon(1e-6));
        }
    }
}

TEST_CASE("base features match the brute-force oracle on random segments") {
    std::mt19937_64 rng(321);
    std::uniform_real_distribution<double> val(-10, 10);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t T = 2 + rng() % 63;
        std::vector<double> x(T);
        for (auto& v : x) v = val(rng);
        auto got = base_features(x);
        auto want = oracle_features(x);
        for (std::size_t i = 0; i < 9; ++i) {
            double tol = (i == 5 || i == 6) ? 1e-6 : 1e-9;
            CHECK(rel_err(got[i], want[i]) <= tol);
        }
        CHECK(got[5] >= 0.0);
        CHECK(got[6] >= 0.0);
        CHECK(got[6] <= 0.5 + 1e-12);
    }
}

TEST_CASE("skew and kurtosis are affine invariant, slope scales") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> val(-3, 3);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t T = 5 + rng() % 40;
        std::vector<double> x(T), y(T);
        double a = 0.5 + (rng() % 100) / 25.0, b = val(rng) * 10;
        for (std::size_t i = 0; i < T; ++i) {
            x[i] = val(rng);
            y[i] = a * x[i] + b;
        }
        auto fx = base_features(x);
        auto fy = base_features(y);
        CHECK(std::abs(fx[3] - fy[3]) <= 1e-6);
        CHECK(std::abs(fx[4] - fy[4]) <= 1e-6);
        CHECK(fy[7] == doctest::Approx(a * fx[7]).epsilon(1e-9));
    }
}

TEST_CASE("base_features rejects bad input") {
    CHECK_THROWS(base_features(std::vector<double>{1.0}));
    CHECK_THROWS(base_features(
        std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}));
}

TEST_CASE("rolling min-max pooling") {
    FeatureMatrix fm;
    fm.feature_names = {"f"};
    fm.rows = {{1}, {5}, {3}};
    fm.spans = {{0, 2}, {2, 4}, {4, 6}};
    fm.labels = {0, 1, 0};

    auto pooled = rolling_minmax_pool(fm, 3, 3);
    REQUIRE(pooled.rows.size() == 1);
    CHECK(pooled.feature_names == std::vector<std::string>{"f_min", "f_max"});
    CHECK(pooled.rows[0] == std::vector<double>{1, 5});
    CHECK(pooled.labels[0] == 1);
    CHECK(pooled.spans[0] == IndexInterval{0, 6});
}

TEST_CASE("pooling identity window and trailing partial") {
    FeatureMatrix fm;
    fm.feature_names = {"f"};
    for (int i = 0; i < 5; ++i) {
        fm.rows.push_back({static_cast<double>(i)});
        fm.spans.push_back({i, i + 1});
        fm.labels.push_back(0);
    }
    auto id = rolling_minmax_pool(fm, 1, 1);
    REQUIRE(id.rows.size() == 5);
    for (int i = 0; i < 5; ++i)
        CHECK(id.rows[i] == std::vector<double>{1.0 * i, 1.0 * i});

    auto p = rolling_minmax_pool(fm, 2, 2);
    REQUIRE(p.rows.size() == 3);  // {0,1},{2,3},{4} with trailing partial
    CHECK(p.rows[2] == std::vector<double>{4, 4});
    CHECK(p.spans[2].start == 4);
}

TEST_CASE("pooled min never exceeds pooled max") {
    std::mt19937_64 rng(13);
    FeatureMatrix fm;
    fm.feature_names = {"a", "b", "c"};
    for (int i = 0; i < 37; ++i) {
        fm.rows.push_back({(rng() % 100) / 7.0, (rng() % 100) / 3.0,
                           -(static_cast<double>(rng() % 50))});
        fm.spans.push_back({i, i + 1});
        fm.labels.push_back(rng() % 2);
    }
    auto p = rolling_minmax_pool(fm, 4, 3);
    for (const auto& row : p.rows)
        for (std::size_t d = 0; d < 3; ++d) CHECK(row[d] <= row[3 + d]);
}
