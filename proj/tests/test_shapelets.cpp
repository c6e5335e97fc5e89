#include <doctest.h>

#include <cmath>
#include <random>

#include "telem/shapelets.hpp"

using namespace telem;

namespace {

Shapelet from_source(std::vector<double> raw, double bias = 0.0) {
    double mu = 0;
    for (double v : raw) mu += v;
    mu /= static_cast<double>(raw.size());
    double var = 0;
    for (double v : raw) var += (v - mu) * (v - mu);
    var /= static_cast<double>(raw.size());
    double sd = std::sqrt(var);
    Shapelet s;
    for (double v : raw) s.pattern.push_back((v - mu) / sd);
    s.bias = bias;
    s.source = "test";
    return s;
}

ChannelSeries make_series(std::size_t len) {
    ChannelSeries s;
    s.channel_id = "ch";
    s.timestamps.resize(len);
    s.values.assign(len, 0.0);
    s.labels.assign(len, 0);
    for (std::size_t i = 0; i < len; ++i)
        s.timestamps[i] = static_cast<std::int64_t>(i);
    return s;
}

}  // namespace

TEST_CASE("quantile with linear interpolation") {
    CHECK(quantile({1, 2, 3, 4}, 0.75) == doctest::Approx(3.25));
    CHECK(quantile({5}, 0.5) == doctest::Approx(5.0));
    CHECK(quantile({3, 1, 2}, 0.0) == doctest::Approx(1.0));
    CHECK(quantile({3, 1, 2}, 1.0) == doctest::Approx(3.0));
    CHECK(quantile({1, 3}, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("similarity profile self-match, negation and constant window") {
    std::vector<double> source = {1, 4, 2, 8, 5, 7};
    auto sh = from_source(source);

    // exact copy embedded: profile value at the copy equals the length
    std::vector<double> segment = {0, 0, 1, 4, 2, 8, 5, 7, 0, 0};
    auto prof = similarity_profile(segment, sh, false);
    REQUIRE(prof.size() == segment.size() - source.size() + 1);
    CHECK(prof[2] == doctest::Approx(6.0).epsilon(1e-9));

    std::vector<double> negated = {0, 0, -1, -4, -2, -8, -5, -7, 0, 0};
    auto nprof = similarity_profile(negated, sh, false);
    CHECK(nprof[2] == doctest::Approx(-6.0).epsilon(1e-9));

    // zero-variance window convention: dot is 0, so value = bias
    std::vector<double> flat(10, 3.0);
    auto bsh = from_source(source, 0.25);
    auto fprof = similarity_profile(flat, bsh, false);
    for (double v : fprof) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("padding extends the profile by edge replication") {
    std::vector<double> source = {1, 4, 2, 8};
    auto sh = from_source(source);
    std::vector<double> segment = {1, 4, 2, 8, 5};
    auto unpadded = similarity_profile(segment, sh, false);
    auto padded = similarity_profile(segment, sh, true);
    std::int64_t pad = sh.footprint() / 2;
    CHECK(static_cast<std::int64_t>(padded.size()) ==
          static_cast<std::int64_t>(unpadded.size()) + 2 * pad);
    // the unpadded profile appears as the middle of the padded one
    for (std::size_t i = 0; i < unpadded.size(); ++i)
        CHECK(padded[i + pad] == doctest::Approx(unpadded[i]).epsilon(1e-12));
}

TEST_CASE("shapelet features hit exactly 1 and -1 on affine copies") {
    std::vector<double> source = {2, -1, 5, 0, 3, 3, 7, 1};
    ShapeletPool pool;
    pool.shapelets.push_back(from_source(source));
    pool.quality.push_back(1.0);
    pool.padding = false;

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> noise(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        double a = 0.1 + (rng() % 100) / 10.0;
        double b = noise(rng) * 20;
        std::vector<double> segment(40);
        for (auto& v : segment) v = noise(rng);
        for (std::size_t i = 0; i < source.size(); ++i) {
            segment[12 + i] = a * source[i] + b;       // positive affine copy
            segment[25 + i] = -a * source[i] + b;      // negated copy
        }
        auto f = shapelet_features(segment, pool);
        REQUIRE(f.size() == 2);
        CHECK(f[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(f[1] == doctest::Approx(-1.0).epsilon(1e-9));
    }
}

TEST_CASE("features are affine invariant and Cauchy-Schwarz bounded") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> noise(-5, 5);
    ShapeletPool pool;
    for (int k = 0; k < 3; ++k) {
        std::vector<double> src(12);
        for (auto& v : src) v = noise(rng);
        pool.shapelets.push_back(from_source(src));
        pool.quality.push_back(1.0);
    }
    CHECK(shapelet_feature_names(3).size() == 6);

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(60);
        for (auto& v : x) v = noise(rng);
        double a = 0.2 + (rng() % 50) / 10.0, b = noise(rng) * 10;
        std::vector<double> y(60);
        for (std::size_t i = 0; i < 60; ++i) y[i] = a * x[i] + b;
        auto fx = shapelet_features(x, pool);
        auto fy = shapelet_features(y, pool);
        REQUIRE(fx.size() == 6);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(std::abs(fx[i] - fy[i]) <= 1e-6);
            CHECK(std::abs(fx[i]) <= 1.0 + 1e-9);
        }
        for (std::size_t k = 0; k < 3; ++k) CHECK(fx[2 * k] >= fx[2 * k + 1]);
    }
}

TEST_CASE("cached window features equal the canonical path") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> noise(-5, 5);
    ShapeletPool pool;
    pool.padding = true;
    for (int k = 0; k < 4; ++k) {
        std::vector<double> src(10);
        for (auto& v : src) v = noise(rng);
        pool.shapelets.push_back(from_source(src));
        pool.quality.push_back(1.0);
    }
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(50);
        for (auto& v : x) v = noise(rng);
        auto wm = znormalized_windows(x, 10, 1, true);
        auto cached = shapelet_features_cached(wm, pool);
        auto canonical = shapelet_features(x, pool);
        REQUIRE(cached.size() == canonical.size());
        for (std::size_t i = 0; i < cached.size(); ++i)
            CHECK(cached[i] == doctest::Approx(canonical[i]).epsilon(1e-12));
    }
}

TEST_CASE("mining falls back to Dirichlet draws without anomalies") {
    auto s = make_series(400);
    std::mt19937_64 rng(5);
    for (auto& v : s.values) v = (rng() % 1000) / 100.0;

    ShapeletMiningConfig cfg;
    cfg.shp_len = 10;
    cfg.k = 5;
    cfg.seg_len = 40;
    cfg.stride = 20;
    auto pool = mine_shapelets(s, {{0, 400}}, cfg, 77);
    REQUIRE(pool.size() == 5);
    for (const auto& sh : pool.shapelets) {
        CHECK(sh.source == "dirichlet");
        double mu = 0;
        for (double v : sh.pattern) mu += v;
        mu /= static_cast<double>(sh.pattern.size());
        double var = 0;
        for (double v : sh.pattern) var += (v - mu) * (v - mu);
        var /= static_cast<double>(sh.pattern.size());
        CHECK(std::abs(mu) <= 1e-9);
        CHECK(std::abs(var - 1.0) <= 1e-6);
    }
    // quality sorted non-increasing
    for (std::size_t i = 1; i < pool.quality.size(); ++i)
        CHECK(pool.quality[i - 1] >= pool.quality[i]);
}

TEST_CASE("planted motif outranks Dirichlet noise and respects diversity") {
    auto s = make_series(2000);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 0.3);
    for (auto& v : s.values) v = noise(rng);
    // a strong distinctive motif planted inside every anomaly
    std::vector<double> motif = {0, 4, -4, 4, -4, 4, -4, 4, -4, 0};
    for (std::int64_t at : {200, 500, 800, 1100, 1400, 1700}) {
        for (std::size_t i = 0; i < motif.size(); ++i) {
            s.values[at + i] = motif[i] + noise(rng) * 0.05;
            s.labels[at + i] = 1;
        }
    }

    ShapeletMiningConfig cfg;
    cfg.shp_len = 10;
    cfg.k = 4;
    cfg.seg_len = 40;
    cfg.stride = 10;
    auto pool = mine_shapelets(s, {{0, 2000}}, cfg, 42);
    REQUIRE(pool.size() == 4);
    CHECK(pool.shapelets[0].source.rfind("anomaly:", 0) == 0);

    // determinism: identical inputs+seed give byte-identical pools
    auto again = mine_shapelets(s, {{0, 2000}}, cfg, 42);
    CHECK(pool.to_json() == again.to_json());

    // every anomaly-sourced top pick beats the best Dirichlet-sourced score
    double best_dirichlet = -1e18;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (pool.shapelets[i].source == "dirichlet")
            best_dirichlet = std::max(best_dirichlet, pool.quality[i]);
    if (best_dirichlet > -1e18)
        CHECK(pool.quality[0] > best_dirichlet);

    // diversity gap between anomaly-sourced starts
    std::vector<std::int64_t> starts;
    for (const auto& sh : pool.shapelets)
        if (sh.source.rfind("anomaly:", 0) == 0)
            starts.push_back(std::stoll(sh.source.substr(8)));
    for (std::size_t i = 0; i < starts.size(); ++i)
        for (std::size_t j = i + 1; j < starts.size(); ++j)
            CHECK(std::abs(starts[i] - starts[j]) >= cfg.shp_len / 2);

    // leak check: source windows stay inside the mining index set
    for (auto st : starts) {
        CHECK(st >= 0);
        CHECK(st + cfg.shp_len <= 2000);
    }
}

TEST_CASE("pool json round trip") {
    std::vector<double> src = {1, 5, 2, 6, 3};
    ShapeletPool pool;
    pool.shapelets.push_back(from_source(src, 0.5));
    pool.shapelets.back().source = "anomaly:42";
    pool.quality.push_back(0.9);
    pool.padding = false;
    auto back = ShapeletPool::from_json(pool.to_json());
    CHECK(back.size() == 1);
    CHECK(back.padding == false);
    CHECK(back.quality[0] == doctest::Approx(0.9));
    CHECK(back.shapelets[0].source == "anomaly:42");
    CHECK(back.shapelets[0].pattern == pool.shapelets[0].pattern);
    CHECK(back.shapelets[0].bias == doctest::Approx(0.5));
}

TEST_CASE("mining rejects a region too small for one window") {
    auto s = make_series(50);
    ShapeletMiningConfig cfg;
    cfg.shp_len = 10;
    cfg.k = 2;
    cfg.seg_len = 20;
    cfg.stride = 10;
    CHECK_THROWS(mine_shapelets(s, {{0, 5}}, cfg, 1));
}
