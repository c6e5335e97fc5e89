#include "telem/shapelets.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "telem/features.hpp"

namespace telem {
namespace {

bool znormalize(std::span<const double> in, std::vector<double>& out) {
    const std::size_t n = in.size();
    double mean = 0;
    for (double v : in) mean += v;
    mean /= static_cast<double>(n);
    double var = 0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    out.resize(n);
    if (var <= 0) {
        std::fill(out.begin(), out.end(), 0.0);
        return false;
    }
    const double inv = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < n; ++i) out[i] = (in[i] - mean) * inv;
    return true;
}

struct Candidate {
    Shapelet shapelet;
    double score = 0;
    std::int64_t start = -1;  // -1 for dirichlet
};

Shapelet dirichlet_shapelet(std::int64_t shp_len, double bias,
                            std::int64_t dilation, std::mt19937_64& rng) {
    // Dirichlet(1,...,1) via normalized standard exponentials, then z-norm.
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> raw(shp_len);
    for (;;) {
        double sum = 0;
        for (auto& v : raw) {
            v = expo(rng);
            sum += v;
        }
        for (auto& v : raw) v /= sum;
        Shapelet sh;
        sh.dilation = dilation;
        sh.bias = bias;
        sh.source = "dirichlet";
        if (znormalize(raw, sh.pattern)) return sh;
    }
}

}  // namespace

double quantile(std::vector<double> sample, double q) {
    if (sample.empty()) return 0.0;
    std::sort(sample.begin(), sample.end());
    const double pos = q * static_cast<double>(sample.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sample[lo] * (1.0 - frac) + sample[hi] * frac;
}

std::vector<double> similarity_profile(std::span<const double> segment,
                                       const Shapelet& shapelet, bool padding) {
    const std::int64_t fp = shapelet.footprint();
    std::vector<double> padded;
    const double* data = segment.data();
    std::int64_t len = static_cast<std::int64_t>(segment.size());
    if (padding) {
        const std::int64_t pad = fp / 2;
        padded.reserve(segment.size() + 2 * pad);
        padded.insert(padded.end(), pad, segment.front());
        padded.insert(padded.end(), segment.begin(), segment.end());
        padded.insert(padded.end(), pad, segment.back());
        data = padded.data();
        len += 2 * pad;
    }
    if (fp > len)
        throw std::invalid_argument("similarity_profile: footprint exceeds segment");

    const std::int64_t L = shapelet.length();
    std::vector<double> profile(len - fp + 1);
    std::vector<double> window(L), z;
    for (std::int64_t pos = 0; pos < static_cast<std::int64_t>(profile.size());
         ++pos) {
        for (std::int64_t j = 0; j < L; ++j)
            window[j] = data[pos + j * shapelet.dilation];
        znormalize(window, z);
        double dot = 0;
        for (std::int64_t j = 0; j < L; ++j) dot += z[j] * shapelet.pattern[j];
        profile[pos] = dot + shapelet.bias;
    }
    return profile;
}

std::vector<double> shapelet_features(std::span<const double> segment,
                                      const ShapeletPool& pool) {
    if (pool.size() == 0)
        throw std::invalid_argument("shapelet_features: empty pool");
    std::vector<double> out;
    out.reserve(2 * pool.size());
    for (const auto& sh : pool.shapelets) {
        const auto profile = similarity_profile(segment, sh, pool.padding);
        const auto [mn, mx] = std::minmax_element(profile.begin(), profile.end());
        const double len = static_cast<double>(sh.length());
        out.push_back(*mx / len);
        out.push_back(*mn / len);
    }
    return out;
}

WindowMatrix znormalized_windows(std::span<const double> segment,
                                 std::int64_t shp_len, std::int64_t dilation,
                                 bool padding) {
    const std::int64_t fp = (shp_len - 1) * dilation + 1;
    std::vector<double> padded;
    const double* data = segment.data();
    std::int64_t len = static_cast<std::int64_t>(segment.size());
    if (padding) {
        const std::int64_t pad = fp / 2;
        padded.reserve(segment.size() + 2 * pad);
        padded.insert(padded.end(), pad, segment.front());
        padded.insert(padded.end(), segment.begin(), segment.end());
        padded.insert(padded.end(), pad, segment.back());
        data = padded.data();
        len += 2 * pad;
    }
    if (fp > len)
        throw std::invalid_argument("znormalized_windows: footprint exceeds segment");

    WindowMatrix wm;
    wm.len = shp_len;
    wm.count = static_cast<std::size_t>(len - fp + 1);
    wm.z.resize(wm.count * shp_len);
    std::vector<double> window(shp_len), z;
    for (std::size_t pos = 0; pos < wm.count; ++pos) {
        for (std::int64_t j = 0; j < shp_len; ++j)
            window[j] = data[pos + j * dilation];
        znormalize(window, z);
        std::copy(z.begin(), z.end(), wm.z.begin() + pos * shp_len);
    }
    return wm;
}

std::vector<double> shapelet_features_cached(const WindowMatrix& windows,
                                             const ShapeletPool& pool) {
    std::vector<double> out;
    out.reserve(2 * pool.size());
    for (const auto& sh : pool.shapelets) {
        if (sh.length() != windows.len)
            throw std::invalid_argument(
                "shapelet_features_cached: footprint mismatch");
        double mx = -1e300, mn = 1e300;
        for (std::size_t pos = 0; pos < windows.count; ++pos) {
            const double* w = windows.row(pos);
            double dot = 0;
            for (std::int64_t j = 0; j < windows.len; ++j)
                dot += w[j] * sh.pattern[j];
            dot += sh.bias;
            mx = std::max(mx, dot);
            mn = std::min(mn, dot);
        }
        const double len = static_cast<double>(sh.length());
        out.push_back(mx / len);
        out.push_back(mn / len);
    }
    return out;
}

std::vector<std::string> shapelet_feature_names(std::size_t pool_size) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < pool_size; ++i) {
        names.push_back("shp" + std::to_string(i) + "_max");
        names.push_back("shp" + std::to_string(i) + "_min");
    }
    return names;
}

ShapeletPool mine_shapelets(const ChannelSeries& series,
                            const IndexRuns& mine_idx,
                            const ShapeletMiningConfig& config,
                            std::uint64_t seed) {
    if (config.shp_len < 3)
        throw std::invalid_argument("mine_shapelets: shp_len must be >= 3");
    if (config.k < 1) throw std::invalid_argument("mine_shapelets: K must be >= 1");
    if (runs_max_piece(mine_idx) < config.shp_len)
        throw std::invalid_argument(
            "mine_shapelets: mining region too small for one window");

    std::mt19937_64 rng(seed);

    // Anomaly-overlapping candidate windows, z-normalized.
    std::vector<Candidate> candidates;
    {
        std::vector<std::int64_t> starts;
        for (const auto& run : mine_idx) {
            for (std::int64_t s = run.start; s + config.shp_len <= run.end; ++s) {
                bool anomalous = false;
                for (std::int64_t i = s; i < s + config.shp_len; ++i)
                    if (series.labels[i]) { anomalous = true; break; }
                if (anomalous) starts.push_back(s);
            }
        }
        const std::size_t step =
            std::max<std::size_t>(1, starts.size() / config.max_candidates);
        for (std::size_t i = 0; i < starts.size(); i += step) {
            Candidate c;
            c.start = starts[i];
            c.shapelet.dilation = config.dilation;
            c.shapelet.bias = config.bias;
            c.shapelet.source = "anomaly:" + std::to_string(c.start);
            std::span<const double> window(series.values.data() + c.start,
                                           config.shp_len);
            if (!znormalize(window, c.shapelet.pattern)) continue;  // flat window
            candidates.push_back(std::move(c));
        }
    }
    while (static_cast<int>(candidates.size()) < config.k) {
        Candidate c;
        c.shapelet =
            dirichlet_shapelet(config.shp_len, config.bias, config.dilation, rng);
        candidates.push_back(std::move(c));
    }

    // Scoring segments from the mining region under the OR label rule.
    // Windows are z-normalized once per segment and shared by every candidate.
    const auto segments =
        segmentize(series, mine_idx, config.seg_len, config.stride);
    std::vector<WindowMatrix> seg_windows;
    seg_windows.reserve(segments.size());
    for (const auto& seg : segments)
        seg_windows.push_back(znormalized_windows(seg.values, config.shp_len,
                                                  config.dilation,
                                                  config.padding));
    for (auto& cand : candidates) {
        std::vector<double> anom, nominal;
        for (std::size_t si = 0; si < segments.size(); ++si) {
            const auto& wm = seg_windows[si];
            double best = -1e300;
            for (std::size_t pos = 0; pos < wm.count; ++pos) {
                const double* w = wm.row(pos);
                double dot = 0;
                for (std::int64_t j = 0; j < wm.len; ++j)
                    dot += w[j] * cand.shapelet.pattern[j];
                best = std::max(best, dot + cand.shapelet.bias);
            }
            const double match = best / static_cast<double>(config.shp_len);
            (segments[si].label ? anom : nominal).push_back(match);
        }
        cand.score = quantile(anom, 0.75) - quantile(nominal, 0.75);
    }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         return a.score > b.score;
                     });

    // Greedy pick with the temporal diversity gap for anomaly-sourced picks.
    const std::int64_t gap = config.shp_len / 2;
    ShapeletPool pool;
    pool.padding = config.padding;
    std::vector<std::int64_t> picked_starts;
    for (const auto& cand : candidates) {
        if (static_cast<int>(pool.size()) == config.k) break;
        if (cand.start >= 0) {
            bool close = false;
            for (auto s : picked_starts)
                if (std::llabs(s - cand.start) < gap) { close = true; break; }
            if (close) continue;
            picked_starts.push_back(cand.start);
        }
        pool.shapelets.push_back(cand.shapelet);
        pool.quality.push_back(cand.score);
    }
    // Diversity can exhaust anomaly candidates; fill with fresh draws.
    while (static_cast<int>(pool.size()) < config.k) {
        Candidate c;
        c.shapelet =
            dirichlet_shapelet(config.shp_len, config.bias, config.dilation, rng);
        pool.shapelets.push_back(c.shapelet);
        pool.quality.push_back(pool.quality.empty() ? 0.0 : pool.quality.back());
    }
    return pool;
}

nlohmann::json ShapeletPool::to_json() const {
    nlohmann::json j;
    j["padding"] = padding;
    j["shapelets"] = nlohmann::json::array();
    for (std::size_t i = 0; i < shapelets.size(); ++i) {
        const auto& sh = shapelets[i];
        j["shapelets"].push_back({{"pattern", sh.pattern},
                                  {"dilation", sh.dilation},
                                  {"bias", sh.bias},
                                  {"source", sh.source},
                                  {"quality", quality[i]}});
    }
    return j;
}

ShapeletPool ShapeletPool::from_json(const nlohmann::json& j) {
    ShapeletPool pool;
    pool.padding = j.at("padding").get<bool>();
    for (const auto& e : j.at("shapelets")) {
        Shapelet sh;
        sh.pattern = e.at("pattern").get<std::vector<double>>();
        sh.dilation = e.at("dilation").get<std::int64_t>();
        sh.bias = e.at("bias").get<double>();
        sh.source = e.at("source").get<std::string>();
        pool.shapelets.push_back(std::move(sh));
        pool.quality.push_back(e.at("quality").get<double>());
    }
    return pool;
}

}  // namespace telem
