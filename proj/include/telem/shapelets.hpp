#pragma once

#include <cstdint>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "telem/interval.hpp"
#include "telem/series.hpp"

namespace telem {

/// A z-normalized (zero mean, unit population variance) subsequence used as
/// a matching template.
struct Shapelet {
    std::vector<double> pattern;
    std::int64_t dilation = 1;
    double bias = 0.0;
    std::string source;  // "anomaly:<start>" or "dirichlet"

    std::int64_t length() const { return static_cast<std::int64_t>(pattern.size()); }
    std::int64_t footprint() const { return (length() - 1) * dilation + 1; }
};

struct ShapeletPool {
    std::vector<Shapelet> shapelets;
    std::vector<double> quality;  // sorted non-increasing, parallel to shapelets
    bool padding = true;

    std::size_t size() const { return shapelets.size(); }
    nlohmann::json to_json() const;
    static ShapeletPool from_json(const nlohmann::json& j);
};

struct ShapeletMiningConfig {
    std::int64_t shp_len = 20;
    int k = 10;
    double bias = 0.0;
    std::int64_t dilation = 1;
    bool padding = true;
    // Segmentation used to form the anomalous/nominal scoring sets.
    std::int64_t seg_len = 50;
    std::int64_t stride = 10;
    // Caps the candidate set by subsampling starts when the region is dense.
    int max_candidates = 256;
};

/// Candidate subsequences come from anomaly-overlapping windows inside
/// mine_idx; Dirichlet(1,...,1) draws top up the pool when anomalies are
/// scarce. Scoring compares 75% quantiles of match strength on anomalous vs
/// nominal segments; greedy selection enforces a shp_len/2 start gap between
/// anomaly-sourced picks. Returns exactly K shapelets.
ShapeletPool mine_shapelets(const ChannelSeries& series,
                            const IndexRuns& mine_idx,
                            const ShapeletMiningConfig& config,
                            std::uint64_t seed);

/// Match strength of the shapelet at every window position. Each (dilated)
/// window is z-normalized (zero vector when its variance is 0) and dotted
/// with the pattern, plus the bias. Padding is edge replication of
/// footprint/2 samples on each side.
std::vector<double> similarity_profile(std::span<const double> segment,
                                       const Shapelet& shapelet, bool padding);

/// Per shapelet: [max(profile)/length, min(profile)/length], in pool order.
std::vector<double> shapelet_features(std::span<const double> segment,
                                      const ShapeletPool& pool);

std::vector<std::string> shapelet_feature_names(std::size_t pool_size);

/// Pre-z-normalized windows of one segment for a fixed (length, dilation,
/// padding) footprint; shared across every shapelet with that footprint.
struct WindowMatrix {
    std::size_t count = 0;
    std::int64_t len = 0;
    std::vector<double> z;  // row-major, count x len

    const double* row(std::size_t i) const { return z.data() + i * len; }
};

WindowMatrix znormalized_windows(std::span<const double> segment,
                                 std::int64_t shp_len, std::int64_t dilation,
                                 bool padding);

/// Same result as shapelet_features when the pool's shapelets share one
/// footprint matching `windows`.
std::vector<double> shapelet_features_cached(const WindowMatrix& windows,
                                             const ShapeletPool& pool);

/// Linear-interpolation quantile of an unsorted sample; q in [0,1].
double quantile(std::vector<double> sample, double q);

}  // namespace telem
