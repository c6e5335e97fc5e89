#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "telem/interval.hpp"
#include "telem/series.hpp"

namespace telem {

struct Segment {
    std::int64_t start = 0;  // grid positions, end exclusive
    std::int64_t end = 0;
    std::vector<double> values;
    std::uint8_t label = 0;  // 1 iff any covered timestep label is 1
};

struct FeatureMatrix {
    std::vector<std::vector<double>> rows;
    std::vector<IndexInterval> spans;
    std::vector<std::uint8_t> labels;
    std::vector<std::string> feature_names;

    std::size_t row_count() const { return rows.size(); }
    std::size_t dim() const { return feature_names.size(); }
};

/// Sliding windows over every contiguous run of index_set; no window
/// straddles a hole.
std::vector<Segment> segmentize(const ChannelSeries& series,
                                const IndexRuns& index_set,
                                std::int64_t seg_len, std::int64_t stride);

inline constexpr std::size_t kBaseFeatureCount = 9;
extern const std::array<std::string, kBaseFeatureCount> kBaseFeatureNames;

/// [mean, var, std, skew, kurt, stft_energy, spec_centroid, slope, diff_var]
/// with population (1/T) moments. Skew and Kurt are 0 when sigma is 0.
std::array<double, kBaseFeatureCount> base_features(std::span<const double> s);

/// Rolling min-max pooling over the row axis. Output dimension doubles
/// (`_min`/`_max` suffixes); the trailing partial window is emitted.
FeatureMatrix rolling_minmax_pool(const FeatureMatrix& features,
                                  std::int64_t pool_len,
                                  std::int64_t pool_stride);

}  // namespace telem
