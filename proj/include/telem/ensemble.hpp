#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "telem/config.hpp"
#include "telem/features.hpp"
#include "telem/learners.hpp"
#include "telem/masking.hpp"
#include "telem/series.hpp"
#include "telem/shapelets.hpp"

namespace telem {

struct BaseModel {
    TrainedClassifier classifier;
    ShapeletPool pool;  // empty when shapelet features are disabled
    bool has_pool = false;
};

struct ChannelModel {
    std::string channel_id;
    std::vector<std::vector<BaseModel>> base;   // [n][m]
    std::vector<TrainedClassifier> stacking;    // [n]
    double weight = 0;  // event-wise validation precision
};

/// One trained hierarchy for a single segment-length configuration.
struct HierarchicalModel {
    SegmentLengthConfig length_config;
    std::int64_t pool_len = 5;
    std::int64_t pool_stride = 5;
    int n_level1 = 3;
    int m_level2 = 3;
    std::int64_t cca_len = 0;
    std::int64_t grid_step = 1;
    double gamma = 2.0;
    double theta = 0.5;
    ShapeletMiningConfig mining;

    std::vector<ChannelModel> channels;
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<std::string>> groups;
    std::map<std::string, TrainedClassifier> cca;  // per output channel

    const ChannelModel* find_channel(const std::string& id) const;
    void save(const std::filesystem::path& dir) const;
    static HierarchicalModel load(const std::filesystem::path& dir);
};

struct ChannelPrediction {
    std::string channel_id;
    std::vector<std::int64_t> timestamps;
    std::vector<IndexInterval> window_spans;
    std::vector<double> window_probs;
    std::vector<std::uint8_t> window_decisions;
    std::vector<double> timestep_probs;        // max over covering windows
    std::vector<std::uint8_t> timestep_decisions;  // OR over covering windows
    std::string provenance;
};

struct PredictionFrame {
    std::vector<ChannelPrediction> channels;

    std::vector<AnomalyEvent> to_events() const;
    void save_csv(const std::filesystem::path& file) const;
};

/// Pooled feature matrix over `index_set`: the nine base descriptors plus,
/// when a pool is supplied, 2K shapelet match features per segment.
FeatureMatrix extract_features(const ChannelSeries& series,
                               const IndexRuns& index_set,
                               const SegmentLengthConfig& lc,
                               std::int64_t pool_len, std::int64_t pool_stride,
                               const ShapeletPool* pool);

HierarchicalModel train_hierarchy(const MultiChannelDataset& dataset,
                                  const PipelineConfig& config,
                                  const SegmentLengthConfig& lc);

/// Mean over n of ICS[n] outputs on windows drawn from `index_set`.
/// Returns pooled-window probabilities; spans/labels describe those windows.
struct WindowPrediction {
    std::vector<double> probs;
    std::vector<IndexInterval> spans;
    std::vector<std::uint8_t> labels;
};
WindowPrediction channel_predict(const HierarchicalModel& model,
                                 const ChannelModel& channel,
                                 const ChannelSeries& series,
                                 const IndexRuns& index_set);

/// Power-weighted sum over the group: sum_{c in G} w_c * p_c^gamma.
double group_reduce(const std::map<std::string, double>& channel_probs,
                    const std::vector<std::string>& group,
                    const std::map<std::string, double>& weights, double gamma);

PredictionFrame predict(const HierarchicalModel& model,
                        const MultiChannelDataset& dataset, int workers = 1);

/// Per-timestep OR of decisions (max of probabilities) across frames.
PredictionFrame or_combine(const std::vector<PredictionFrame>& frames);

}  // namespace telem
