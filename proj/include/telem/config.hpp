#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "telem/learners.hpp"
#include "telem/selection.hpp"
#include "telem/shapelets.hpp"
#include "telem/synth.hpp"

namespace telem {

/// Flat `key = value` file with dotted section prefixes and '#' comments.
struct KeyValueFile {
    std::map<std::string, std::string> entries;

    static KeyValueFile parse_file(const std::filesystem::path& path);
    static KeyValueFile parse_text(const std::string& text);

    bool has(const std::string& key) const { return entries.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;
};

struct SegmentLengthConfig {
    std::int64_t seg_len = 50;
    std::int64_t stride = 10;
    bool use_shapelets = true;
};

struct PipelineConfig {
    std::int64_t grid_step = 1;
    std::vector<SegmentLengthConfig> lengths;
    std::int64_t pool_len = 5;
    std::int64_t pool_stride = 5;
    int n_level1 = 3;
    int m_level2 = 3;
    std::int64_t cca_len = 4000;
    int shapelet_k = 10;
    std::int64_t shapelet_len = 20;
    double shapelet_bias = 0.0;
    std::int64_t shapelet_dilation = 1;
    bool shapelet_padding = true;
    int shapelet_max_candidates = 256;
    ClassifierKind base_kind = ClassifierKind::gbt;
    ClassifierKind stack_kind = ClassifierKind::logreg;
    ClassifierKind cca_kind = ClassifierKind::logreg;
    std::map<std::string, double> base_params;   // overrides on defaults
    std::map<std::string, double> stack_params;
    std::map<std::string, double> cca_params;
    int search_budget = 0;  // 0 disables per-layer model selection
    SearchStrategy search_strategy = SearchStrategy::bayes;
    int cv_folds = 3;
    double gamma = 2.0;
    double theta = 0.5;
    std::uint64_t seed = 0;
    int workers = 1;

    ShapeletMiningConfig mining_config(const SegmentLengthConfig& lc) const;
    ClassifierSpec layer_spec(ClassifierKind kind,
                              const std::map<std::string, double>& overrides,
                              std::uint64_t seed) const;

    static PipelineConfig from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

SynthConfig synth_config_from_file(const std::filesystem::path& path);

}  // namespace telem
