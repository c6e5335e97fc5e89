#include "telem/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace telem {
namespace {

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse_text(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto t = strip(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        kv.entries[strip(t.substr(0, eq))] = strip(t.substr(eq + 1));
    }
    return kv;
}

KeyValueFile KeyValueFile::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

std::string KeyValueFile::get(const std::string& key,
                              const std::string& fallback) const {
    auto it = entries.find(key);
    return it == entries.end() ? fallback : it->second;
}

std::int64_t KeyValueFile::get_int(const std::string& key,
                                   std::int64_t fallback) const {
    auto it = entries.find(key);
    if (it == entries.end()) return fallback;
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': bad integer '" +
                                 it->second + "'");
    }
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
    auto it = entries.find(key);
    if (it == entries.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': bad number '" +
                                 it->second + "'");
    }
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
    auto it = entries.find(key);
    if (it == entries.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::runtime_error("config key '" + key + "': bad bool '" +
                             it->second + "'");
}

std::vector<std::string> KeyValueFile::get_list(const std::string& key) const {
    std::vector<std::string> out;
    auto it = entries.find(key);
    if (it == entries.end()) return out;
    std::stringstream ss(it->second);
    std::string field;
    while (std::getline(ss, field, ',')) {
        auto t = strip(field);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

ShapeletMiningConfig PipelineConfig::mining_config(
    const SegmentLengthConfig& lc) const {
    ShapeletMiningConfig cfg;
    cfg.shp_len = shapelet_len;
    cfg.k = shapelet_k;
    cfg.bias = shapelet_bias;
    cfg.dilation = shapelet_dilation;
    cfg.padding = shapelet_padding;
    cfg.seg_len = lc.seg_len;
    cfg.stride = lc.stride;
    cfg.max_candidates = shapelet_max_candidates;
    return cfg;
}

ClassifierSpec PipelineConfig::layer_spec(
    ClassifierKind kind, const std::map<std::string, double>& overrides,
    std::uint64_t layer_seed) const {
    ClassifierSpec spec = ClassifierSpec::defaults(kind, layer_seed);
    for (const auto& [k, v] : overrides) spec.params[k] = v;
    spec.validate();
    return spec;
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
    const auto kv = KeyValueFile::parse_file(path);
    PipelineConfig cfg;
    if (!kv.has("seed"))
        throw std::runtime_error("config: 'seed' is mandatory");
    cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
    cfg.grid_step = kv.get_int("data.grid_step", 1);

    auto lengths = kv.get_list("features.segment_lengths");
    if (lengths.empty())
        throw std::runtime_error("config: features.segment_lengths required");
    auto shapelet_lengths = kv.get_list("features.shapelet_lengths");
    auto strides = kv.get_list("features.strides");
    if (!strides.empty() && strides.size() != lengths.size())
        throw std::runtime_error(
            "config: features.strides must align with segment_lengths");
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        SegmentLengthConfig lc;
        lc.seg_len = std::stoll(lengths[i]);
        lc.stride = strides.empty() ? std::max<std::int64_t>(1, lc.seg_len / 5)
                                    : std::stoll(strides[i]);
        if (shapelet_lengths.empty()) {
            // Default mirrors the reference setting: shapelets only for the
            // shortest configured length (cost grows fast with segment size).
            lc.use_shapelets = lc.seg_len <= 50;
        } else {
            lc.use_shapelets =
                std::find(shapelet_lengths.begin(), shapelet_lengths.end(),
                          lengths[i]) != shapelet_lengths.end();
        }
        cfg.lengths.push_back(lc);
    }

    cfg.pool_len = kv.get_int("features.pool_len", cfg.pool_len);
    cfg.pool_stride = kv.get_int("features.pool_stride", cfg.pool_stride);
    cfg.n_level1 = static_cast<int>(kv.get_int("masking.n", cfg.n_level1));
    cfg.m_level2 = static_cast<int>(kv.get_int("masking.m", cfg.m_level2));
    cfg.cca_len = kv.get_int("masking.cca_len", cfg.cca_len);
    cfg.shapelet_k = static_cast<int>(kv.get_int("shapelets.k", cfg.shapelet_k));
    cfg.shapelet_len = kv.get_int("shapelets.len", cfg.shapelet_len);
    cfg.shapelet_bias = kv.get_double("shapelets.bias", cfg.shapelet_bias);
    cfg.shapelet_dilation =
        kv.get_int("shapelets.dilation", cfg.shapelet_dilation);
    cfg.shapelet_padding =
        kv.get_bool("shapelets.padding", cfg.shapelet_padding);
    cfg.shapelet_max_candidates = static_cast<int>(
        kv.get_int("shapelets.max_candidates", cfg.shapelet_max_candidates));

    cfg.base_kind = classifier_kind_from_string(kv.get("base.kind", "gbt"));
    cfg.stack_kind = classifier_kind_from_string(kv.get("stack.kind", "logreg"));
    cfg.cca_kind = classifier_kind_from_string(kv.get("cca.kind", "logreg"));
    auto read_params = [&](const std::string& prefix, ClassifierKind kind,
                           std::map<std::string, double>& out) {
        for (const auto& key : ClassifierSpec::defaults(kind).params)
            if (kv.has(prefix + "." + key.first))
                out[key.first] = kv.get_double(prefix + "." + key.first, 0);
    };
    read_params("base", cfg.base_kind, cfg.base_params);
    read_params("stack", cfg.stack_kind, cfg.stack_params);
    read_params("cca", cfg.cca_kind, cfg.cca_params);

    cfg.search_budget =
        static_cast<int>(kv.get_int("search.budget", cfg.search_budget));
    const auto strategy = kv.get("search.strategy", "bayes");
    if (strategy == "bayes")
        cfg.search_strategy = SearchStrategy::bayes;
    else if (strategy == "random")
        cfg.search_strategy = SearchStrategy::random;
    else
        throw std::runtime_error("config: unknown search.strategy '" + strategy +
                                 "'");
    cfg.cv_folds = static_cast<int>(kv.get_int("cv.folds", cfg.cv_folds));
    cfg.gamma = kv.get_double("ensemble.gamma", cfg.gamma);
    cfg.theta = kv.get_double("ensemble.theta", cfg.theta);
    cfg.workers = static_cast<int>(kv.get_int("workers", cfg.workers));

    if (cfg.gamma < 1.0) throw std::runtime_error("config: gamma must be >= 1");
    if (!(cfg.theta > 0.0 && cfg.theta < 1.0))
        throw std::runtime_error("config: theta must lie in (0,1)");
    return cfg;
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    j["grid_step"] = grid_step;
    j["lengths"] = nlohmann::json::array();
    for (const auto& lc : lengths)
        j["lengths"].push_back({{"seg_len", lc.seg_len},
                                {"stride", lc.stride},
                                {"use_shapelets", lc.use_shapelets}});
    j["pool_len"] = pool_len;
    j["pool_stride"] = pool_stride;
    j["masking"] = {{"n", n_level1}, {"m", m_level2}, {"cca_len", cca_len}};
    j["shapelets"] = {{"k", shapelet_k},
                      {"len", shapelet_len},
                      {"bias", shapelet_bias},
                      {"dilation", shapelet_dilation},
                      {"padding", shapelet_padding},
                      {"max_candidates", shapelet_max_candidates}};
    j["base"] = {{"kind", to_string(base_kind)}, {"params", base_params}};
    j["stack"] = {{"kind", to_string(stack_kind)}, {"params", stack_params}};
    j["cca"] = {{"kind", to_string(cca_kind)}, {"params", cca_params}};
    j["search"] = {{"budget", search_budget},
                   {"strategy", search_strategy == SearchStrategy::bayes
                                    ? "bayes"
                                    : "random"}};
    j["cv_folds"] = cv_folds;
    j["gamma"] = gamma;
    j["theta"] = theta;
    j["seed"] = seed;
    j["workers"] = workers;
    return j;
}

SynthConfig synth_config_from_file(const std::filesystem::path& path) {
    const auto kv = KeyValueFile::parse_file(path);
    SynthConfig cfg;
    cfg.channel_count =
        static_cast<int>(kv.get_int("synth.channels", cfg.channel_count));
    cfg.group_count =
        static_cast<int>(kv.get_int("synth.groups", cfg.group_count));
    cfg.length = kv.get_int("synth.length", cfg.length);
    cfg.grid_step = kv.get_int("synth.grid_step", cfg.grid_step);
    cfg.density = kv.get_double("synth.density", cfg.density);
    auto archetypes = kv.get_list("synth.archetypes");
    if (!archetypes.empty()) cfg.archetypes = archetypes;
    cfg.cross_channel_prob =
        kv.get_double("synth.cross_channel_prob", cfg.cross_channel_prob);
    cfg.min_event_len = kv.get_int("synth.min_event_len", cfg.min_event_len);
    cfg.max_event_len = kv.get_int("synth.max_event_len", cfg.max_event_len);
    return cfg;
}

}  // namespace telem
