#include "telem/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "telem/selection.hpp"

namespace telem {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t task_seed(std::uint64_t base, const std::string& tag,
                        std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return splitmix64(base ^ splitmix64(h ^ (a * 1000003ull + b)));
}

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    std::exception_ptr error;
    std::mutex error_mu;
    const int n_threads = std::min<int>(workers, static_cast<int>(count));
    for (int t = 0; t < n_threads; ++t)
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

void require_common_grid(const MultiChannelDataset& dataset) {
    for (std::size_t i = 1; i < dataset.channels.size(); ++i)
        if (dataset.channels[i].timestamps != dataset.channels[0].timestamps)
            throw std::invalid_argument(
                "dataset channels are not on a common timestamp grid "
                "(resample first)");
}

/// Event-wise F0.5 of a classifier trained on pooled base features of the
/// expanding train window, evaluated on the validation fold. Used as the
/// model-selection objective for every layer.
double layer_selection_objective(const MultiChannelDataset& dataset,
                                 IndexInterval region,
                                 const SegmentLengthConfig& lc,
                                 const PipelineConfig& config,
                                 ClassifierKind kind, const ParamMap& params,
                                 std::uint64_t seed) {
    auto cv = tscv_plan(region.length(), config.cv_folds);
    for (auto& iter : cv.iterations) {
        iter.train.start += region.start;
        iter.train.end += region.start;
        iter.validation.start += region.start;
        iter.validation.end += region.start;
    }
    const std::int64_t region_end = region.end;
    // Two channels keep the proxy cheap while still averaging noise.
    const std::size_t n_channels =
        std::min<std::size_t>(2, dataset.channels.size());
    double total = 0;
    int scored = 0;
    for (std::size_t c = 0; c < n_channels; ++c) {
        const auto& series = dataset.channels[c];
        const auto fm = extract_features(series, {region}, lc,
                                         config.pool_len, config.pool_stride,
                                         nullptr);
        for (const auto& iter : cv.iterations) {
            std::vector<std::vector<double>> X_train, X_val;
            std::vector<std::uint8_t> y_train;
            std::vector<IndexInterval> val_spans;
            for (std::size_t r = 0; r < fm.row_count(); ++r) {
                if (fm.spans[r].end <= iter.train.end) {
                    X_train.push_back(fm.rows[r]);
                    y_train.push_back(fm.labels[r]);
                } else if (fm.spans[r].start >= iter.validation.start &&
                           fm.spans[r].end <= iter.validation.end) {
                    X_val.push_back(fm.rows[r]);
                    val_spans.push_back(fm.spans[r]);
                }
            }
            if (X_train.empty() || X_val.empty()) continue;
            ClassifierSpec spec = ClassifierSpec::defaults(kind, seed);
            for (const auto& [k, v] : params) spec.params[k] = v;
            const auto model = fit(spec, X_train, y_train, fm.feature_names);
            const auto probs = model.predict_proba(X_val);

            std::vector<std::uint8_t> decisions(probs.size());
            for (std::size_t i = 0; i < probs.size(); ++i)
                decisions[i] = probs[i] >= config.theta ? 1 : 0;
            const auto raster =
                rasterize_windows(decisions, val_spans, region_end);
            std::vector<std::uint8_t> val_labels(
                series.labels.begin() + iter.validation.start,
                series.labels.begin() + iter.validation.end);
            std::vector<std::uint8_t> val_raster(
                raster.begin() + iter.validation.start,
                raster.begin() + iter.validation.end);
            std::vector<std::int64_t> val_ts(
                series.timestamps.begin() + iter.validation.start,
                series.timestamps.begin() + iter.validation.end);
            const auto predicted = labels_to_events(val_raster, val_ts);
            const auto truth = labels_to_events(val_labels, val_ts);
            total += eventwise_score(predicted, truth, 0.5).f_beta;
            ++scored;
        }
    }
    return scored > 0 ? total / scored : 0.0;
}

SearchSpace layer_search_space(ClassifierKind kind) {
    SearchSpace space;
    if (kind == ClassifierKind::gbt) {
        space.params = {
            {"n_trees", ParamType::integer, 10, 80, {}, true},
            {"max_depth", ParamType::integer, 2, 5, {}, false},
            {"learning_rate", ParamType::real, 0.05, 0.5, {}, true},
            {"min_leaf", ParamType::integer, 2, 20, {}, false},
            {"subsample", ParamType::real, 0.6, 1.0, {}, false},
        };
    } else {
        space.params = {
            {"l2_penalty", ParamType::real, 1e-4, 100.0, {}, true},
        };
    }
    return space;
}

ParamMap select_layer_params(const MultiChannelDataset& dataset,
                             IndexInterval region,
                             const SegmentLengthConfig& lc,
                             const PipelineConfig& config, ClassifierKind kind,
                             const ParamMap& fixed_overrides,
                             const std::string& layer_tag) {
    if (config.search_budget <= 0) return fixed_overrides;
    const std::uint64_t seed = task_seed(config.seed, "select." + layer_tag);
    auto objective = [&](const ParamMap& params) {
        ParamMap merged = fixed_overrides;
        for (const auto& [k, v] : params) merged[k] = v;
        return layer_selection_objective(dataset, region, lc, config, kind,
                                         merged, seed);
    };
    const auto result = search(layer_search_space(kind), objective,
                               config.search_budget, seed,
                               config.search_strategy);
    ParamMap merged = fixed_overrides;
    for (const auto& [k, v] : result.best.params) merged[k] = v;
    return merged;
}

std::vector<double> max_rasterize(const std::vector<double>& probs,
                                  const std::vector<IndexInterval>& spans,
                                  std::int64_t length) {
    std::vector<double> out(length, 0.0);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const std::int64_t lo = std::max<std::int64_t>(0, spans[i].start);
        const std::int64_t hi = std::min(length, spans[i].end);
        for (std::int64_t t = lo; t < hi; ++t)
            out[t] = std::max(out[t], probs[i]);
    }
    return out;
}

}  // namespace

FeatureMatrix extract_features(const ChannelSeries& series,
                               const IndexRuns& index_set,
                               const SegmentLengthConfig& lc,
                               std::int64_t pool_len, std::int64_t pool_stride,
                               const ShapeletPool* pool) {
    const auto segments = segmentize(series, index_set, lc.seg_len, lc.stride);
    if (segments.empty())
        throw std::runtime_error("extract_features: no segments in index set");

    FeatureMatrix fm;
    fm.feature_names.assign(kBaseFeatureNames.begin(), kBaseFeatureNames.end());
    if (pool) {
        const auto shp_names = shapelet_feature_names(pool->size());
        fm.feature_names.insert(fm.feature_names.end(), shp_names.begin(),
                                shp_names.end());
    }
    for (const auto& seg : segments) {
        const auto base = base_features(seg.values);
        std::vector<double> row(base.begin(), base.end());
        if (pool) {
            const auto wm = znormalized_windows(
                seg.values, pool->shapelets.front().length(),
                pool->shapelets.front().dilation, pool->padding);
            const auto shp = shapelet_features_cached(wm, *pool);
            row.insert(row.end(), shp.begin(), shp.end());
        }
        fm.rows.push_back(std::move(row));
        fm.spans.push_back({seg.start, seg.end});
        fm.labels.push_back(seg.label);
    }
    return rolling_minmax_pool(fm, pool_len, pool_stride);
}

const ChannelModel* HierarchicalModel::find_channel(
    const std::string& id) const {
    for (const auto& c : channels)
        if (c.channel_id == id) return &c;
    return nullptr;
}

WindowPrediction channel_predict(const HierarchicalModel& model,
                                 const ChannelModel& channel,
                                 const ChannelSeries& series,
                                 const IndexRuns& index_set) {
    WindowPrediction out;
    const int N = model.n_level1;
    const int M = model.m_level2;

    std::vector<std::vector<double>> ics_outputs;  // [n] -> per-window prob
    for (int n = 0; n < N; ++n) {
        // Stack the M base-model probability columns, each base model seeing
        // the input through its own shapelet pool.
        std::vector<std::vector<double>> columns;
        for (int m = 0; m < M; ++m) {
            const auto& bm = channel.base[n][m];
            const auto fm = extract_features(
                series, index_set, model.length_config, model.pool_len,
                model.pool_stride, bm.has_pool ? &bm.pool : nullptr);
            columns.push_back(bm.classifier.predict_proba(fm.rows));
            if (n == 0 && m == 0) {
                out.spans = fm.spans;
                out.labels = fm.labels;
            }
        }
        std::vector<std::vector<double>> stacked(columns[0].size(),
                                                 std::vector<double>(M));
        for (int m = 0; m < M; ++m)
            for (std::size_t w = 0; w < columns[m].size(); ++w)
                stacked[w][m] = columns[m][w];
        ics_outputs.push_back(channel.stacking[n].predict_proba(stacked));
    }

    const std::size_t W = ics_outputs[0].size();
    out.probs.assign(W, 0.0);
    for (int n = 0; n < N; ++n)
        for (std::size_t w = 0; w < W; ++w) out.probs[w] += ics_outputs[n][w];
    for (std::size_t w = 0; w < W; ++w)
        out.probs[w] /= static_cast<double>(N);
    return out;
}

double group_reduce(const std::map<std::string, double>& channel_probs,
                    const std::vector<std::string>& group,
                    const std::map<std::string, double>& weights,
                    double gamma) {
    double sum = 0;
    for (const auto& cid : group) {
        auto p = channel_probs.find(cid);
        if (p == channel_probs.end())
            throw std::invalid_argument("group_reduce: channel '" + cid +
                                        "' missing from probabilities");
        auto w = weights.find(cid);
        const double weight = w == weights.end() ? 0.0 : w->second;
        sum += weight * std::pow(p->second, gamma);
    }
    return sum;
}

HierarchicalModel train_hierarchy(const MultiChannelDataset& dataset,
                                  const PipelineConfig& config,
                                  const SegmentLengthConfig& lc) {
    dataset.validate();
    require_common_grid(dataset);
    if (dataset.channels.empty())
        throw std::invalid_argument("train_hierarchy: empty dataset");

    const std::int64_t len =
        static_cast<std::int64_t>(dataset.channels[0].size());
    const auto plan = build_masking_plan(len, config.n_level1, config.m_level2,
                                         config.cca_len, lc.seg_len);
    const std::int64_t pre = plan.cca_span.start;

    HierarchicalModel model;
    model.length_config = lc;
    model.pool_len = config.pool_len;
    model.pool_stride = config.pool_stride;
    model.n_level1 = config.n_level1;
    model.m_level2 = config.m_level2;
    model.cca_len = config.cca_len;
    model.grid_step = config.grid_step;
    model.gamma = config.gamma;
    model.theta = config.theta;
    model.mining = config.mining_config(lc);
    model.groups = dataset.groups;
    for (const auto& [gid, members] : dataset.groups)
        model.group_order.push_back(gid);

    // Per-layer hyperparameter selection on designated data regions.
    const ParamMap base_params =
        select_layer_params(dataset, {0, pre}, lc, config, config.base_kind,
                            config.base_params, "base");
    const ParamMap stack_params =
        select_layer_params(dataset, {0, pre}, lc, config, config.stack_kind,
                            config.stack_params, "stack");
    const ParamMap cca_params =
        select_layer_params(dataset, plan.cca_span, lc, config, config.cca_kind,
                            config.cca_params, "cca");

    const auto cv = tscv_plan(pre, config.cv_folds);
    const IndexInterval weight_fold = cv.folds.back();

    model.channels.resize(dataset.channels.size());
    parallel_for(dataset.channels.size(), config.workers, [&](std::size_t c) {
        const auto& series = dataset.channels[c];
        ChannelModel cm;
        cm.channel_id = series.channel_id;

        for (int n = 1; n <= config.n_level1; ++n) {
            std::vector<BaseModel> row;
            for (int m = 1; m <= config.m_level2; ++m) {
                const auto v = view(plan, n, m);
                BaseModel bm;
                if (lc.use_shapelets) {
                    bm.pool = mine_shapelets(
                        series, v.xhat_nm, model.mining,
                        task_seed(config.seed, "mine." + cm.channel_id, n, m));
                    bm.has_pool = true;
                }
                const auto fm = extract_features(
                    series, v.remainder, lc, config.pool_len,
                    config.pool_stride, bm.has_pool ? &bm.pool : nullptr);
                ClassifierSpec spec = config.layer_spec(
                    config.base_kind, base_params,
                    task_seed(config.seed, "base." + cm.channel_id, n, m));
                bm.classifier = fit(spec, fm.rows, fm.labels, fm.feature_names);
                row.push_back(std::move(bm));
            }
            cm.base.push_back(std::move(row));
        }

        for (int n = 1; n <= config.n_level1; ++n) {
            const IndexRuns x_n = {plan.level1[n - 1]};
            std::vector<std::vector<double>> columns;
            std::vector<std::uint8_t> labels;
            for (int m = 0; m < config.m_level2; ++m) {
                const auto& bm = cm.base[n - 1][m];
                const auto fm = extract_features(
                    series, x_n, lc, config.pool_len, config.pool_stride,
                    bm.has_pool ? &bm.pool : nullptr);
                columns.push_back(bm.classifier.predict_proba(fm.rows));
                if (m == 0) labels = fm.labels;
            }
            std::vector<std::vector<double>> stacked(
                columns[0].size(), std::vector<double>(config.m_level2));
            for (int m = 0; m < config.m_level2; ++m)
                for (std::size_t w = 0; w < columns[m].size(); ++w)
                    stacked[w][m] = columns[m][w];
            std::vector<std::string> names;
            for (int m = 1; m <= config.m_level2; ++m)
                names.push_back("bm" + std::to_string(m) + "_prob");
            ClassifierSpec spec = config.layer_spec(
                config.stack_kind, stack_params,
                task_seed(config.seed, "stack." + cm.channel_id, n, 0));
            cm.stacking.push_back(fit(spec, stacked, labels, names));
        }
        model.channels[c] = std::move(cm);
    });

    // Channel weights: event-wise precision of the averaged channel-level
    // prediction on the final cross-validation fold of the pre-tail region.
    parallel_for(dataset.channels.size(), config.workers, [&](std::size_t c) {
        const auto& series = dataset.channels[c];
        const auto wp =
            channel_predict(model, model.channels[c], series, {weight_fold});
        model.channels[c].weight =
            precision_weight(wp.probs, wp.spans, series.labels,
                             series.timestamps, config.theta);
    });

    // Cross-channel layer on the disjoint tail.
    if (plan.cca_span.empty())
        throw std::invalid_argument(
            "train_hierarchy: cca_len must be > 0 to train the cross-channel "
            "layer");
    std::map<std::string, double> weights;
    for (const auto& cm : model.channels) weights[cm.channel_id] = cm.weight;

    std::vector<WindowPrediction> tail(dataset.channels.size());
    parallel_for(dataset.channels.size(), config.workers, [&](std::size_t c) {
        tail[c] = channel_predict(model, model.channels[c],
                                  dataset.channels[c], {plan.cca_span});
    });
    const std::size_t W = tail[0].probs.size();
    std::vector<std::vector<double>> group_rows(
        W, std::vector<double>(model.group_order.size()));
    for (std::size_t w = 0; w < W; ++w) {
        std::map<std::string, double> probs;
        for (std::size_t c = 0; c < dataset.channels.size(); ++c)
            probs[dataset.channels[c].channel_id] = tail[c].probs[w];
        for (std::size_t g = 0; g < model.group_order.size(); ++g)
            group_rows[w][g] =
                group_reduce(probs, model.groups.at(model.group_order[g]),
                             weights, config.gamma);
    }
    std::vector<std::string> group_names;
    for (const auto& gid : model.group_order) group_names.push_back("gr_" + gid);
    for (std::size_t c = 0; c < dataset.channels.size(); ++c) {
        const std::string& cid = dataset.channels[c].channel_id;
        // A channel whose tail slice holds no anomaly (or only anomalies)
        // would degenerate to a constant head and silence the channel at
        // inference; fall back to the union of its group's tail labels so
        // the head still learns the group's anomaly signature.
        std::vector<std::uint8_t> labels = tail[c].labels;
        const bool single_class =
            std::find(labels.begin(), labels.end(), std::uint8_t(1)) ==
                labels.end() ||
            std::find(labels.begin(), labels.end(), std::uint8_t(0)) ==
                labels.end();
        if (single_class) {
            std::string gid;
            for (const auto& [g, members] : model.groups)
                if (std::find(members.begin(), members.end(), cid) !=
                    members.end())
                    gid = g;
            for (std::size_t o = 0; o < dataset.channels.size(); ++o) {
                const auto& other = dataset.channels[o].channel_id;
                const auto& members = model.groups.at(gid);
                if (std::find(members.begin(), members.end(), other) ==
                    members.end())
                    continue;
                for (std::size_t w = 0; w < W; ++w)
                    labels[w] |= tail[o].labels[w];
            }
        }
        ClassifierSpec spec = config.layer_spec(
            config.cca_kind, cca_params, task_seed(config.seed, "cca." + cid));
        model.cca[cid] = fit(spec, group_rows, labels, group_names);
    }
    return model;
}

PredictionFrame predict(const HierarchicalModel& model,
                        const MultiChannelDataset& dataset, int workers) {
    dataset.validate();
    require_common_grid(dataset);
    for (const auto& cm : model.channels)
        if (!dataset.find_channel(cm.channel_id))
            throw std::invalid_argument("predict: dataset missing channel '" +
                                        cm.channel_id + "'");
    for (const auto& c : dataset.channels)
        if (!model.find_channel(c.channel_id))
            throw std::invalid_argument("predict: model has no channel '" +
                                        c.channel_id + "'");
    if (dataset.groups != model.groups)
        throw std::invalid_argument(
            "predict: channel/group structure differs from training");

    const std::int64_t len =
        static_cast<std::int64_t>(dataset.channels[0].size());
    const IndexRuns full = {{0, len}};

    // Layer 1+2 per channel, on the unmasked input series.
    std::vector<WindowPrediction> wp(dataset.channels.size());
    parallel_for(dataset.channels.size(), workers, [&](std::size_t c) {
        wp[c] = channel_predict(model, *model.find_channel(
                                           dataset.channels[c].channel_id),
                                dataset.channels[c], full);
    });

    std::map<std::string, double> weights;
    for (const auto& cm : model.channels) weights[cm.channel_id] = cm.weight;

    const std::size_t W = wp[0].probs.size();
    std::vector<std::vector<double>> group_rows(
        W, std::vector<double>(model.group_order.size()));
    for (std::size_t w = 0; w < W; ++w) {
        std::map<std::string, double> probs;
        for (std::size_t c = 0; c < dataset.channels.size(); ++c)
            probs[dataset.channels[c].channel_id] = wp[c].probs[w];
        for (std::size_t g = 0; g < model.group_order.size(); ++g)
            group_rows[w][g] =
                group_reduce(probs, model.groups.at(model.group_order[g]),
                             weights, model.gamma);
    }

    PredictionFrame frame;
    for (std::size_t c = 0; c < dataset.channels.size(); ++c) {
        const auto& series = dataset.channels[c];
        ChannelPrediction cp;
        cp.channel_id = series.channel_id;
        cp.timestamps = series.timestamps;
        cp.window_spans = wp[c].spans;
        cp.window_probs =
            model.cca.at(series.channel_id).predict_proba(group_rows);
        cp.window_decisions.resize(W);
        for (std::size_t w = 0; w < W; ++w)
            cp.window_decisions[w] = cp.window_probs[w] >= model.theta ? 1 : 0;
        cp.timestep_decisions =
            rasterize_windows(cp.window_decisions, cp.window_spans, len);
        cp.timestep_probs = max_rasterize(cp.window_probs, cp.window_spans, len);
        cp.provenance = "cca";
        frame.channels.push_back(std::move(cp));
    }
    return frame;
}

PredictionFrame or_combine(const std::vector<PredictionFrame>& frames) {
    if (frames.empty()) throw std::invalid_argument("or_combine: no frames");
    PredictionFrame out;
    for (const auto& base : frames[0].channels) {
        ChannelPrediction cp;
        cp.channel_id = base.channel_id;
        cp.timestamps = base.timestamps;
        cp.timestep_probs = base.timestep_probs;
        cp.timestep_decisions = base.timestep_decisions;
        cp.provenance = "or_combine";
        for (std::size_t f = 1; f < frames.size(); ++f) {
            const ChannelPrediction* other = nullptr;
            for (const auto& c : frames[f].channels)
                if (c.channel_id == base.channel_id) { other = &c; break; }
            if (!other || other->timestamps != cp.timestamps)
                throw std::invalid_argument(
                    "or_combine: frames disagree on channel/grid structure");
            for (std::size_t t = 0; t < cp.timestamps.size(); ++t) {
                cp.timestep_decisions[t] |= other->timestep_decisions[t];
                cp.timestep_probs[t] =
                    std::max(cp.timestep_probs[t], other->timestep_probs[t]);
            }
        }
        out.channels.push_back(std::move(cp));
    }
    for (std::size_t f = 1; f < frames.size(); ++f)
        if (frames[f].channels.size() != frames[0].channels.size())
            throw std::invalid_argument("or_combine: channel sets differ");
    return out;
}

std::vector<AnomalyEvent> PredictionFrame::to_events() const {
    std::vector<AnomalyEvent> events;
    for (const auto& cp : channels) {
        auto channel_events =
            labels_to_events(cp.timestep_decisions, cp.timestamps,
                             cp.channel_id);
        events.insert(events.end(), channel_events.begin(),
                      channel_events.end());
    }
    return events;
}

void PredictionFrame::save_csv(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "channel_id,timestamp,probability,decision\n";
    char buf[96];
    for (const auto& cp : channels)
        for (std::size_t t = 0; t < cp.timestamps.size(); ++t) {
            std::snprintf(buf, sizeof(buf), "%s,%lld,%.6f,%d",
                          cp.channel_id.c_str(),
                          static_cast<long long>(cp.timestamps[t]),
                          cp.timestep_probs[t],
                          static_cast<int>(cp.timestep_decisions[t]));
            out << buf << '\n';
        }
}

void HierarchicalModel::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["length_config"] = {{"seg_len", length_config.seg_len},
                                 {"stride", length_config.stride},
                                 {"use_shapelets", length_config.use_shapelets}};
    manifest["pool_len"] = pool_len;
    manifest["pool_stride"] = pool_stride;
    manifest["n_level1"] = n_level1;
    manifest["m_level2"] = m_level2;
    manifest["cca_len"] = cca_len;
    manifest["grid_step"] = grid_step;
    manifest["gamma"] = gamma;
    manifest["theta"] = theta;
    manifest["mining"] = {{"shp_len", mining.shp_len},
                          {"k", mining.k},
                          {"bias", mining.bias},
                          {"dilation", mining.dilation},
                          {"padding", mining.padding},
                          {"seg_len", mining.seg_len},
                          {"stride", mining.stride},
                          {"max_candidates", mining.max_candidates}};
    manifest["group_order"] = group_order;
    manifest["groups"] = groups;
    nlohmann::json chans = nlohmann::json::array();
    for (const auto& cm : channels)
        chans.push_back({{"channel_id", cm.channel_id}, {"weight", cm.weight}});
    manifest["channels"] = chans;
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';

    for (const auto& cm : channels) {
        const auto cdir = dir / "channels" / cm.channel_id;
        std::filesystem::create_directories(cdir);
        for (int n = 0; n < n_level1; ++n) {
            for (int m = 0; m < m_level2; ++m) {
                const auto& bm = cm.base[n][m];
                nlohmann::json j;
                j["classifier"] = bm.classifier.to_json();
                j["has_pool"] = bm.has_pool;
                if (bm.has_pool) j["pool"] = bm.pool.to_json();
                std::ofstream(cdir / ("bm_" + std::to_string(n + 1) + "_" +
                                      std::to_string(m + 1) + ".json"))
                    << j.dump() << '\n';
            }
            std::ofstream(cdir / ("ics_" + std::to_string(n + 1) + ".json"))
                << cm.stacking[n].to_json().dump() << '\n';
        }
    }
    const auto cca_dir = dir / "cca";
    std::filesystem::create_directories(cca_dir);
    for (const auto& [cid, clf] : cca)
        std::ofstream(cca_dir / (cid + ".json")) << clf.to_json().dump() << '\n';
}

HierarchicalModel HierarchicalModel::load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in)
        throw std::runtime_error("cannot open model manifest in " + dir.string());
    nlohmann::json manifest = nlohmann::json::parse(in);

    HierarchicalModel model;
    model.length_config.seg_len = manifest.at("length_config").at("seg_len");
    model.length_config.stride = manifest.at("length_config").at("stride");
    model.length_config.use_shapelets =
        manifest.at("length_config").at("use_shapelets");
    model.pool_len = manifest.at("pool_len");
    model.pool_stride = manifest.at("pool_stride");
    model.n_level1 = manifest.at("n_level1");
    model.m_level2 = manifest.at("m_level2");
    model.cca_len = manifest.at("cca_len");
    model.grid_step = manifest.at("grid_step");
    model.gamma = manifest.at("gamma");
    model.theta = manifest.at("theta");
    const auto& mj = manifest.at("mining");
    model.mining.shp_len = mj.at("shp_len");
    model.mining.k = mj.at("k");
    model.mining.bias = mj.at("bias");
    model.mining.dilation = mj.at("dilation");
    model.mining.padding = mj.at("padding");
    model.mining.seg_len = mj.at("seg_len");
    model.mining.stride = mj.at("stride");
    model.mining.max_candidates = mj.at("max_candidates");
    model.group_order =
        manifest.at("group_order").get<std::vector<std::string>>();
    model.groups =
        manifest.at("groups")
            .get<std::map<std::string, std::vector<std::string>>>();

    for (const auto& cj : manifest.at("channels")) {
        ChannelModel cm;
        cm.channel_id = cj.at("channel_id").get<std::string>();
        cm.weight = cj.at("weight").get<double>();
        const auto cdir = dir / "channels" / cm.channel_id;
        for (int n = 1; n <= model.n_level1; ++n) {
            std::vector<BaseModel> row;
            for (int m = 1; m <= model.m_level2; ++m) {
                std::ifstream bin(cdir / ("bm_" + std::to_string(n) + "_" +
                                          std::to_string(m) + ".json"));
                if (!bin)
                    throw std::runtime_error("model dir incomplete: missing " +
                                             cm.channel_id + " bm_" +
                                             std::to_string(n) + "_" +
                                             std::to_string(m));
                nlohmann::json j = nlohmann::json::parse(bin);
                BaseModel bm;
                bm.classifier = TrainedClassifier::from_json(j.at("classifier"));
                bm.has_pool = j.at("has_pool").get<bool>();
                if (bm.has_pool) bm.pool = ShapeletPool::from_json(j.at("pool"));
                row.push_back(std::move(bm));
            }
            cm.base.push_back(std::move(row));
            std::ifstream sin(cdir / ("ics_" + std::to_string(n) + ".json"));
            if (!sin)
                throw std::runtime_error("model dir incomplete: missing " +
                                         cm.channel_id + " ics_" +
                                         std::to_string(n));
            cm.stacking.push_back(
                TrainedClassifier::from_json(nlohmann::json::parse(sin)));
        }
        model.channels.push_back(std::move(cm));
    }
    for (const auto& cm : model.channels) {
        std::ifstream cin(dir / "cca" / (cm.channel_id + ".json"));
        if (!cin)
            throw std::runtime_error("model dir incomplete: missing cca head " +
                                     cm.channel_id);
        model.cca[cm.channel_id] =
            TrainedClassifier::from_json(nlohmann::json::parse(cin));
    }
    return model;
}

}  // namespace telem
