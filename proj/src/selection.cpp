#include "telem/selection.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace telem {
namespace {

double draw_param(const ParamDef& def, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (def.type) {
        case ParamType::categorical: {
            std::uniform_int_distribution<std::size_t> pick(0,
                                                            def.choices.size() - 1);
            return def.choices[pick(rng)];
        }
        case ParamType::real: {
            if (def.log_scale) {
                const double u = unit(rng);
                return std::exp(std::log(def.lo) +
                                u * (std::log(def.hi) - std::log(def.lo)));
            }
            return def.lo + unit(rng) * (def.hi - def.lo);
        }
        case ParamType::integer: {
            double v;
            if (def.log_scale) {
                const double u = unit(rng);
                v = std::exp(std::log(def.lo) +
                             u * (std::log(def.hi) - std::log(def.lo)));
            } else {
                v = def.lo + unit(rng) * (def.hi - def.lo);
            }
            return std::clamp(std::round(v), def.lo, def.hi);
        }
    }
    return def.lo;
}

ParamMap draw_point(const SearchSpace& space, std::mt19937_64& rng) {
    ParamMap p;
    for (const auto& def : space.params) p[def.name] = draw_param(def, rng);
    return p;
}

/// Parzen density of one coordinate given past observations, in the
/// transformed (log where applicable) space. Categorical uses smoothed counts.
double coord_density(const ParamDef& def, double x,
                     const std::vector<double>& obs) {
    if (def.type == ParamType::categorical) {
        double count = 1.0;  // Laplace smoothing
        for (double o : obs)
            if (o == x) count += 1.0;
        return count / (static_cast<double>(obs.size()) +
                        static_cast<double>(def.choices.size()));
    }
    auto tf = [&](double v) { return def.log_scale ? std::log(v) : v; };
    const double span = std::max(1e-12, tf(def.hi) - tf(def.lo));
    const double bw = span / std::max(3.0, std::sqrt(static_cast<double>(
                                               std::max<std::size_t>(1, obs.size()))));
    const double xi = tf(x);
    double dens = 1.0 / span;  // uniform prior mixed in
    for (double o : obs) {
        const double d = (xi - tf(o)) / bw;
        dens += std::exp(-0.5 * d * d) / bw;
    }
    return dens / (static_cast<double>(obs.size()) + 1.0);
}

}  // namespace

TSCVPlan tscv_plan(std::int64_t length, int fold_count) {
    if (fold_count < 2) throw std::invalid_argument("tscv_plan: K must be >= 2");
    if (length < fold_count)
        throw std::invalid_argument("tscv_plan: length < K");
    TSCVPlan plan;
    plan.fold_count = fold_count;
    const std::int64_t fold = length / fold_count;
    for (int k = 0; k < fold_count; ++k) {
        const std::int64_t lo = static_cast<std::int64_t>(k) * fold;
        const std::int64_t hi = (k + 1 == fold_count) ? length : lo + fold;
        plan.folds.push_back({lo, hi});
    }
    for (int k = 1; k < fold_count; ++k)
        plan.iterations.push_back(
            {{0, plan.folds[k - 1].end}, plan.folds[k]});
    return plan;
}

void ParamDef::validate() const {
    if (type == ParamType::categorical) {
        if (choices.empty())
            throw std::invalid_argument("param '" + name + "': no choices");
        return;
    }
    if (!(std::isfinite(lo) && std::isfinite(hi)) || lo > hi)
        throw std::invalid_argument("param '" + name + "': bad bounds");
    if (log_scale && lo <= 0)
        throw std::invalid_argument("param '" + name +
                                    "': log scale requires positive bounds");
}

SearchResult search(const SearchSpace& space,
                    const std::function<double(const ParamMap&)>& objective,
                    int budget, std::uint64_t seed, SearchStrategy strategy) {
    if (budget < 1) throw std::invalid_argument("search: budget must be >= 1");
    for (const auto& def : space.params) def.validate();

    std::mt19937_64 rng(seed);
    SearchResult result;

    auto run_trial = [&](const ParamMap& params) {
        Trial trial;
        trial.params = params;
        try {
            trial.score = objective(params);
        } catch (const std::exception&) {
            trial.score = 0.0;  // failed trial, recorded but not fatal
        }
        result.trace.push_back(trial);
        if (result.trace.size() == 1 || trial.score > result.best.score)
            result.best = trial;
    };

    const int warmup = strategy == SearchStrategy::bayes
                           ? (budget + 3) / 4
                           : budget;
    for (int t = 0; t < std::min(warmup, budget); ++t)
        run_trial(draw_point(space, rng));

    constexpr int kCandidates = 24;
    constexpr double kGoodFraction = 0.25;
    for (int t = warmup; t < budget; ++t) {
        // Good/bad split of past trials by score quantile.
        std::vector<std::size_t> order(result.trace.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return result.trace[a].score >
                                    result.trace[b].score;
                         });
        const std::size_t n_good = std::max<std::size_t>(
            1, static_cast<std::size_t>(kGoodFraction *
                                        static_cast<double>(order.size())));

        ParamMap best_cand;
        double best_ratio = -1;
        for (int c = 0; c < kCandidates; ++c) {
            ParamMap cand = draw_point(space, rng);
            double ratio = 1.0;
            for (const auto& def : space.params) {
                std::vector<double> good, bad;
                for (std::size_t i = 0; i < order.size(); ++i) {
                    const double v = result.trace[order[i]].params.at(def.name);
                    (i < n_good ? good : bad).push_back(v);
                }
                ratio *= coord_density(def, cand.at(def.name), good) /
                         coord_density(def, cand.at(def.name), bad);
            }
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best_cand = std::move(cand);
            }
        }
        run_trial(best_cand);
    }
    return result;
}

EventScore score_from_counts(int tp, int fp, int fn, double beta) {
    EventScore s;
    s.tp = tp;
    s.fp = fp;
    s.fn = fn;
    s.beta = beta;
    s.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    s.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double b2 = beta * beta;
    const double den = b2 * s.precision + s.recall;
    s.f_beta = den > 0 ? (1.0 + b2) * s.precision * s.recall / den : 0.0;
    return s;
}

EventScore eventwise_score(const std::vector<AnomalyEvent>& predicted,
                           const std::vector<AnomalyEvent>& truth, double beta) {
    auto check_disjoint = [](const std::vector<AnomalyEvent>& events,
                             const char* which) {
        std::map<std::string, std::vector<AnomalyEvent>> per_channel;
        for (const auto& ev : events)
            per_channel[ev.channel_id.value_or("")].push_back(ev);
        for (auto& [cid, list] : per_channel) {
            std::sort(list.begin(), list.end(),
                      [](const AnomalyEvent& a, const AnomalyEvent& b) {
                          return a.start < b.start;
                      });
            for (std::size_t i = 1; i < list.size(); ++i)
                if (list[i].start <= list[i - 1].end)
                    throw std::invalid_argument(
                        std::string("eventwise_score: overlapping ") + which +
                        " events");
        }
    };
    check_disjoint(predicted, "predicted");
    check_disjoint(truth, "truth");

    auto channels_match = [](const AnomalyEvent& pred, const AnomalyEvent& tr) {
        // Channel-less on either side matches anything.
        return !pred.channel_id || !tr.channel_id ||
               *pred.channel_id == *tr.channel_id;
    };

    int tp = 0, fn = 0, fp = 0;
    for (const auto& tr : truth) {
        bool hit = false;
        for (const auto& pr : predicted)
            if (channels_match(pr, tr) && pr.overlaps(tr)) { hit = true; break; }
        hit ? ++tp : ++fn;
    }
    for (const auto& pr : predicted) {
        bool hit = false;
        for (const auto& tr : truth)
            if (channels_match(pr, tr) && pr.overlaps(tr)) { hit = true; break; }
        if (!hit) ++fp;
    }
    return score_from_counts(tp, fp, fn, beta);
}

std::vector<std::uint8_t> rasterize_windows(
    const std::vector<std::uint8_t>& decisions,
    const std::vector<IndexInterval>& spans, std::int64_t length) {
    std::vector<std::uint8_t> raster(length, 0);
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (!decisions[i]) continue;
        const std::int64_t lo = std::max<std::int64_t>(0, spans[i].start);
        const std::int64_t hi = std::min(length, spans[i].end);
        for (std::int64_t t = lo; t < hi; ++t) raster[t] = 1;
    }
    return raster;
}

double precision_weight(const std::vector<double>& window_probs,
                        const std::vector<IndexInterval>& window_spans,
                        const std::vector<std::uint8_t>& labels,
                        const std::vector<std::int64_t>& timestamps,
                        double theta) {
    std::vector<std::uint8_t> decisions(window_probs.size());
    for (std::size_t i = 0; i < window_probs.size(); ++i)
        decisions[i] = window_probs[i] >= theta ? 1 : 0;
    const auto raster = rasterize_windows(
        decisions, window_spans, static_cast<std::int64_t>(labels.size()));
    const auto predicted = labels_to_events(raster, timestamps);
    if (predicted.empty()) return 0.0;
    const auto truth = labels_to_events(labels, timestamps);
    return eventwise_score(predicted, truth, 0.5).precision;
}

}  // namespace telem
