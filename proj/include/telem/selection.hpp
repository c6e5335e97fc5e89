#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "telem/interval.hpp"
#include "telem/series.hpp"

namespace telem {

/// Expanding-window time-series cross-validation: iteration k trains on
/// folds 1..k and validates on fold k+1.
struct TSCVPlan {
    int fold_count = 0;
    std::vector<IndexInterval> folds;
    struct Iteration {
        IndexInterval train;       // union of folds 1..k (contiguous)
        IndexInterval validation;  // fold k+1
    };
    std::vector<Iteration> iterations;
};

TSCVPlan tscv_plan(std::int64_t length, int fold_count);

enum class ParamType { real, integer, categorical };

struct ParamDef {
    std::string name;
    ParamType type = ParamType::real;
    double lo = 0;
    double hi = 1;
    std::vector<double> choices;  // categorical values
    bool log_scale = false;

    void validate() const;
};

struct SearchSpace {
    std::vector<ParamDef> params;
};

using ParamMap = std::map<std::string, double>;

struct Trial {
    ParamMap params;
    double score = 0;
};

struct SearchResult {
    Trial best;
    std::vector<Trial> trace;
};

enum class SearchStrategy { random, bayes };

/// Sequential model-based hyperparameter search. `random` draws budget
/// i.i.d. samples; `bayes` spends ceil(budget/4) warm-up draws, then ranks
/// prior candidates by the density ratio of a good/bad quantile split of past
/// trials. A throwing objective records score 0 for that trial.
SearchResult search(const SearchSpace& space,
                    const std::function<double(const ParamMap&)>& objective,
                    int budget, std::uint64_t seed, SearchStrategy strategy);

struct EventScore {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double precision = 0;
    double recall = 0;
    double f_beta = 0;
    double beta = 0.5;
};

EventScore score_from_counts(int tp, int fp, int fn, double beta);

/// Overlap-based event scoring: a truth event counts as tp when overlapped
/// by at least one prediction; a prediction is fp only when it overlaps zero
/// truth events. Channel-tagged predictions match same-channel or
/// channel-less truth; channel-less predictions match any channel.
EventScore eventwise_score(const std::vector<AnomalyEvent>& predicted,
                           const std::vector<AnomalyEvent>& truth, double beta);

/// Event-wise precision of thresholded window predictions against timestep
/// labels; 0 when no events are predicted.
double precision_weight(const std::vector<double>& window_probs,
                        const std::vector<IndexInterval>& window_spans,
                        const std::vector<std::uint8_t>& labels,
                        const std::vector<std::int64_t>& timestamps,
                        double theta);

/// OR over covering windows, onto a grid of `length` timesteps.
std::vector<std::uint8_t> rasterize_windows(
    const std::vector<std::uint8_t>& decisions,
    const std::vector<IndexInterval>& spans, std::int64_t length);

}  // namespace telem
