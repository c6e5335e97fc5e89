#include "telem/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

namespace telem {
namespace {

struct ChannelParams {
    double offset;
    double amplitude;
    double period;
    double phase;
    double noise;
    double drift_period;
};

// Distinctive zigzag motif reused as a shapelet source by the mining path.
const std::vector<double>& motif_pattern() {
    static const std::vector<double> m = {0.0, 1.0, -1.0, 1.0,  -1.0, 0.5, -0.5,
                                          1.0, 0.0, -1.0, 1.0,  -0.5, 0.5, -1.0,
                                          1.0, 0.0, -1.0, 0.5,  -0.5, 0.0};
    return m;
}

void apply_anomaly(ChannelSeries& series, const ChannelParams& params,
                   std::int64_t start, std::int64_t len,
                   const std::string& archetype) {
    const double a = params.amplitude;
    for (std::int64_t i = 0; i < len; ++i) {
        const std::int64_t t = start + i;
        series.labels[t] = 1;
        if (archetype == "spike") {
            if (i % 7 == 0)
                series.values[t] += (i % 14 == 0 ? 5.0 : -5.0) * a;
        } else if (archetype == "level_shift") {
            series.values[t] += 3.0 * a;
        } else if (archetype == "oscillation") {
            series.values[t] +=
                2.5 * a * std::sin(2.0 * std::numbers::pi * i / 8.0);
        } else if (archetype == "motif") {
            const auto& m = motif_pattern();
            series.values[t] += 3.0 * a * m[i % m.size()];
        } else {
            throw std::invalid_argument("synth: unknown archetype '" + archetype +
                                        "'");
        }
    }
}

}  // namespace

SynthResult generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
    if (config.density > 0.2)
        throw std::invalid_argument(
            "synth: density > 0.2 rejected (regime mismatch)");
    if (config.channel_count < 1 || config.group_count < 1)
        throw std::invalid_argument("synth: need >= 1 channel and group");
    if (config.length < 10 * config.max_event_len)
        throw std::invalid_argument("synth: series too short for event sizes");
    if (config.archetypes.empty())
        throw std::invalid_argument("synth: need at least one archetype");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SynthResult res;
    const int C = config.channel_count;
    std::vector<ChannelParams> params(C);
    std::vector<std::vector<std::string>> group_members(config.group_count);

    for (int c = 0; c < C; ++c) {
        char name[16];
        std::snprintf(name, sizeof(name), "ch%02d", c);
        ChannelSeries s;
        s.channel_id = name;
        const int g = c % config.group_count;
        group_members[g].push_back(name);

        params[c] = {4.0 * unit(rng) - 2.0,          // offset
                     0.5 + 1.5 * unit(rng),          // amplitude
                     200.0 + 1800.0 * unit(rng),     // period
                     2.0 * std::numbers::pi * unit(rng),
                     0.02 + 0.06 * unit(rng),        // noise sigma
                     5000.0 + 15000.0 * unit(rng)};  // drift period

        s.timestamps.resize(config.length);
        s.values.resize(config.length);
        s.labels.assign(config.length, 0);
        for (std::int64_t t = 0; t < config.length; ++t) {
            s.timestamps[t] = t * config.grid_step;
            const auto& p = params[c];
            s.values[t] =
                p.offset +
                p.amplitude *
                    std::sin(2.0 * std::numbers::pi * t / p.period + p.phase) +
                0.3 * p.amplitude *
                    std::sin(2.0 * std::numbers::pi * t / p.drift_period) +
                p.noise * gauss(rng);
        }
        res.dataset.channels.push_back(std::move(s));
    }
    for (int g = 0; g < config.group_count; ++g) {
        char name[16];
        std::snprintf(name, sizeof(name), "g%d", g);
        res.dataset.groups[name] = group_members[g];
    }

    // Event planting against a global anomalous-step budget.
    const std::int64_t target =
        std::llround(config.density * static_cast<double>(config.length) * C);
    std::int64_t remaining = target;
    std::vector<std::int64_t> used(C, 0);
    std::vector<IndexRuns> occupied(C);
    std::vector<bool> group_has_cross(config.group_count, false);
    const std::int64_t gap = 5;
    std::size_t archetype_cursor = 0;

    auto channel_group = [&](int c) { return c % config.group_count; };

    int guard = 0;
    while (remaining >= config.min_event_len && guard++ < 100000) {
        // Most-deficient channel first keeps per-channel densities even.
        int c = 0;
        for (int i = 1; i < C; ++i)
            if (used[i] < used[c]) c = i;
        const int g = channel_group(c);

        std::vector<int> targets = {c};
        const bool want_cross =
            group_members[g].size() > 1 &&
            (!group_has_cross[g] || unit(rng) < config.cross_channel_prob);
        if (want_cross) {
            targets.clear();
            for (int i = 0; i < C; ++i)
                if (channel_group(i) == g) targets.push_back(i);
        }

        std::int64_t max_len = std::min<std::int64_t>(
            config.max_event_len,
            remaining / static_cast<std::int64_t>(targets.size()));
        if (max_len < config.min_event_len) {
            if (targets.size() > 1) { targets = {c}; max_len = std::min(config.max_event_len, remaining); }
            if (max_len < config.min_event_len) break;
        }
        std::uniform_int_distribution<std::int64_t> len_dist(config.min_event_len,
                                                             max_len);
        const std::int64_t len = len_dist(rng);

        std::uniform_int_distribution<std::int64_t> start_dist(
            config.max_event_len, config.length - len - config.max_event_len);
        std::int64_t start = -1;
        for (int attempt = 0; attempt < 200; ++attempt) {
            const std::int64_t s = start_dist(rng);
            const IndexInterval padded{s - gap, s + len + gap};
            bool clear = true;
            for (int t : targets)
                if (runs_intersect(occupied[t], {padded})) { clear = false; break; }
            if (clear) { start = s; break; }
        }
        if (start < 0) break;  // series saturated

        const std::string archetype =
            config.archetypes[archetype_cursor++ % config.archetypes.size()];
        for (int t : targets) {
            apply_anomaly(res.dataset.channels[t], params[t], start, len,
                          archetype);
            occupied[t] = runs_normalize([&] {
                auto runs = occupied[t];
                runs.push_back({start, start + len});
                return runs;
            }());
            res.truth_events.push_back(
                {start * config.grid_step, (start + len - 1) * config.grid_step,
                 res.dataset.channels[t].channel_id});
            used[t] += len;
            remaining -= len;
        }
        if (targets.size() > 1) group_has_cross[g] = true;
    }

    const double realized =
        static_cast<double>(target - remaining) /
        (static_cast<double>(config.length) * C);
    if (std::abs(realized - config.density) > 0.005)
        throw std::runtime_error("synth: realized density " +
                                 std::to_string(realized) +
                                 " misses target beyond 0.5pp");

    std::sort(res.truth_events.begin(), res.truth_events.end(),
              [](const AnomalyEvent& a, const AnomalyEvent& b) {
                  if (a.channel_id != b.channel_id)
                      return a.channel_id < b.channel_id;
                  return a.start < b.start;
              });
    res.dataset.validate();
    return res;
}

}  // namespace telem
