#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "telem/interval.hpp"

namespace telem {

/// One telemetry channel: timestamped values with per-timestep anomaly flags.
/// Timestamps are integer seconds, strictly increasing.
struct ChannelSeries {
    std::string channel_id;
    std::vector<std::int64_t> timestamps;
    std::vector<double> values;
    std::vector<std::uint8_t> labels;

    std::size_t size() const { return timestamps.size(); }

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

struct MultiChannelDataset {
    std::vector<ChannelSeries> channels;
    // group_id -> channel ids, iteration order deterministic
    std::map<std::string, std::vector<std::string>> groups;

    const ChannelSeries* find_channel(const std::string& id) const;
    void validate() const;
};

/// Closed interval [start, end] in timestamp units. Absent channel_id means a
/// system-level event that may match any channel.
struct AnomalyEvent {
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::optional<std::string> channel_id;

    bool overlaps(const AnomalyEvent& o) const {
        return start <= o.end && o.start <= end;
    }
};

/// Hold-last resampling onto an arithmetic grid from the first to the last
/// original timestamp. Applies to labels as well as values.
ChannelSeries resample_zoh(const ChannelSeries& series, std::int64_t grid_step);

/// Maximal runs of 1s as closed [t_start, t_end] events.
std::vector<AnomalyEvent> labels_to_events(
    const std::vector<std::uint8_t>& labels,
    const std::vector<std::int64_t>& timestamps,
    const std::optional<std::string>& channel_id = std::nullopt);

/// Inverse rasterization onto the given timestamp grid.
std::vector<std::uint8_t> events_to_labels(
    const std::vector<AnomalyEvent>& events,
    const std::vector<std::int64_t>& timestamps);

}  // namespace telem
