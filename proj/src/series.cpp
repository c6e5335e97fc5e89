#include "telem/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace telem {

void ChannelSeries::validate() const {
    if (values.size() != timestamps.size() || labels.size() != timestamps.size())
        throw std::invalid_argument("channel '" + channel_id +
                                    "': timestamps/values/labels length mismatch");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
        if (timestamps[i] <= timestamps[i - 1])
            throw std::invalid_argument("channel '" + channel_id +
                                        "': non-monotone timestamps");
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument("channel '" + channel_id +
                                        "': non-finite value");
    for (auto l : labels)
        if (l > 1)
            throw std::invalid_argument("channel '" + channel_id +
                                        "': label not in {0,1}");
}

const ChannelSeries* MultiChannelDataset::find_channel(
    const std::string& id) const {
    for (const auto& c : channels)
        if (c.channel_id == id) return &c;
    return nullptr;
}

void MultiChannelDataset::validate() const {
    std::map<std::string, int> membership;
    for (const auto& [gid, members] : groups)
        for (const auto& cid : members) membership[cid]++;
    for (const auto& c : channels) {
        c.validate();
        auto it = membership.find(c.channel_id);
        if (it == membership.end())
            throw std::invalid_argument("channel '" + c.channel_id +
                                        "' missing from groups file");
        if (it->second != 1)
            throw std::invalid_argument("channel '" + c.channel_id +
                                        "' assigned to multiple groups");
    }
}

ChannelSeries resample_zoh(const ChannelSeries& series, std::int64_t grid_step) {
    if (series.size() == 0) throw std::invalid_argument("resample_zoh: empty series");
    if (grid_step <= 0) throw std::invalid_argument("resample_zoh: grid_step must be > 0");

    ChannelSeries out;
    out.channel_id = series.channel_id;
    const std::int64_t t0 = series.timestamps.front();
    const std::int64_t t1 = series.timestamps.back();
    std::size_t src = 0;
    for (std::int64_t t = t0; t <= t1; t += grid_step) {
        while (src + 1 < series.size() && series.timestamps[src + 1] <= t) ++src;
        out.timestamps.push_back(t);
        out.values.push_back(series.values[src]);
        out.labels.push_back(series.labels[src]);
    }
    return out;
}

std::vector<AnomalyEvent> labels_to_events(
    const std::vector<std::uint8_t>& labels,
    const std::vector<std::int64_t>& timestamps,
    const std::optional<std::string>& channel_id) {
    if (labels.size() != timestamps.size())
        throw std::invalid_argument("labels_to_events: length mismatch");
    std::vector<AnomalyEvent> events;
    for (std::size_t i = 0; i < labels.size();) {
        if (!labels[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < labels.size() && labels[j + 1]) ++j;
        events.push_back({timestamps[i], timestamps[j], channel_id});
        i = j + 1;
    }
    return events;
}

std::vector<std::uint8_t> events_to_labels(
    const std::vector<AnomalyEvent>& events,
    const std::vector<std::int64_t>& timestamps) {
    std::vector<std::uint8_t> labels(timestamps.size(), 0);
    for (const auto& ev : events) {
        auto lo = std::lower_bound(timestamps.begin(), timestamps.end(), ev.start);
        for (auto it = lo; it != timestamps.end() && *it <= ev.end; ++it)
            labels[static_cast<std::size_t>(it - timestamps.begin())] = 1;
    }
    return labels;
}

}  // namespace telem
