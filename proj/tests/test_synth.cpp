#include <doctest.h>

#include <map>

#include "telem/synth.hpp"

using namespace telem;

namespace {

double realized_density(const MultiChannelDataset& ds) {
    std::size_t flagged = 0, total = 0;
    for (const auto& ch : ds.channels) {
        total += ch.labels.size();
        for (auto l : ch.labels) flagged += l;
    }
    return static_cast<double>(flagged) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("generator structure, density and determinism") {
    SynthConfig cfg;
    cfg.channel_count = 5;
    cfg.group_count = 2;
    cfg.length = 8000;
    cfg.density = 0.018;

    auto a = generate_synthetic(cfg, 7);
    auto b = generate_synthetic(cfg, 7);

    REQUIRE(a.dataset.channels.size() == 5);
    CHECK(a.dataset.groups.size() == 2);
    for (const auto& ch : a.dataset.channels) {
        CHECK(ch.size() == 8000);
        ch.validate();
    }
    CHECK(realized_density(a.dataset) == doctest::Approx(0.018).epsilon(0.3));
    CHECK(std::abs(realized_density(a.dataset) - 0.018) <= 0.005);

    // determinism
    REQUIRE(b.dataset.channels.size() == a.dataset.channels.size());
    for (std::size_t c = 0; c < a.dataset.channels.size(); ++c) {
        CHECK(a.dataset.channels[c].values == b.dataset.channels[c].values);
        CHECK(a.dataset.channels[c].labels == b.dataset.channels[c].labels);
    }
    REQUIRE(a.truth_events.size() == b.truth_events.size());

    // a different seed produces different data
    auto c = generate_synthetic(cfg, 8);
    bool differs = false;
    for (std::size_t i = 0; i < 5 && !differs; ++i)
        differs = c.dataset.channels[i].values != a.dataset.channels[i].values;
    CHECK(differs);
}

TEST_CASE("truth events match the planted labels exactly") {
    SynthConfig cfg;
    cfg.length = 6000;
    auto r = generate_synthetic(cfg, 21);
    for (const auto& ch : r.dataset.channels) {
        auto from_labels = labels_to_events(ch.labels, ch.timestamps, ch.channel_id);
        std::vector<AnomalyEvent> recorded;
        for (const auto& e : r.truth_events)
            if (e.channel_id == ch.channel_id) recorded.push_back(e);
        REQUIRE(from_labels.size() == recorded.size());
        for (std::size_t i = 0; i < recorded.size(); ++i) {
            CHECK(from_labels[i].start == recorded[i].start);
            CHECK(from_labels[i].end == recorded[i].end);
        }
    }
}

TEST_CASE("at least one event spans multiple channels of one group") {
    SynthConfig cfg;
    cfg.length = 6000;
    auto r = generate_synthetic(cfg, 3);
    // group events share identical (start, end) across >= 2 channels of a group
    std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> spans;
    for (const auto& e : r.truth_events) ++spans[{e.start, e.end}];
    bool found = false;
    for (const auto& [span, count] : spans) found = found || count >= 2;
    CHECK(found);
}

TEST_CASE("density cap enforced") {
    SynthConfig cfg;
    cfg.density = 0.25;
    CHECK_THROWS(generate_synthetic(cfg, 1));
}
