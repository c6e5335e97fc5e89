#include "telem/interval.hpp"

#include <algorithm>

namespace telem {

std::int64_t runs_length(const IndexRuns& runs) {
    std::int64_t n = 0;
    for (const auto& r : runs) n += r.length();
    return n;
}

bool runs_intersect(const IndexRuns& a, const IndexRuns& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].overlaps(b[j])) return true;
        if (a[i].end <= b[j].end)
            ++i;
        else
            ++j;
    }
    return false;
}

bool runs_contain(const IndexRuns& runs, std::int64_t i) {
    for (const auto& r : runs)
        if (r.contains(i)) return true;
    return false;
}

IndexRuns runs_subtract(const IndexRuns& runs, const IndexInterval& hole) {
    IndexRuns out;
    for (const auto& r : runs) {
        if (!r.overlaps(hole)) {
            if (!r.empty()) out.push_back(r);
            continue;
        }
        IndexInterval left{r.start, std::min(r.end, hole.start)};
        IndexInterval right{std::max(r.start, hole.end), r.end};
        if (!left.empty()) out.push_back(left);
        if (!right.empty()) out.push_back(right);
    }
    return out;
}

IndexRuns runs_concat_slice(const IndexRuns& runs, std::int64_t offset,
                            std::int64_t count) {
    IndexRuns out;
    std::int64_t pos = 0;  // concatenated coordinate of current run start
    for (const auto& r : runs) {
        std::int64_t lo = std::max(offset, pos);
        std::int64_t hi = std::min(offset + count, pos + r.length());
        if (lo < hi)
            out.push_back({r.start + (lo - pos), r.start + (hi - pos)});
        pos += r.length();
    }
    return out;
}

IndexRuns runs_normalize(IndexRuns runs) {
    std::sort(runs.begin(), runs.end(),
              [](const IndexInterval& a, const IndexInterval& b) {
                  return a.start < b.start;
              });
    IndexRuns out;
    for (const auto& r : runs) {
        if (r.empty()) continue;
        if (!out.empty() && r.start <= out.back().end)
            out.back().end = std::max(out.back().end, r.end);
        else
            out.push_back(r);
    }
    return out;
}

std::int64_t runs_max_piece(const IndexRuns& runs) {
    std::int64_t m = 0;
    for (const auto& r : runs) m = std::max(m, r.length());
    return m;
}

}  // namespace telem
