#pragma once

#include <cstdint>
#include <vector>

namespace telem {

/// Half-open index interval [start, end) on the resampled grid.
struct IndexInterval {
    std::int64_t start = 0;
    std::int64_t end = 0;

    std::int64_t length() const { return end - start; }
    bool empty() const { return end <= start; }
    bool contains(std::int64_t i) const { return i >= start && i < end; }
    bool overlaps(const IndexInterval& o) const {
        return start < o.end && o.start < end;
    }
    bool operator==(const IndexInterval&) const = default;
};

/// Sorted, disjoint collection of intervals used as an index set.
using IndexRuns = std::vector<IndexInterval>;

std::int64_t runs_length(const IndexRuns& runs);
bool runs_intersect(const IndexRuns& a, const IndexRuns& b);
bool runs_contain(const IndexRuns& runs, std::int64_t i);

/// Removes `hole` from `runs`, splitting intervals as needed.
IndexRuns runs_subtract(const IndexRuns& runs, const IndexInterval& hole);

/// Slice [offset, offset + count) of the concatenated coordinate space of
/// `runs`, mapped back to original indices.
IndexRuns runs_concat_slice(const IndexRuns& runs, std::int64_t offset,
                            std::int64_t count);

/// Merges adjacent/overlapping intervals into canonical form.
IndexRuns runs_normalize(IndexRuns runs);

/// Length of the longest contiguous interval.
std::int64_t runs_max_piece(const IndexRuns& runs);

}  // namespace telem
