#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "telem/interval.hpp"

namespace telem {

/// Two-level nested partition of one channel. Level 1 splits the pre-tail
/// region into N equal segments x_n; for each n, level 2 splits the
/// complement xhat_n into M pieces along its concatenated index space. The
/// final cca_len positions are reserved for the cross-channel layer.
struct MaskingPlan {
    std::int64_t series_len = 0;
    int n_level1 = 0;
    int m_level2 = 0;
    IndexInterval cca_span;
    std::vector<IndexInterval> level1;             // x_n, size N
    std::vector<std::vector<IndexRuns>> level2;    // [n][m] -> xhat_{n,m}

    nlohmann::json to_json() const;
};

/// The three disjoint index sets of configuration (n, m), 1-based.
struct MaskedView {
    int n = 0;
    int m = 0;
    IndexRuns x_n;        // stacking data
    IndexRuns xhat_nm;    // shapelet mining data
    IndexRuns remainder;  // base-model training data, xhat_n \ xhat_nm
};

/// min_piece_len is the configured feature segment length: every xhat_{n,m}
/// must be able to host at least one full segment.
MaskingPlan build_masking_plan(std::int64_t series_len, int n_level1,
                               int m_level2, std::int64_t cca_len,
                               std::int64_t min_piece_len = 2);

MaskedView view(const MaskingPlan& plan, int n, int m);

}  // namespace telem
