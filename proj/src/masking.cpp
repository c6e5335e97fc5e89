#include "telem/masking.hpp"

#include <stdexcept>
#include <string>

namespace telem {

MaskingPlan build_masking_plan(std::int64_t series_len, int n_level1,
                               int m_level2, std::int64_t cca_len,
                               std::int64_t min_piece_len) {
    if (n_level1 < 1 || m_level2 < 1)
        throw std::invalid_argument("masking: N and M must be >= 1");
    if (cca_len < 0) throw std::invalid_argument("masking: cca_len must be >= 0");
    const std::int64_t pre = series_len - cca_len;
    if (pre < n_level1)
        throw std::invalid_argument("masking: series too short for N=" +
                                    std::to_string(n_level1));

    MaskingPlan plan;
    plan.series_len = series_len;
    plan.n_level1 = n_level1;
    plan.m_level2 = m_level2;
    plan.cca_span = {pre, series_len};

    const std::int64_t seg = pre / n_level1;  // last interval absorbs remainder
    for (int n = 0; n < n_level1; ++n) {
        std::int64_t lo = static_cast<std::int64_t>(n) * seg;
        std::int64_t hi = (n + 1 == n_level1) ? pre : lo + seg;
        plan.level1.push_back({lo, hi});
    }

    for (int n = 0; n < n_level1; ++n) {
        IndexRuns xhat = runs_subtract({{0, pre}}, plan.level1[n]);
        const std::int64_t total = runs_length(xhat);
        if (total == 0)
            throw std::invalid_argument("masking: x̂_n empty (N=1 leaves no "
                                        "level-2 data)");
        if (total < m_level2)
            throw std::invalid_argument("masking: series too short for M=" +
                                        std::to_string(m_level2));
        std::vector<IndexRuns> pieces;
        const std::int64_t piece = total / m_level2;
        for (int m = 0; m < m_level2; ++m) {
            std::int64_t off = static_cast<std::int64_t>(m) * piece;
            std::int64_t cnt = (m + 1 == m_level2) ? total - off : piece;
            IndexRuns p = runs_concat_slice(xhat, off, cnt);
            if (runs_max_piece(p) < min_piece_len)
                throw std::invalid_argument(
                    "masking: x̂_{n,m} cannot host one feature segment "
                    "(need a contiguous piece of length " +
                    std::to_string(min_piece_len) + ")");
            pieces.push_back(std::move(p));
        }
        plan.level2.push_back(std::move(pieces));
    }
    return plan;
}

MaskedView view(const MaskingPlan& plan, int n, int m) {
    if (n < 1 || n > plan.n_level1 || m < 1 || m > plan.m_level2)
        throw std::out_of_range("masking: view index out of range");
    MaskedView v;
    v.n = n;
    v.m = m;
    v.x_n = {plan.level1[n - 1]};
    v.xhat_nm = plan.level2[n - 1][m - 1];
    IndexRuns xhat = runs_subtract({{0, plan.cca_span.start}}, plan.level1[n - 1]);
    for (const auto& piece : v.xhat_nm) xhat = runs_subtract(xhat, piece);
    v.remainder = xhat;
    return v;
}

nlohmann::json MaskingPlan::to_json() const {
    nlohmann::json j;
    j["series_len"] = series_len;
    j["n_level1"] = n_level1;
    j["m_level2"] = m_level2;
    j["cca_span"] = {cca_span.start, cca_span.end};
    auto runs_json = [](const IndexRuns& runs) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& r : runs) a.push_back({r.start, r.end});
        return a;
    };
    j["level1"] = nlohmann::json::array();
    j["level2"] = nlohmann::json::array();
    for (int n = 0; n < n_level1; ++n) {
        j["level1"].push_back({level1[n].start, level1[n].end});
        nlohmann::json l2 = nlohmann::json::array();
        for (const auto& piece : level2[n]) l2.push_back(runs_json(piece));
        j["level2"].push_back(l2);
    }
    return j;
}

}  // namespace telem
