#include "telem/features.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace telem {

const std::array<std::string, kBaseFeatureCount> kBaseFeatureNames = {
    "mean",      "var",   "std",   "skew",    "kurt",
    "stft_energy", "spec_centroid", "slope", "diff_var"};

std::vector<Segment> segmentize(const ChannelSeries& series,
                                const IndexRuns& index_set,
                                std::int64_t seg_len, std::int64_t stride) {
    if (seg_len < 2) throw std::invalid_argument("segmentize: seg_len must be >= 2");
    if (stride < 1) throw std::invalid_argument("segmentize: stride must be >= 1");

    std::vector<Segment> segments;
    for (const auto& run : index_set) {
        if (run.end > static_cast<std::int64_t>(series.size()))
            throw std::out_of_range("segmentize: index set exceeds series");
        for (std::int64_t start = run.start; start + seg_len <= run.end;
             start += stride) {
            Segment seg;
            seg.start = start;
            seg.end = start + seg_len;
            seg.values.assign(series.values.begin() + start,
                              series.values.begin() + seg.end);
            for (std::int64_t i = start; i < seg.end; ++i)
                if (series.labels[i]) { seg.label = 1; break; }
            segments.push_back(std::move(seg));
        }
    }
    return segments;
}

std::array<double, kBaseFeatureCount> base_features(std::span<const double> s) {
    const std::size_t T = s.size();
    if (T < 2) throw std::invalid_argument("base_features: need T >= 2");
    for (double v : s)
        if (!std::isfinite(v))
            throw std::invalid_argument("base_features: non-finite input");

    double mean = 0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(T);

    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : s) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(T);
    m3 /= static_cast<double>(T);
    m4 /= static_cast<double>(T);
    const double sigma = std::sqrt(m2);
    const double skew = sigma > 0 ? m3 / (sigma * sigma * sigma) : 0.0;
    const double kurt = sigma > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;

    // One periodic-Hann-windowed DFT over the whole segment. Energy covers
    // every non-DC bin; the centroid uses the positive half spectrum with
    // normalized bin frequencies b/T.
    std::vector<double> mag2(T, 0.0);
    {
        std::vector<double> w(T);
        for (std::size_t t = 0; t < T; ++t)
            w[t] = s[t] * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                                static_cast<double>(t) /
                                                static_cast<double>(T)));
        for (std::size_t b = 0; b < T; ++b) {
            double re = 0, im = 0;
            for (std::size_t t = 0; t < T; ++t) {
                const double ang = -2.0 * std::numbers::pi *
                                   static_cast<double>(b) *
                                   static_cast<double>(t) /
                                   static_cast<double>(T);
                re += w[t] * std::cos(ang);
                im += w[t] * std::sin(ang);
            }
            mag2[b] = re * re + im * im;
        }
    }
    double energy = 0;
    for (std::size_t b = 1; b < T; ++b) energy += mag2[b];
    double num = 0, den = 0;
    for (std::size_t b = 1; b <= T / 2; ++b) {
        const double m = std::sqrt(mag2[b]);
        num += m * static_cast<double>(b) / static_cast<double>(T);
        den += m;
    }
    const double centroid = den > 0 ? num / den : 0.0;

    // Least-squares slope over abscissa 0..T-1.
    const double tbar = (static_cast<double>(T) - 1.0) / 2.0;
    double sxy = 0, sxx = 0;
    for (std::size_t t = 0; t < T; ++t) {
        const double dx = static_cast<double>(t) - tbar;
        sxy += dx * (s[t] - mean);
        sxx += dx * dx;
    }
    const double slope = sxy / sxx;

    double dmean = 0;
    for (std::size_t t = 1; t < T; ++t) dmean += s[t] - s[t - 1];
    dmean /= static_cast<double>(T - 1);
    double dvar = 0;
    for (std::size_t t = 1; t < T; ++t) {
        const double d = (s[t] - s[t - 1]) - dmean;
        dvar += d * d;
    }
    dvar /= static_cast<double>(T - 1);

    return {mean, m2, sigma, skew, kurt, energy, centroid, slope, dvar};
}

FeatureMatrix rolling_minmax_pool(const FeatureMatrix& features,
                                  std::int64_t pool_len,
                                  std::int64_t pool_stride) {
    if (pool_len < 1 || pool_stride < 1)
        throw std::invalid_argument("pooling: window and stride must be >= 1");
    const std::int64_t R = static_cast<std::int64_t>(features.row_count());
    if (R < 1) throw std::invalid_argument("pooling: empty feature matrix");
    const std::size_t D = features.dim();

    FeatureMatrix out;
    for (const auto& name : features.feature_names)
        out.feature_names.push_back(name + "_min");
    for (const auto& name : features.feature_names)
        out.feature_names.push_back(name + "_max");

    for (std::int64_t start = 0; start < R; start += pool_stride) {
        const std::int64_t stop = std::min(start + pool_len, R);
        std::vector<double> row(2 * D);
        IndexInterval span = features.spans[start];
        std::uint8_t label = 0;
        for (std::size_t d = 0; d < D; ++d) {
            row[d] = features.rows[start][d];
            row[D + d] = features.rows[start][d];
        }
        for (std::int64_t r = start; r < stop; ++r) {
            for (std::size_t d = 0; d < D; ++d) {
                row[d] = std::min(row[d], features.rows[r][d]);
                row[D + d] = std::max(row[D + d], features.rows[r][d]);
            }
            span.start = std::min(span.start, features.spans[r].start);
            span.end = std::max(span.end, features.spans[r].end);
            label |= features.labels[r];
        }
        out.rows.push_back(std::move(row));
        out.spans.push_back(span);
        out.labels.push_back(label);
        if (stop == R) break;  // trailing partial window emitted once
    }
    return out;
}

}  // namespace telem
