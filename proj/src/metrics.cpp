#include "difm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace difm {

static void check_inputs(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ShapeError("scores/labels length mismatch");
    if (!all_finite(scores)) throw NumericError("non-finite score");
    int n_pos = 0, n_neg = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
        (y == 1 ? n_pos : n_neg)++;
    }
    if (n_pos == 0 || n_neg == 0)
        throw DataError("metric undefined: need at least one positive and one negative label");
}

RocSummary build_roc(std::span<const double> scores, std::span<const int> labels) {
    check_inputs(scores, labels);

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    RocSummary roc;
    for (int y : labels) (y == 1 ? roc.n_pos : roc.n_neg)++;

    roc.points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    size_t i = 0;
    while (i < order.size()) {
        double s = scores[order[i]];
        // all samples sharing a score form one ROC step
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp)++;
            ++i;
        }
        roc.points.push_back({static_cast<double>(fp) / roc.n_neg, static_cast<double>(tp) / roc.n_pos});
    }
    return roc;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    check_inputs(scores, labels);

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // rank-sum with average ranks over ties
    double rank_sum_pos = 0.0;
    long n_pos = 0, n_neg = 0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) {
                rank_sum_pos += avg_rank;
                ++n_pos;
            } else {
                ++n_neg;
            }
        }
        i = j;
    }
    double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

MetricReport partial_auc(std::span<const double> scores, std::span<const int> labels, double max_fpr) {
    if (!(max_fpr > 0.0 && max_fpr <= 1.0)) throw ConfigError("max_fpr must be in (0, 1]");
    RocSummary roc = build_roc(scores, labels);

    double area = 0.0;
    for (size_t i = 1; i < roc.points.size(); ++i) {
        const auto& a = roc.points[i - 1];
        auto b = roc.points[i];
        if (a.fpr >= max_fpr) break;
        if (b.fpr > max_fpr) {
            // clip the crossing segment at the cut
            double t = (max_fpr - a.fpr) / (b.fpr - a.fpr);
            b = {max_fpr, a.tpr + t * (b.tpr - a.tpr)};
        }
        area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
        if (b.fpr >= max_fpr) break;
    }

    double lo = 0.5 * max_fpr * max_fpr;
    double hi = max_fpr;
    MetricReport rep;
    rep.max_fpr = max_fpr;
    rep.n_pos = roc.n_pos;
    rep.n_neg = roc.n_neg;
    rep.partial_auc_standardized = 0.5 * (1.0 + (area - lo) / (hi - lo));
    rep.auc = auc(scores, labels);
    return rep;
}

CiReport confidence_interval(std::span<const double> values, double level) {
    if (values.size() < 2) throw ConfigError("confidence interval needs at least 2 values");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must be in (0, 1)");
    if (!all_finite(values)) throw NumericError("non-finite value in confidence interval input");

    CiReport ci;
    ci.n = static_cast<int>(values.size());
    double n = static_cast<double>(ci.n);
    ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
    double sd = std::sqrt(ss / (n - 1.0));
    boost::math::students_t dist(n - 1.0);
    double t = boost::math::quantile(dist, 0.5 + level / 2.0);
    ci.half_width = t * sd / std::sqrt(n);
    return ci;
}

std::string format_ci(const CiReport& ci) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f±%.4f", ci.mean, ci.half_width);
    return buf;
}

}  // namespace difm
