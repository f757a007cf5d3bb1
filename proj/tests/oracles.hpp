#pragma once

// Independent reference implementations used only by tests. These deliberately
// take different algorithmic routes than the library code they check.

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <vector>

namespace oracles {

// AUC by direct pairwise comparison: (concordant + half ties) / (P * N).
inline double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
    double num = 0.0;
    long n_pos = 0, n_neg = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        ++n_pos;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            if (scores[i] > scores[j])
                num += 1.0;
            else if (scores[i] == scores[j])
                num += 0.5;
        }
    }
    for (int y : labels)
        if (y == 0) ++n_neg;
    return num / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Standardized partial AUC by exhaustive threshold enumeration: one ROC point
// per distinct score (classify score >= threshold as positive), counted from
// scratch at every threshold.
inline double exhaustive_partial_auc(std::span<const double> scores, std::span<const int> labels, double max_fpr) {
    long n_pos = 0, n_neg = 0;
    for (int y : labels) (y == 1 ? n_pos : n_neg)++;

    std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
    std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
    for (double th : thresholds) {
        long tp = 0, fp = 0;
        for (size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= th) (labels[i] == 1 ? tp : fp)++;
        }
        pts.emplace_back(static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos);
    }

    double area = 0.0;
    for (size_t i = 1; i < pts.size(); ++i) {
        auto [fa, ta] = pts[i - 1];
        auto [fb, tb] = pts[i];
        if (fa >= max_fpr) break;
        if (fb > max_fpr) {
            double t = (max_fpr - fa) / (fb - fa);
            tb = ta + t * (tb - ta);
            fb = max_fpr;
        }
        area += (fb - fa) * 0.5 * (ta + tb);
        if (fb >= max_fpr) break;
    }
    double lo = 0.5 * max_fpr * max_fpr;
    return 0.5 * (1.0 + (area - lo) / (max_fpr - lo));
}

// Textbook scalar Adam, for replaying optimizer traces.
struct ScalarAdam {
    double m = 0.0, v = 0.0;
    long t = 0;

    double step(double param, double grad, double lr, double b1, double b2, double eps) {
        ++t;
        m = b1 * m + (1 - b1) * grad;
        v = b2 * v + (1 - b2) * grad * grad;
        double mh = m / (1 - std::pow(b1, static_cast<double>(t)));
        double vh = v / (1 - std::pow(b2, static_cast<double>(t)));
        return param - lr * mh / (std::sqrt(vh) + eps);
    }
};

}  // namespace oracles
