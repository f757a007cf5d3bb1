#pragma once

#include <span>
#include <string>
#include <vector>

#include "difm/common.hpp"

namespace difm {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

// ROC curve with tied scores merged into single steps; runs from (0,0) to (1,1).
struct RocSummary {
    std::vector<RocPoint> points;
    int n_pos = 0;
    int n_neg = 0;
};

RocSummary build_roc(std::span<const double> scores, std::span<const int> labels);

struct MetricReport {
    double auc = 0.0;
    double partial_auc_standardized = 0.0;
    double max_fpr = 0.0;
    int n_pos = 0;
    int n_neg = 0;
};

// Rank-statistic AUC: (concordant pairs + half ties) / (n_pos * n_neg).
double auc(std::span<const double> scores, std::span<const int> labels);

// Trapezoidal area of the ROC head up to max_fpr (linear interpolation on the
// segment crossing the cut), rescaled so chance-level scores give 0.5 and a
// perfect ranking gives 1: 0.5 * (1 + (area - min) / (max - min)) with
// min = max_fpr^2 / 2 and max = max_fpr.
MetricReport partial_auc(std::span<const double> scores, std::span<const int> labels, double max_fpr = 0.01);

struct CiReport {
    double mean = 0.0;
    double half_width = 0.0;
    int n = 0;
};

// Student-t interval: mean +- t_{(1+level)/2, n-1} * sd / sqrt(n).
CiReport confidence_interval(std::span<const double> values, double level = 0.95);

// "mean+-half_width" with 4 decimals.
std::string format_ci(const CiReport& ci);

}  // namespace difm
