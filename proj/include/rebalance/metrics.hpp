#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rebalance {

struct ConfusionMatrix {
    std::size_t t_pos = 0;
    std::size_t t_neg = 0;
    std::size_t f_pos = 0;
    std::size_t f_neg = 0;

    std::size_t total() const { return t_pos + t_neg + f_pos + f_neg; }
};

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions);

// Ratio metrics with the 0/0 -> 0 convention. `summarize` carries the
// degeneracy flags so report tables can mark them.
double accuracy(const ConfusionMatrix& cm);
double precision(const ConfusionMatrix& cm);
double recall(const ConfusionMatrix& cm);
double f1_score(const ConfusionMatrix& cm);

struct MetricsSummary {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool f1_degenerate = false;
};

MetricsSummary summarize(const ConfusionMatrix& cm);

struct RocPoint {
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;  // threshold-ordered, (0,0) .. (1,1)
    double auc = 0.0;
};

// Threshold sweep over the unique scores, descending, with tied scores
// grouped. The trapezoidal area is cross-checked against the
// Mann-Whitney midrank statistic; disagreement beyond 1e-12 is an
// internal error.
RocCurve roc_auc(std::span<const int> labels, std::span<const double> scores);

}  // namespace rebalance
