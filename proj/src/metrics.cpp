#include "rebalance/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rebalance/error.hpp"

namespace rebalance {

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions) {
    if (labels.size() != predictions.size())
        throw Error(ErrorCode::InvalidArgument, "confusion: length mismatch");
    if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1)
            predictions[i] == 1 ? ++cm.t_pos : ++cm.f_neg;
        else
            predictions[i] == 1 ? ++cm.f_pos : ++cm.t_neg;
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error(ErrorCode::InvalidArgument, "accuracy: empty matrix");
    return static_cast<double>(cm.t_pos + cm.t_neg) / static_cast<double>(cm.total());
}

double precision(const ConfusionMatrix& cm) {
    std::size_t denom = cm.t_pos + cm.f_pos;
    return denom == 0 ? 0.0 : static_cast<double>(cm.t_pos) / static_cast<double>(denom);
}

double recall(const ConfusionMatrix& cm) {
    std::size_t denom = cm.t_pos + cm.f_neg;
    return denom == 0 ? 0.0 : static_cast<double>(cm.t_pos) / static_cast<double>(denom);
}

double f1_score(const ConfusionMatrix& cm) {
    double p = precision(cm);
    double r = recall(cm);
    return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

MetricsSummary summarize(const ConfusionMatrix& cm) {
    MetricsSummary s;
    s.accuracy = accuracy(cm);
    s.precision = precision(cm);
    s.recall = recall(cm);
    s.f1 = f1_score(cm);
    s.precision_degenerate = (cm.t_pos + cm.f_pos) == 0;
    s.recall_degenerate = (cm.t_pos + cm.f_neg) == 0;
    s.f1_degenerate = (s.precision + s.recall) == 0.0;
    return s;
}

RocCurve roc_auc(std::span<const int> labels, std::span<const double> scores) {
    if (labels.size() != scores.size())
        throw Error(ErrorCode::InvalidArgument, "roc_auc: length mismatch");
    const std::size_t n = labels.size();
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += (y == 1);
    std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw Error(ErrorCode::UndefinedAuc, "roc_auc: labels contain a single class");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    double auc = 0.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        std::size_t tie_pos = 0, tie_neg = 0;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            labels[order[j]] == 1 ? ++tie_pos : ++tie_neg;
            ++j;
        }
        double fpr0 = static_cast<double>(fp) / static_cast<double>(n_neg);
        double tpr0 = static_cast<double>(tp) / static_cast<double>(n_pos);
        tp += tie_pos;
        fp += tie_neg;
        double fpr1 = static_cast<double>(fp) / static_cast<double>(n_neg);
        double tpr1 = static_cast<double>(tp) / static_cast<double>(n_pos);
        auc += (fpr1 - fpr0) * 0.5 * (tpr0 + tpr1);
        curve.points.push_back({fpr1, tpr1});
        i = j;
    }

    // Independent route: Mann-Whitney U from midranks.
    std::vector<std::size_t> asc(order.rbegin(), order.rend());
    double rank_sum_pos = 0.0;
    i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[asc[j]] == scores[asc[i]]) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t t = i; t < j; ++t)
            if (labels[asc[t]] == 1) rank_sum_pos += midrank;
        i = j;
    }
    double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    double auc_mw = u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));

    if (std::abs(auc - auc_mw) > 1e-12)
        throw Error(ErrorCode::Internal, "trapezoidal AUC and Mann-Whitney AUC disagree: " +
                                             std::to_string(auc) + " vs " +
                                             std::to_string(auc_mw));
    curve.auc = auc;
    return curve;
}

}  // namespace rebalance
