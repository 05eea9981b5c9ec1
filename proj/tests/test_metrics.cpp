#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rebalance/error.hpp"
#include "rebalance/metrics.hpp"
#include "rebalance/reference.hpp"
#include "rebalance/rng.hpp"

using namespace rebalance;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("confusion tallies exactly") {
    std::vector<int> labels{1, 0, 1};
    auto cm = confusion(labels, labels);
    CHECK(cm.t_pos == 2);
    CHECK(cm.t_neg == 1);
    CHECK(cm.f_pos == 0);
    CHECK(cm.f_neg == 0);

    std::vector<int> zeros{0, 0, 0};
    auto cm2 = confusion(std::vector<int>{1, 1, 0}, zeros);
    CHECK(cm2.t_pos == 0);
    CHECK(cm2.t_neg == 1);
    CHECK(cm2.f_pos == 0);
    CHECK(cm2.f_neg == 2);
}

TEST_CASE("1000 random pairs match an independent tally") {
    Rng rng(31);
    std::vector<int> labels(1000), preds(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        labels[i] = rng.uniform() < 0.4;
        preds[i] = rng.uniform() < 0.5;
    }
    auto cm = confusion(labels, preds);
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        tp += labels[i] == 1 && preds[i] == 1;
        tn += labels[i] == 0 && preds[i] == 0;
        fp += labels[i] == 0 && preds[i] == 1;
        fn += labels[i] == 1 && preds[i] == 0;
    }
    CHECK(cm.t_pos == tp);
    CHECK(cm.t_neg == tn);
    CHECK(cm.f_pos == fp);
    CHECK(cm.f_neg == fn);
}

TEST_CASE("perfect and balanced confusion matrices evaluate exactly") {
    ConfusionMatrix perfect{2, 1, 0, 0};
    CHECK(accuracy(perfect) == 1.0);
    CHECK(precision(perfect) == 1.0);
    CHECK(recall(perfect) == 1.0);
    CHECK(f1_score(perfect) == 1.0);

    ConfusionMatrix even{1, 1, 1, 1};
    CHECK(accuracy(even) == 0.5);
    CHECK(precision(even) == 0.5);
    CHECK(recall(even) == 0.5);
    CHECK(f1_score(even) == 0.5);
}

TEST_CASE("no predicted positives: precision 0 with the degenerate flag") {
    ConfusionMatrix cm{0, 3, 0, 2};
    auto s = summarize(cm);
    CHECK(s.precision == 0.0);
    CHECK(s.precision_degenerate);
    CHECK(s.f1 == 0.0);
    CHECK(s.f1_degenerate);
    CHECK_FALSE(s.recall_degenerate);
}

TEST_CASE("formula evaluation agrees with direct recomputation on random instances") {
    Rng rng(32);
    for (int i = 0; i < 200; ++i) {
        ConfusionMatrix cm{rng.uniform_index(50), rng.uniform_index(50), rng.uniform_index(50),
                           rng.uniform_index(50)};
        if (cm.total() == 0) continue;
        double acc = static_cast<double>(cm.t_pos + cm.t_neg) / static_cast<double>(cm.total());
        CHECK(accuracy(cm) == doctest::Approx(acc).epsilon(1e-15));
        if (cm.t_pos + cm.f_pos > 0) {
            double p = static_cast<double>(cm.t_pos) / static_cast<double>(cm.t_pos + cm.f_pos);
            CHECK(precision(cm) == doctest::Approx(p).epsilon(1e-15));
        }
        if (cm.t_pos + cm.f_neg > 0) {
            double r = static_cast<double>(cm.t_pos) / static_cast<double>(cm.t_pos + cm.f_neg);
            CHECK(recall(cm) == doctest::Approx(r).epsilon(1e-15));
        }
        double p = precision(cm), r = recall(cm);
        if (p + r > 0) CHECK(f1_score(cm) == doctest::Approx(2 * p * r / (p + r)).epsilon(1e-15));
        if (p == r && p > 0) CHECK(f1_score(cm) == doctest::Approx(p).epsilon(1e-15));
        // Harmonic-mean bounds.
        CHECK(f1_score(cm) >= 0.0);
        CHECK(f1_score(cm) <= 2.0 * std::min(p, r) + 1e-15);
    }
}

TEST_CASE("perfectly separating scores give AUC 1") {
    std::vector<int> labels{0, 0, 1, 1};
    std::vector<double> scores{0.1, 0.2, 0.8, 0.9};
    auto roc = roc_auc(labels, scores);
    CHECK(roc.auc == 1.0);
    CHECK(roc.points.front().fpr == 0.0);
    CHECK(roc.points.front().tpr == 0.0);
    CHECK(roc.points.back().fpr == 1.0);
    CHECK(roc.points.back().tpr == 1.0);
}

TEST_CASE("all-equal scores give AUC 0.5 under the midrank convention") {
    std::vector<int> labels{0, 1, 0, 1, 1};
    std::vector<double> scores(5, 0.7);
    CHECK(roc_auc(labels, scores).auc == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("single-class labels are an UndefinedAuc error") {
    std::vector<int> labels{1, 1, 1};
    std::vector<double> scores{0.1, 0.2, 0.3};
    CHECK_THROWS_WITH_AS(roc_auc(labels, scores), doctest::Contains("UndefinedAuc"), Error);
}

TEST_CASE("trapezoidal AUC equals the pair-counting oracle, heavy ties included") {
    Rng rng(33);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 20 + rng.uniform_index(60);
        std::vector<int> labels(n);
        std::vector<double> scores(n);
        bool ties = trial % 2 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = rng.uniform() < 0.5;
            scores[i] = ties ? static_cast<double>(rng.uniform_index(5)) / 4.0 : rng.uniform();
        }
        labels[0] = 0;
        labels[1] = 1;
        double fast = roc_auc(labels, scores).auc;
        double slow = reference::auc_pair_count(labels, scores);
        CHECK(std::abs(fast - slow) <= 1e-12);
    }
}

TEST_CASE("AUC is invariant under strictly monotone score transforms") {
    Rng rng(34);
    std::vector<int> labels(150);
    std::vector<double> scores(150);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = rng.uniform() < 0.4;
        scores[i] = rng.uniform(0.1, 0.9);
    }
    labels[0] = 0;
    labels[1] = 1;
    double base = roc_auc(labels, scores).auc;

    auto cubed = scores;
    for (auto& s : cubed) s = s * s * s;
    CHECK(roc_auc(labels, cubed).auc == base);

    auto squashed = scores;
    for (auto& s : squashed) s = 1.0 / (1.0 + std::exp(-s));
    CHECK(roc_auc(labels, squashed).auc == base);
}

TEST_CASE("complement symmetry: auc + auc(flipped labels) = 1") {
    Rng rng(35);
    std::vector<int> labels(80), flipped(80);
    std::vector<double> scores(80);
    for (std::size_t i = 0; i < 80; ++i) {
        labels[i] = rng.uniform() < 0.5;
        scores[i] = static_cast<double>(rng.uniform_index(9)) / 8.0;
    }
    labels[0] = 0;
    labels[1] = 1;
    for (std::size_t i = 0; i < 80; ++i) flipped[i] = 1 - labels[i];
    double a = roc_auc(labels, scores).auc;
    double b = roc_auc(flipped, scores).auc;
    CHECK(std::abs(a + b - 1.0) <= 1e-12);
}

TEST_CASE("roc curve is monotone along the sweep") {
    Rng rng(36);
    std::vector<int> labels(60);
    std::vector<double> scores(60);
    for (std::size_t i = 0; i < 60; ++i) {
        labels[i] = rng.uniform() < 0.5;
        scores[i] = rng.uniform();
    }
    labels[0] = 0;
    labels[1] = 1;
    auto roc = roc_auc(labels, scores);
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
        CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
        CHECK(roc.points[i].tpr >= roc.points[i - 1].tpr);
    }
}

TEST_SUITE_END();
