#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "rebalance/classify.hpp"
#include "rebalance/error.hpp"
#include "rebalance/metrics.hpp"

using namespace rebalance;

namespace {

double training_accuracy(const TrainedModel& model, const Dataset& data) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < data.n_rows; ++r)
        hits += model.predict(data.row(r)) == data.labels[r];
    return static_cast<double>(hits) / static_cast<double>(data.n_rows);
}

Dataset xor_pattern(std::size_t per_cell, std::uint64_t seed) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    Rng rng(seed);
    for (int qx = 0; qx < 2; ++qx)
        for (int qy = 0; qy < 2; ++qy)
            for (std::size_t i = 0; i < per_cell; ++i) {
                rows.push_back({qx * 4.0 + 0.5 * rng.normal(), qy * 4.0 + 0.5 * rng.normal()});
                labels.push_back(qx ^ qy);
            }
    return testing::make_dataset(rows, labels);
}

}  // namespace

TEST_SUITE_BEGIN("classify");

TEST_CASE("lda separates linearly separable blobs perfectly") {
    auto data = testing::gaussian_blobs(40, 40, 2, 8.0, 1);
    auto model = train(LdaConfig{}, data, data.all_rows(), 1);
    CHECK(training_accuracy(model, data) == 1.0);
}

TEST_CASE("knn with k=1 memorizes the training set") {
    auto data = testing::random_labeled(60, 3, 2);
    auto model = train(KnnConfig{.k = 1}, data, data.all_rows(), 2);
    CHECK(training_accuracy(model, data) == 1.0);
}

TEST_CASE("logistic regression cannot fit the xor pattern") {
    auto data = xor_pattern(30, 3);
    auto model = train(LogisticConfig{}, data, data.all_rows(), 3);
    std::vector<int> labels = data.labels;
    std::vector<double> probs;
    for (std::size_t r = 0; r < data.n_rows; ++r) probs.push_back(model.predict_proba(data.row(r)));
    CHECK(roc_auc(labels, probs).auc <= 0.6);
}

TEST_CASE("knn probability is the neighbor vote fraction") {
    auto data = testing::make_dataset(
        {{0.0, 0.0}, {0.1, 0.0}, {0.0, 0.1}, {0.1, 0.1}, {0.05, 0.05}, {9.0, 9.0}, {9.1, 9.0}},
        {1, 1, 1, 1, 1, 0, 0});
    auto model = train(KnnConfig{.k = 5}, data, data.all_rows(), 4);
    CHECK(model.predict_proba(std::vector<double>{0.05, 0.04}) == 1.0);
    CHECK(model.predict_proba(std::vector<double>{9.05, 9.0}) ==
          doctest::Approx(3.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("lda posterior at the midpoint of symmetric blobs is one half") {
    auto data = testing::gaussian_blobs(200, 200, 2, 6.0, 5);
    auto model = train(LdaConfig{}, data, data.all_rows(), 5);
    // Evaluate on the exact midpoint between the fitted class means.
    std::vector<double> mid(2);
    std::array<std::vector<double>, 2> means;
    std::array<std::size_t, 2> counts{};
    means[0].assign(2, 0.0);
    means[1].assign(2, 0.0);
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        auto idx = static_cast<std::size_t>(data.labels[r]);
        counts[idx]++;
        for (std::size_t c = 0; c < 2; ++c) means[idx][c] += data.at(r, c);
    }
    for (std::size_t c = 0; c < 2; ++c)
        mid[c] = 0.5 * (means[0][c] / counts[0] + means[1][c] / counts[1]);
    CHECK(model.predict_proba(mid) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("probabilities are valid for every model kind") {
    auto data = testing::gaussian_blobs(50, 30, 3, 2.0, 6);
    std::vector<ClassifierKind> kinds = {KnnConfig{},      LdaConfig{},
                                         QdaConfig{},      LogisticConfig{},
                                         ExtraTreesConfig{.n_trees = 20}, AdaBoostConfig{.rounds = 20}};
    Rng rng(7);
    for (const auto& kind : kinds) {
        auto model = train(kind, data, data.all_rows(), 7);
        for (int i = 0; i < 50; ++i) {
            std::vector<double> x = {rng.uniform(-3.0, 5.0), rng.uniform(-3.0, 5.0),
                                     rng.uniform(-3.0, 5.0)};
            double p = model.predict_proba(x);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
    }
}

TEST_CASE("train requires both classes and matching dimensions") {
    auto data = testing::make_dataset({{0.0}, {1.0}, {2.0}, {3.0}}, {0, 0, 0, 0});
    CHECK_THROWS_AS(train(LdaConfig{}, data, data.all_rows(), 1), Error);
    auto ok = testing::gaussian_blobs(10, 10, 2, 3.0, 8);
    auto model = train(LdaConfig{}, ok, ok.all_rows(), 1);
    CHECK_THROWS_AS(model.predict_proba(std::vector<double>{1.0, 2.0, 3.0}), Error);
}

TEST_CASE("logistic analytic gradient matches central finite differences") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        auto data = testing::random_labeled(25, 3, 900 + trial);
        auto rows = data.all_rows();
        std::vector<double> w = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                 rng.uniform(-1.0, 1.0)};
        double b = rng.uniform(-0.5, 0.5);
        const double l2 = 1e-3;

        std::vector<double> grad(3);
        double grad_b = 0.0;
        logistic_gradient(data, rows, w, b, l2, grad, grad_b);

        const double h = 1e-6;
        for (std::size_t j = 0; j < 3; ++j) {
            auto wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            double numeric = (logistic_loss(data, rows, wp, b, l2) -
                              logistic_loss(data, rows, wm, b, l2)) /
                             (2 * h);
            CHECK(std::abs(grad[j] - numeric) <=
                  1e-5 * std::max(1.0, std::abs(numeric)));
        }
        double numeric_b = (logistic_loss(data, rows, w, b + h, l2) -
                            logistic_loss(data, rows, w, b - h, l2)) /
                           (2 * h);
        CHECK(std::abs(grad_b - numeric_b) <= 1e-5 * std::max(1.0, std::abs(numeric_b)));
    }
}

TEST_CASE("lda boundary normal aligns with the mean difference on spherical classes") {
    auto data = testing::gaussian_blobs(250, 250, 4, 3.0, 10);
    auto model = train(LdaConfig{}, data, data.all_rows(), 10);
    auto w = lda_direction(model);

    std::vector<double> diff(4, 0.0);
    std::array<std::size_t, 2> counts{};
    std::array<std::vector<double>, 2> means;
    means[0].assign(4, 0.0);
    means[1].assign(4, 0.0);
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        auto idx = static_cast<std::size_t>(data.labels[r]);
        counts[idx]++;
        for (std::size_t c = 0; c < 4; ++c) means[idx][c] += data.at(r, c);
    }
    for (std::size_t c = 0; c < 4; ++c)
        diff[c] = means[1][c] / counts[1] - means[0][c] / counts[0];

    double dot = 0.0, nw = 0.0, nd = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        dot += w[c] * diff[c];
        nw += w[c] * w[c];
        nd += diff[c] * diff[c];
    }
    double angle = std::acos(dot / std::sqrt(nw * nd)) * 180.0 / 3.14159265358979;
    CHECK(angle <= 5.0);
}

TEST_CASE("qda separates classes that differ only in spread") {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    Rng rng(11);
    for (int i = 0; i < 150; ++i) {  // tight minority at origin
        rows.push_back({0.3 * rng.normal(), 0.3 * rng.normal()});
        labels.push_back(1);
    }
    for (int i = 0; i < 150; ++i) {  // broad majority, same center
        rows.push_back({3.0 * rng.normal(), 3.0 * rng.normal()});
        labels.push_back(0);
    }
    auto data = testing::make_dataset(rows, labels);
    auto model = train(QdaConfig{}, data, data.all_rows(), 11);
    CHECK(model.predict_proba(std::vector<double>{0.0, 0.0}) > 0.5);
    CHECK(model.predict_proba(std::vector<double>{6.0, 6.0}) < 0.5);
}

TEST_CASE("extra trees fit the xor pattern that defeats linear models") {
    auto data = xor_pattern(40, 12);
    auto trees = train(ExtraTreesConfig{.n_trees = 60}, data, data.all_rows(), 12);
    CHECK(training_accuracy(trees, data) >= 0.95);
}

TEST_CASE("adaboost stumps carve out an interval class") {
    // Minority occupies a band in one feature; single stumps cannot
    // represent it but a few boosted ones can.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    Rng rng(121);
    for (int i = 0; i < 240; ++i) {
        double x = rng.uniform(-3.0, 3.0);
        rows.push_back({x, rng.uniform(-1.0, 1.0)});
        labels.push_back(std::abs(x) < 1.0);
    }
    auto data = testing::make_dataset(rows, labels);
    auto stumps = train(AdaBoostConfig{.rounds = 80}, data, data.all_rows(), 12);
    CHECK(training_accuracy(stumps, data) >= 0.95);
}

TEST_CASE("an all-constant feature table is ill-conditioned for lda") {
    // Zero pooled trace leaves the ridge with nothing to add.
    auto data = testing::make_dataset({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}},
                                      {0, 0, 1, 1});
    CHECK_THROWS_WITH_AS(train(LdaConfig{}, data, data.all_rows(), 1),
                         doctest::Contains("IllConditioned"), Error);
}

TEST_CASE("an absurd learning rate makes logistic regression diverge") {
    auto data = testing::gaussian_blobs(20, 20, 2, 3.0, 99);
    // The oversized step feeds back through the L2 term until it overflows.
    CHECK_THROWS_WITH_AS(
        train(LogisticConfig{.rate = 1e200, .epochs = 4, .l2 = 1.0}, data, data.all_rows(), 1),
        doctest::Contains("Diverged"), Error);
}

TEST_CASE("training is deterministic for a fixed seed") {
    auto data = testing::gaussian_blobs(60, 40, 3, 1.5, 13);
    Rng rng(14);
    std::vector<std::vector<double>> queries;
    for (int i = 0; i < 30; ++i)
        queries.push_back({rng.uniform(-2.0, 4.0), rng.uniform(-2.0, 4.0),
                           rng.uniform(-2.0, 4.0)});
    for (const ClassifierKind& kind :
         {ClassifierKind{ExtraTreesConfig{.n_trees = 30}}, ClassifierKind{AdaBoostConfig{}},
          ClassifierKind{LogisticConfig{}}}) {
        auto a = train(kind, data, data.all_rows(), 77);
        auto b = train(kind, data, data.all_rows(), 77);
        for (const auto& q : queries) CHECK(a.predict_proba(q) == b.predict_proba(q));
    }
    // Different seed changes randomized models.
    auto a = train(ExtraTreesConfig{.n_trees = 30}, data, data.all_rows(), 77);
    auto c = train(ExtraTreesConfig{.n_trees = 30}, data, data.all_rows(), 78);
    bool any_diff = false;
    for (const auto& q : queries) any_diff |= a.predict_proba(q) != c.predict_proba(q);
    CHECK(any_diff);
}

TEST_CASE("select_top3 ranks by AUC with F1 and kind-order tie-breaks") {
    auto data = testing::gaussian_blobs(80, 60, 3, 2.0, 15);
    std::vector<std::size_t> train_rows, val_rows;
    for (std::size_t r = 0; r < data.n_rows; ++r)
        (r % 4 == 3 ? val_rows : train_rows).push_back(r);

    std::vector<TrainedModel> models;
    for (const ClassifierKind& kind :
         {ClassifierKind{KnnConfig{}}, ClassifierKind{LdaConfig{}}, ClassifierKind{QdaConfig{}},
          ClassifierKind{LogisticConfig{}}, ClassifierKind{ExtraTreesConfig{.n_trees = 25}},
          ClassifierKind{AdaBoostConfig{.rounds = 30}}})
        models.push_back(train(kind, data, train_rows, 16));

    auto ensemble = select_top3(models, data, val_rows);
    REQUIRE(ensemble.members.size() == 3);
    REQUIRE(ensemble.selection_scores.size() == 3);
    CHECK(ensemble.selection_scores[0] >= ensemble.selection_scores[1]);
    CHECK(ensemble.selection_scores[1] >= ensemble.selection_scores[2]);

    // Every non-member scores no better than the weakest member.
    std::vector<int> labels;
    for (auto r : val_rows) labels.push_back(data.labels[r]);
    for (const auto& model : models) {
        std::vector<double> probs;
        for (auto r : val_rows) probs.push_back(model.predict_proba(data.row(r)));
        double auc = roc_auc(labels, probs).auc;
        CHECK(auc <= ensemble.selection_scores[0]);
    }
    CHECK_THROWS_AS(select_top3({models[0], models[1]}, data, val_rows), Error);
}

TEST_CASE("ensemble code concatenates member initials") {
    CHECK(kind_initials(LdaConfig{}) == "Ld");
    CHECK(kind_initials(QdaConfig{}) == "Q");
    CHECK(kind_initials(ExtraTreesConfig{}) == "E");
    CHECK(kind_initials(KnnConfig{}) == "K");
    CHECK(kind_initials(AdaBoostConfig{}) == "A");
    CHECK(kind_initials(LogisticConfig{}) == "Lr");

    auto data = testing::gaussian_blobs(30, 30, 2, 5.0, 17);
    Ensemble ensemble;
    ensemble.members = {train(LdaConfig{}, data, data.all_rows(), 1),
                        train(QdaConfig{}, data, data.all_rows(), 1),
                        train(ExtraTreesConfig{.n_trees = 10}, data, data.all_rows(), 1)};
    ensemble.selection_scores = {1.0, 1.0, 1.0};
    CHECK(ensemble.code() == "LdQE");
}

TEST_CASE("majority vote follows the member verdicts") {
    auto data = testing::gaussian_blobs(30, 30, 2, 6.0, 18);
    auto model = train(LdaConfig{}, data, data.all_rows(), 1);
    Ensemble same;
    same.members = {model, model, model};
    same.selection_scores = {1.0, 1.0, 1.0};
    Rng rng(19);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x = {rng.uniform(-3.0, 9.0), rng.uniform(-3.0, 9.0)};
        CHECK(vote(same, x) == model.predict(x));
        CHECK(ensemble_proba(same, x) == doctest::Approx(model.predict_proba(x)).epsilon(1e-12));
    }
}

TEST_CASE("majority vote is permutation invariant") {
    auto data = testing::gaussian_blobs(40, 30, 2, 2.0, 20);
    std::vector<TrainedModel> models = {
        train(LdaConfig{}, data, data.all_rows(), 1),
        train(KnnConfig{.k = 3}, data, data.all_rows(), 1),
        train(LogisticConfig{}, data, data.all_rows(), 1)};
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x = {rng.uniform(-2.0, 4.0), rng.uniform(-2.0, 4.0)};
        Ensemble a, b;
        a.members = {models[0], models[1], models[2]};
        b.members = {models[2], models[0], models[1]};
        a.selection_scores = b.selection_scores = {1.0, 1.0, 1.0};
        CHECK(vote(a, x) == vote(b, x));
    }
}

TEST_SUITE_END();
