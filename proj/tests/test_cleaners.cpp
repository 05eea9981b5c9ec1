#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "rebalance/cleaners.hpp"
#include "rebalance/error.hpp"
#include "rebalance/neighbors.hpp"
#include "rebalance/reference.hpp"

using namespace rebalance;

TEST_SUITE_BEGIN("cleaners");

TEST_CASE("enn deletes nothing when every neighborhood is unanimous") {
    auto data = testing::gaussian_blobs(20, 20, 2, 50.0, 1);
    auto result = enn(data, data.all_rows(), EnnScope::all_rows);
    CHECK(result.survivors.size() == data.n_rows);
    CHECK(result.report.removed.empty());
}

TEST_CASE("a majority point deep inside a minority cluster is deleted") {
    std::vector<std::vector<double>> rows = {
        {0.0, 0.0}, {0.1, 0.0}, {0.0, 0.1}, {0.1, 0.1}, {0.05, 0.05},  // cluster, row 4 majority
        {9.0, 9.0}, {9.1, 9.0}, {9.0, 9.1}};
    std::vector<int> labels = {1, 1, 1, 1, 0, 0, 0, 0};
    auto data = testing::make_dataset(rows, labels);
    auto result = enn(data, data.all_rows(), EnnScope::all_rows);
    REQUIRE(result.report.removed.size() == 1);
    CHECK(result.report.removed.front().row == 4);
    CHECK(result.report.removed.front().reason == RemovalReason::enn_misclassified);
    CHECK(result.report.before.negatives == 4);
    CHECK(result.report.after.negatives == 3);
}

TEST_CASE("enn deletion set equals the exhaustive 3-NN vote oracle") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto data = testing::gaussian_blobs(90, 60, 3, 1.0, 500 + seed);
        auto rows = data.all_rows();
        auto result = enn(data, rows, EnnScope::all_rows);
        auto expected = reference::enn_deletions(data, rows, DistanceKind::euclid());
        std::vector<std::size_t> got;
        for (const auto& rr : result.report.removed) got.push_back(rr.row);
        CHECK(got == expected);
    }
}

TEST_CASE("majority_only scope never deletes minority rows") {
    auto data = testing::gaussian_blobs(60, 40, 2, 0.5, 7);  // heavy overlap
    auto all_mode = enn(data, data.all_rows(), EnnScope::all_rows);
    auto maj_mode = enn(data, data.all_rows(), EnnScope::majority_only);
    bool minority_deleted = false;
    for (const auto& rr : maj_mode.report.removed) minority_deleted |= data.labels[rr.row] == 1;
    CHECK_FALSE(minority_deleted);
    CHECK(all_mode.report.removed.size() >= maj_mode.report.removed.size());
}

TEST_CASE("enn preconditions") {
    auto tiny = testing::make_dataset({{0.0}, {1.0}, {2.0}}, {0, 1, 0});
    CHECK_THROWS_AS(enn(tiny, tiny.all_rows(), EnnScope::all_rows), Error);
    auto single = testing::make_dataset({{0.0}, {1.0}, {2.0}, {3.0}}, {0, 0, 0, 0});
    CHECK_THROWS_AS(enn(single, single.all_rows(), EnnScope::all_rows), Error);
}

TEST_CASE("two points, one per class, form exactly one tomek link") {
    auto data = testing::make_dataset({{0.0}, {1.0}}, {0, 1});
    auto links = find_tomek_links(data, data.all_rows());
    REQUIRE(links.size() == 1);
    CHECK(links.front().minority_idx == 1);
    CHECK(links.front().majority_idx == 0);
    CHECK(links.front().distance == doctest::Approx(1.0));
}

TEST_CASE("a third point strictly between the pair kills the link") {
    auto data = testing::make_dataset({{0.0}, {1.0}, {0.5}}, {0, 1, 0});
    auto links = find_tomek_links(data, data.all_rows());
    // (1 vs 0) is blocked by the midpoint; (1 vs 0.5) is itself a link.
    REQUIRE(links.size() == 1);
    CHECK(links.front().minority_idx == 1);
    CHECK(links.front().majority_idx == 2);
}

TEST_CASE("tomek links equal the literal O(n^2) enumeration on random data") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto data = testing::random_labeled(100, 3, 600 + seed);
        auto rows = data.all_rows();
        auto links = find_tomek_links(data, rows);
        auto expected = reference::tomek_links(data, rows, DistanceKind::euclid());
        REQUIRE(links.size() == expected.size());
        std::set<std::pair<std::size_t, std::size_t>> got, want;
        for (const auto& l : links) got.insert({l.minority_idx, l.majority_idx});
        for (const auto& l : expected) want.insert({l.minority, l.majority});
        CHECK(got == want);
    }
}

TEST_CASE("tomek mutuality holds literally for every reported link") {
    auto data = testing::random_labeled(80, 2, 601);
    auto rows = data.all_rows();
    auto links = find_tomek_links(data, rows);
    auto kinds = std::span<const ColumnKind>(data.column_kinds);
    auto d = [&](std::size_t a, std::size_t b) {
        return squared_distance(data.row(a), data.row(b), kinds, DistanceKind::euclid());
    };
    for (const auto& link : links) {
        double dij = d(link.minority_idx, link.majority_idx);
        for (std::size_t k : rows) {
            if (k == link.minority_idx || k == link.majority_idx) continue;
            CHECK(d(link.minority_idx, k) >= dij);
            CHECK(d(link.majority_idx, k) >= dij);
        }
    }
}

TEST_CASE("cleaners track the oracle under the heterogeneous distance too") {
    Rng rng(602);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 90; ++i) {
        rows.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                        static_cast<double>(rng.uniform_index(3))});
        labels.push_back(rng.uniform() < 0.4);
    }
    labels[0] = 0;
    labels[1] = 1;
    auto data = testing::make_dataset(rows, labels);
    data.column_kinds[2] = ColumnKind::nominal;
    data.categories[2] = {"a", "b", "c"};
    auto all = data.all_rows();
    auto dist = default_distance(data, all);

    auto removed = enn(data, all, EnnScope::all_rows).report.removed;
    std::vector<std::size_t> got;
    for (const auto& rr : removed) got.push_back(rr.row);
    CHECK(got == reference::enn_deletions(data, all, dist));

    auto links = find_tomek_links(data, all);
    auto expected = reference::tomek_links(data, all, dist);
    REQUIRE(links.size() == expected.size());
    for (std::size_t i = 0; i < links.size(); ++i) {
        CHECK(links[i].minority_idx == expected[i].minority);
        CHECK(links[i].majority_idx == expected[i].majority);
    }
}

TEST_CASE("find_tomek_links rejects single-class input") {
    auto data = testing::make_dataset({{0.0}, {1.0}}, {0, 0});
    CHECK_THROWS_AS(find_tomek_links(data, data.all_rows()), Error);
}

TEST_CASE("smote_tomek on separated blobs equals plain smote") {
    auto data = testing::gaussian_blobs(40, 12, 2, 60.0, 11);
    SmoteConfig cfg{.k = 3, .target_ratio = 1.0, .seed = 21};
    auto hybrid = smote_tomek(data, data.all_rows(), cfg);
    auto plain = smote(data, data.all_rows(), cfg);
    CHECK(hybrid.clean.removed.empty());
    CHECK(hybrid.data.features == plain.data.features);
}

TEST_CASE("smote_tomek removes exactly the majority endpoints of post-smote links") {
    auto data = testing::gaussian_blobs(80, 25, 2, 1.2, 12);  // overlapping
    SmoteConfig cfg{.k = 5, .target_ratio = 1.0, .seed = 22};
    auto hybrid = smote_tomek(data, data.all_rows(), cfg);
    auto oversampled = smote(data, data.all_rows(), cfg);  // same seed: identical stage
    auto links = find_tomek_links(oversampled.data, oversampled.data.all_rows());
    REQUIRE(!links.empty());

    std::set<std::size_t> expected;
    for (const auto& l : links) expected.insert(l.majority_idx);
    std::set<std::size_t> got;
    for (const auto& rr : hybrid.clean.removed) {
        CHECK(rr.reason == RemovalReason::tomek_majority);
        got.insert(rr.row);
    }
    CHECK(got == expected);

    // Count reconciliation: balanced minority, majority minus the removals.
    auto counts = count_classes(hybrid.data);
    auto before = count_classes(oversampled.data);
    CHECK(counts.positives == before.positives);
    CHECK(counts.negatives == before.negatives - expected.size());
}

TEST_CASE("smote_tomek remove_both drops both endpoints") {
    auto data = testing::gaussian_blobs(80, 25, 2, 1.2, 12);
    SmoteConfig cfg{.k = 5, .target_ratio = 1.0, .seed = 22};
    auto both = smote_tomek(data, data.all_rows(), cfg, true);
    bool saw_minority = false;
    for (const auto& rr : both.clean.removed)
        saw_minority |= rr.reason == RemovalReason::tomek_minority;
    CHECK(saw_minority);
}

TEST_CASE("smote_enn on separable blobs removes nothing") {
    auto data = testing::gaussian_blobs(40, 12, 2, 50.0, 13);
    SmoteConfig cfg{.k = 3, .target_ratio = 1.0, .seed = 23};
    auto hybrid = smote_enn(data, data.all_rows(), cfg);
    auto plain = smote(data, data.all_rows(), cfg);
    CHECK(hybrid.clean.removed.empty());
    CHECK(hybrid.data.features == plain.data.features);
}

TEST_CASE("smote_enn removals on overlapped gaussians are oracle-certified") {
    auto data = testing::gaussian_blobs(120, 40, 2, 1.0, 14);
    SmoteConfig cfg{.k = 5, .target_ratio = 1.0, .seed = 24};
    auto hybrid = smote_enn(data, data.all_rows(), cfg);
    auto oversampled = smote(data, data.all_rows(), cfg);
    auto before = count_classes(oversampled.data);
    auto after = count_classes(hybrid.data);
    CHECK(after.positives + after.negatives < before.positives + before.negatives);

    auto expected = reference::enn_deletions(oversampled.data, oversampled.data.all_rows(),
                                             DistanceKind::euclid());
    std::vector<std::size_t> got;
    for (const auto& rr : hybrid.clean.removed) {
        CHECK(rr.reason == RemovalReason::enn_misclassified);
        got.push_back(rr.row);
    }
    CHECK(got == expected);

    // kept_rows maps final rows back to the pre-cleaning coordinates.
    REQUIRE(hybrid.kept_rows.size() == hybrid.data.n_rows);
    for (std::size_t i = 0; i < hybrid.data.n_rows; ++i) {
        auto pre = hybrid.kept_rows[i];
        auto a = hybrid.data.row(i);
        auto b = oversampled.data.row(pre);
        CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
}

TEST_CASE("smote_enn survives a tiny far-corner minority") {
    auto data = testing::gaussian_blobs(50, 2, 2, 30.0, 15);
    auto hybrid = smote_enn(data, data.all_rows(), {.k = 5, .target_ratio = 1.0, .seed = 25});
    auto counts = count_classes(hybrid.data);
    CHECK(counts.positives > 0);
    CHECK(counts.negatives > 0);
}

TEST_CASE("stem with zero mixup pairs is exactly smote_enn") {
    auto data = testing::gaussian_blobs(60, 20, 3, 2.0, 16);
    SmoteConfig scfg{.k = 5, .target_ratio = 1.0, .seed = 26};
    MixupConfig mcfg;
    mcfg.pairs_per_class = 0;
    mcfg.seed = 27;
    auto staged = stem(data, data.all_rows(), scfg, mcfg);
    auto cleaned = smote_enn(data, data.all_rows(), scfg);
    CHECK(staged.data.features == cleaned.data.features);
    CHECK(staged.data.labels == cleaned.data.labels);
}

TEST_CASE("stem composes bit-identically from its stages") {
    auto data = testing::gaussian_blobs(80, 30, 2, 2.5, 17);
    SmoteConfig scfg{.k = 5, .target_ratio = 1.0, .seed = 28};
    MixupConfig mcfg{.alpha = 0.2, .pairs_per_class = std::nullopt, .same_class_only = true,
                     .seed = 29};
    auto staged = stem(data, data.all_rows(), scfg, mcfg);

    auto cleaned = smote_enn(data, data.all_rows(), scfg);
    auto counts = count_classes(cleaned.data);
    std::size_t larger = std::max(counts.negatives, counts.positives);
    auto mixed = mixup_augment_per_class(
        cleaned.data, cleaned.data.all_rows(), mcfg,
        {2 * larger - counts.negatives, 2 * larger - counts.positives});

    CHECK(staged.data.features == mixed.data.features);
    CHECK(staged.data.labels == mixed.data.labels);
    // Final classes are exactly equal: twice the larger post-cleaning class.
    auto final_counts = count_classes(staged.data);
    CHECK(final_counts.positives == final_counts.negatives);
    CHECK(final_counts.positives == 2 * larger);
}

TEST_CASE("stem on a 6:94 two-gaussian set: balanced output, audited mixup rows") {
    auto data = testing::gaussian_blobs(940, 60, 2, 2.0, 18);
    SmoteConfig scfg{.k = 5, .target_ratio = 1.0, .seed = 30};
    MixupConfig mcfg{.alpha = 0.2, .pairs_per_class = std::nullopt, .same_class_only = true,
                     .seed = 31};
    auto result = stem(data, data.all_rows(), scfg, mcfg);

    auto counts = count_classes(result.data);
    CHECK(counts.positives == counts.negatives);

    // Every mixup row sits inside the bounding box of its source pair.
    std::size_t mixup_rows = 0;
    for (const auto& rec : result.provenance) {
        if (rec.algorithm != "mixup") continue;
        ++mixup_rows;
        auto p = result.data.row(rec.row_id);
        auto a = result.data.row(rec.source_idx);
        auto b = result.data.row(rec.neighbor_idx);
        for (std::size_t c = 0; c < 2; ++c) {
            CHECK(p[c] >= std::min(a[c], b[c]) - 1e-12);
            CHECK(p[c] <= std::max(a[c], b[c]) + 1e-12);
        }
        CHECK(result.data.labels[rec.row_id] == result.data.labels[rec.source_idx]);
    }
    CHECK(mixup_rows > 0);
    // Post-smote balance is recorded, and the smote stage left its records.
    CHECK(result.clean.before.positives == 940);
    bool has_smote = false;
    for (const auto& rec : result.provenance) has_smote |= rec.algorithm == "smote";
    CHECK(has_smote);
}

TEST_CASE("cleaners never mutate surviving original rows") {
    auto data = testing::gaussian_blobs(70, 30, 3, 1.5, 19);
    auto result = smote_enn(data, data.all_rows(), {.k = 5, .target_ratio = 1.0, .seed = 33});
    for (std::size_t i = 0; i < result.data.n_rows; ++i) {
        std::size_t pre = result.kept_rows[i];
        if (pre >= data.n_rows) continue;  // synthetic
        auto a = result.data.row(i);
        auto b = data.row(pre);
        CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
}

TEST_SUITE_END();
