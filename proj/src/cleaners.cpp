#include "rebalance/cleaners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <unordered_set>

#include "rebalance/error.hpp"
#include "rebalance/neighbors.hpp"

namespace rebalance {

namespace {

ClassCounts count_over(const Dataset& data, std::span<const std::size_t> rows) {
    ClassCounts c;
    for (std::size_t r : rows) (data.labels[r] == 1 ? c.positives : c.negatives)++;
    return c;
}

void require_both_classes(const Dataset& data, std::span<const std::size_t> rows,
                          const char* op) {
    auto c = count_over(data, rows);
    if (c.positives == 0 || c.negatives == 0)
        throw Error(ErrorCode::InvalidArgument, std::string(op) + ": both classes required");
}

// Drops the removed pre-clean rows from a freshly oversampled result,
// keeping provenance in pre-clean coordinates and recording the map from
// final rows back to them.
ResampleResult apply_removals(ResampleResult&& oversampled, std::vector<RemovedRow> removed) {
    std::sort(removed.begin(), removed.end(),
              [](const RemovedRow& a, const RemovedRow& b) { return a.row < b.row; });
    std::unordered_set<std::size_t> gone;
    for (const auto& rr : removed) gone.insert(rr.row);

    ResampleResult out;
    out.provenance = std::move(oversampled.provenance);
    out.warnings = std::move(oversampled.warnings);
    out.clean.removed = std::move(removed);
    out.clean.before = count_classes(oversampled.data);
    out.kept_rows.reserve(oversampled.data.n_rows - gone.size());
    for (std::size_t r = 0; r < oversampled.data.n_rows; ++r)
        if (!gone.count(r)) out.kept_rows.push_back(r);
    out.data = oversampled.data.subset(out.kept_rows);
    out.clean.after = count_classes(out.data);
    return out;
}

}  // namespace

EnnResult enn(const Dataset& data, std::span<const std::size_t> rows, EnnScope scope) {
    if (rows.size() < 4)
        throw Error(ErrorCode::InvalidArgument, "enn: need at least 4 rows for 3 neighbors");
    require_both_classes(data, rows, "enn");

    auto dist = default_distance(data, rows);
    auto index = build_index(data, rows, dist);
    auto neighborhoods = knn_batch(index, rows, 3);

    EnnResult result;
    result.report.before = count_over(data, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t r = rows[i];
        int votes = 0;
        for (const auto& nb : neighborhoods[i]) votes += data.labels[nb.row];
        int verdict = votes >= 2 ? 1 : 0;
        bool deletable = scope == EnnScope::all_rows || data.labels[r] == 0;
        if (deletable && verdict != data.labels[r])
            result.report.removed.push_back({r, RemovalReason::enn_misclassified});
        else
            result.survivors.push_back(r);
    }
    result.report.after = count_over(data, result.survivors);
    return result;
}

std::vector<TomekLink> find_tomek_links(const Dataset& data,
                                        std::span<const std::size_t> rows) {
    require_both_classes(data, rows, "find_tomek_links");
    auto dist = default_distance(data, rows);

    // Squared distance to the nearest other indexed row, any class.
    std::vector<double> nearest2(rows.size(), std::numeric_limits<double>::infinity());
    const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        auto a = data.row(rows[static_cast<std::size_t>(i)]);
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d2 = squared_distance(a, data.row(rows[static_cast<std::size_t>(j)]),
                                         data.column_kinds, dist);
            best = std::min(best, d2);
        }
        nearest2[static_cast<std::size_t>(i)] = best;
    }

    // A cross-class pair is a link when neither endpoint has any strictly
    // closer row, i.e. their distance equals both nearest distances.
    std::vector<TomekLink> links;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (data.labels[rows[i]] != 1) continue;
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (data.labels[rows[j]] != 0) continue;
            double d2 = squared_distance(data.row(rows[i]), data.row(rows[j]),
                                         data.column_kinds, dist);
            if (d2 <= nearest2[i] && d2 <= nearest2[j])
                links.push_back({rows[i], rows[j], std::sqrt(d2)});
        }
    }
    std::sort(links.begin(), links.end(), [](const TomekLink& a, const TomekLink& b) {
        return std::tie(a.minority_idx, a.majority_idx) <
               std::tie(b.minority_idx, b.majority_idx);
    });
    return links;
}

ResampleResult smote_tomek(const Dataset& data, std::span<const std::size_t> train_rows,
                           const SmoteConfig& cfg, bool remove_both) {
    auto oversampled = smote(data, train_rows, cfg);
    auto links = find_tomek_links(oversampled.data, oversampled.data.all_rows());

    std::vector<RemovedRow> removed;
    std::unordered_set<std::size_t> seen;
    for (const auto& link : links) {
        if (seen.insert(link.majority_idx).second)
            removed.push_back({link.majority_idx, RemovalReason::tomek_majority});
        if (remove_both && seen.insert(link.minority_idx).second)
            removed.push_back({link.minority_idx, RemovalReason::tomek_minority});
    }
    return apply_removals(std::move(oversampled), std::move(removed));
}

ResampleResult smote_enn(const Dataset& data, std::span<const std::size_t> train_rows,
                         const SmoteConfig& cfg) {
    auto oversampled = smote(data, train_rows, cfg);
    auto cleaned = enn(oversampled.data, oversampled.data.all_rows(), EnnScope::all_rows);
    if (cleaned.report.after.positives == 0 || cleaned.report.after.negatives == 0)
        throw Error(ErrorCode::Degenerate, "smote_enn: cleaning emptied a class");
    return apply_removals(std::move(oversampled), std::move(cleaned.report.removed));
}

ResampleResult stem(const Dataset& data, std::span<const std::size_t> train_rows,
                    const SmoteConfig& smote_cfg, const MixupConfig& mixup_cfg) {
    auto cleaned = smote_enn(data, train_rows, smote_cfg);
    auto counts = count_classes(cleaned.data);
    if (counts.positives < 2 || counts.negatives < 2)
        throw Error(ErrorCode::Degenerate, "stem: a class is too small for mixup");

    // Default mixup counts restore exact balance while roughly doubling:
    // the larger post-cleaning class doubles, the smaller one is topped up
    // to the same final size. An explicit pairs_per_class grows both
    // classes by the same amount instead.
    std::array<std::size_t, 2> mix_counts;
    if (mixup_cfg.pairs_per_class) {
        mix_counts = {*mixup_cfg.pairs_per_class, *mixup_cfg.pairs_per_class};
    } else {
        std::size_t larger = std::max(counts.negatives, counts.positives);
        mix_counts = {2 * larger - counts.negatives, 2 * larger - counts.positives};
    }
    auto mixed = mixup_augment_per_class(cleaned.data, cleaned.data.all_rows(), mixup_cfg,
                                         mix_counts);

    ResampleResult out;
    out.data = std::move(mixed.data);
    out.provenance = std::move(cleaned.provenance);  // pre-clean coordinates
    out.provenance.insert(out.provenance.end(), mixed.provenance.begin(),
                          mixed.provenance.end());  // final coordinates
    out.clean = std::move(cleaned.clean);  // before/after bracket the ENN stage
    out.kept_rows = std::move(cleaned.kept_rows);
    // Mixup rows have no pre-cleaning coordinate; give them fresh ids past
    // the pre-cleaning range so they always read as synthetic.
    std::size_t next_id = out.clean.before.positives + out.clean.before.negatives;
    while (out.kept_rows.size() < out.data.n_rows) out.kept_rows.push_back(next_id++);
    out.warnings = std::move(cleaned.warnings);
    out.warnings.insert(out.warnings.end(), mixed.warnings.begin(), mixed.warnings.end());
    return out;
}

}  // namespace rebalance
