#pragma once

// Undersampling cleaners and the hybrid pipelines built from them.
// ENN votes with exactly three neighbors and never cascades: every vote
// is taken on the original neighborhood, deletions are applied after.

#include <span>

#include "rebalance/resample.hpp"
#include "rebalance/samplers.hpp"

namespace rebalance {

enum class EnnScope { all_rows, majority_only };

struct TomekLink {
    std::size_t minority_idx;
    std::size_t majority_idx;
    double distance;
};

struct EnnResult {
    std::vector<std::size_t> survivors;  // input order preserved
    CleanReport report;
};

// Deletes every row whose label loses the majority vote of its three
// nearest neighbors within `rows`. `majority_only` restricts deletion to
// majority-class rows.
EnnResult enn(const Dataset& data, std::span<const std::size_t> rows, EnnScope scope);

// All cross-class pairs that are mutually nearest: no third indexed row
// is strictly closer to either endpoint than they are to each other.
// Each link is reported once, minority endpoint first, sorted by
// (minority_idx, majority_idx).
std::vector<TomekLink> find_tomek_links(const Dataset& data,
                                        std::span<const std::size_t> rows);

// SMOTE, then removal of the majority endpoint of every Tomek link found
// in the oversampled set. `remove_both` also drops the minority endpoint.
ResampleResult smote_tomek(const Dataset& data, std::span<const std::size_t> train_rows,
                           const SmoteConfig& cfg, bool remove_both = false);

// SMOTE, then ENN over every row of the oversampled set.
ResampleResult smote_enn(const Dataset& data, std::span<const std::size_t> train_rows,
                         const SmoteConfig& cfg);

// SMOTE -> ENN -> same-class mixup. Composes the stages exactly as they
// run standalone, with the same derived seeds.
ResampleResult stem(const Dataset& data, std::span<const std::size_t> train_rows,
                    const SmoteConfig& smote_cfg, const MixupConfig& mixup_cfg);

}  // namespace rebalance
