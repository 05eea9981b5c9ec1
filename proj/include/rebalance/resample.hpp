#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rebalance/dataset.hpp"

namespace rebalance {

// One audit record per generated row: the synthetic row reproduces as
//   source + coefficient * (neighbor - source)        (SMOTE family)
//   coefficient * source + (1 - coefficient) * neighbor  (mixup)
// A negative coefficient marks extrapolation away from the neighbor.
struct SyntheticRecord {
    std::size_t row_id;
    std::string algorithm;
    std::size_t source_idx;
    std::size_t neighbor_idx;
    double coefficient;
};

enum class RemovalReason : std::uint8_t { enn_misclassified, tomek_majority, tomek_minority };

struct RemovedRow {
    std::size_t row;
    RemovalReason reason;
};

struct ClassCounts {
    std::size_t negatives = 0;
    std::size_t positives = 0;
};

ClassCounts count_classes(const Dataset& data);

struct CleanReport {
    std::vector<RemovedRow> removed;
    ClassCounts before;
    ClassCounts after;
};

// Output of every sampler and cleaner. `data` holds the consumed
// training rows in input order followed by any synthetic rows. For the
// hybrids, SMOTE-stage provenance and the clean report are expressed in
// the pre-cleaning row coordinates; `kept_rows` maps each final row back
// to that pre-cleaning index (identity when nothing was cleaned), and
// mixup-stage provenance refers to final rows directly.
struct ResampleResult {
    Dataset data;
    std::vector<SyntheticRecord> provenance;
    CleanReport clean;
    std::vector<std::size_t> kept_rows;
    std::vector<std::string> warnings;
};

}  // namespace rebalance
