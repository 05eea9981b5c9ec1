#pragma once

// Shared builders for test datasets.

#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/rng.hpp"

namespace rebalance::testing {

// Dataset from explicit rows; all columns continuous.
inline Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                            const std::vector<int>& labels) {
    Dataset data;
    data.n_cols = rows.empty() ? 0 : rows.front().size();
    data.column_kinds.assign(data.n_cols, ColumnKind::continuous);
    data.categories.resize(data.n_cols);
    for (std::size_t c = 0; c < data.n_cols; ++c)
        data.feature_names.push_back("x" + std::to_string(c));
    for (std::size_t r = 0; r < rows.size(); ++r)
        data.push_row(rows[r], labels[r], RowProvenance::original);
    return data;
}

// Two Gaussian blobs: `negatives` rows around the origin, `positives`
// rows around (separation, separation, ...).
inline Dataset gaussian_blobs(std::size_t negatives, std::size_t positives, std::size_t dims,
                              double separation, std::uint64_t seed) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    Rng rng(seed);
    for (std::size_t i = 0; i < negatives + positives; ++i) {
        bool positive = i >= negatives;
        std::vector<double> row(dims);
        for (auto& v : row) v = rng.normal() + (positive ? separation : 0.0);
        rows.push_back(std::move(row));
        labels.push_back(positive ? 1 : 0);
    }
    return make_dataset(rows, labels);
}

// Uniform random points in [-1, 1]^dims with random labels.
inline Dataset random_labeled(std::size_t n, std::size_t dims, std::uint64_t seed) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(dims);
        for (auto& v : row) v = rng.uniform(-1.0, 1.0);
        rows.push_back(std::move(row));
        labels.push_back(rng.uniform() < 0.5 ? 0 : 1);
    }
    // Both classes must exist for most operations.
    if (!labels.empty()) {
        labels[0] = 0;
        if (labels.size() > 1) labels[1] = 1;
    }
    return make_dataset(rows, labels);
}

}  // namespace rebalance::testing
