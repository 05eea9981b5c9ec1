#pragma once

// Exact k-nearest-neighbor queries over a frozen feature matrix. The
// scan is brute force: the datasets here are a few thousand rows at
// most, and exactness is what the samplers' audit trail is checked
// against. Distances compare as squares internally; reported distances
// are square roots.

#include <optional>
#include <span>
#include <vector>

#include "rebalance/dataset.hpp"

namespace rebalance {

struct DistanceKind {
    enum class Tag { euclidean, heterogeneous };
    Tag tag = Tag::euclidean;
    double nominal_penalty = 0.0;  // added squared per mismatching nominal column

    static DistanceKind euclid() { return {Tag::euclidean, 0.0}; }
    static DistanceKind heterogeneous(double penalty) { return {Tag::heterogeneous, penalty}; }
};

double squared_distance(std::span<const double> a, std::span<const double> b,
                        std::span<const ColumnKind> kinds, const DistanceKind& dist);

// Euclidean when every column is continuous, otherwise heterogeneous with
// the SMOTE-NC penalty: the median of the population deviations of the
// continuous columns over `rows`.
DistanceKind default_distance(const Dataset& data, std::span<const std::size_t> rows);

struct Neighbor {
    std::size_t row;  // dataset row index
    double distance;
};

class NeighborIndex {
public:
    NeighborIndex(const Dataset& data, std::vector<std::size_t> rows, DistanceKind dist);

    const std::vector<std::size_t>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    const Dataset& data() const { return *data_; }
    const DistanceKind& distance() const { return dist_; }

    // k nearest indexed rows to an arbitrary query point, sorted by
    // non-decreasing distance, ties by lower row index.
    std::vector<Neighbor> knn(std::span<const double> query, std::size_t k) const;
    // Same, but the query is a dataset row and is excluded from the
    // candidates if it happens to be indexed.
    std::vector<Neighbor> knn_row(std::size_t dataset_row, std::size_t k) const;

private:
    std::vector<Neighbor> scan(std::span<const double> query, std::size_t k,
                               std::optional<std::size_t> exclude) const;

    const Dataset* data_;
    std::vector<std::size_t> rows_;
    DistanceKind dist_;
};

// The index holds a reference: `data` must outlive it.
NeighborIndex build_index(const Dataset& data, std::span<const std::size_t> rows,
                          DistanceKind dist, std::optional<int> class_filter = std::nullopt);

// One knn_row query per entry of query_rows, executed in parallel.
std::vector<std::vector<Neighbor>> knn_batch(const NeighborIndex& index,
                                             std::span<const std::size_t> query_rows,
                                             std::size_t k);

}  // namespace rebalance
