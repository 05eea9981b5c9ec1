#pragma once

// Serial reference implementations, deliberately written as literal
// definition-chasing loops with no shared machinery from the main
// library. Tests check the optimized kernels against these, and the
// benchmark tool reports the speedup over them.

#include <span>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/neighbors.hpp"
#include "rebalance/texture.hpp"

namespace rebalance::reference {

// Exhaustive scan: sort every candidate by (distance, row), take k.
std::vector<Neighbor> knn_scan(const Dataset& data, std::span<const std::size_t> rows,
                               const DistanceKind& dist, std::span<const double> query,
                               std::size_t k, std::ptrdiff_t exclude_row = -1);

// Rows misclassified by the plain majority vote of their three nearest
// neighbors within `rows`.
std::vector<std::size_t> enn_deletions(const Dataset& data, std::span<const std::size_t> rows,
                                       const DistanceKind& dist);

// Literal O(n^2) enumeration of the two mutual-nearest conditions.
struct CrossPair {
    std::size_t minority;
    std::size_t majority;
};
std::vector<CrossPair> tomek_links(const Dataset& data, std::span<const std::size_t> rows,
                                   const DistanceKind& dist);

// Fraction of (positive, negative) pairs ranked correctly, ties 1/2.
double auc_pair_count(std::span<const int> labels, std::span<const double> scores);

// Full-sort median per window, serial.
GrayImage median_filter(const GrayImage& img, std::size_t window);

// Plain serial co-occurrence accumulation.
Glcm glcm(const GrayImage& img, std::size_t levels, int dx, int dy,
          const PixelMask* mask = nullptr);

}  // namespace rebalance::reference
