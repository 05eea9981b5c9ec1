#include "rebalance/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "rebalance/error.hpp"

namespace rebalance {

double squared_distance(std::span<const double> a, std::span<const double> b,
                        std::span<const ColumnKind> kinds, const DistanceKind& dist) {
    double d2 = 0.0;
    if (dist.tag == DistanceKind::Tag::euclidean) {
        for (std::size_t c = 0; c < a.size(); ++c) {
            double d = a[c] - b[c];
            d2 += d * d;
        }
        return d2;
    }
    const double pen2 = dist.nominal_penalty * dist.nominal_penalty;
    for (std::size_t c = 0; c < a.size(); ++c) {
        if (kinds[c] == ColumnKind::continuous) {
            double d = a[c] - b[c];
            d2 += d * d;
        } else if (a[c] != b[c]) {
            d2 += pen2;
        }
    }
    return d2;
}

DistanceKind default_distance(const Dataset& data, std::span<const std::size_t> rows) {
    if (data.all_continuous()) return DistanceKind::euclid();
    std::vector<double> devs;
    const auto n = static_cast<double>(rows.size());
    for (std::size_t c = 0; c < data.n_cols; ++c) {
        if (data.column_kinds[c] != ColumnKind::continuous) continue;
        double mean = 0.0;
        for (std::size_t r : rows) mean += data.at(r, c);
        mean /= n;
        double var = 0.0;
        for (std::size_t r : rows) {
            double d = data.at(r, c) - mean;
            var += d * d;
        }
        devs.push_back(std::sqrt(var / n));
    }
    if (devs.empty()) return DistanceKind::heterogeneous(1.0);
    std::sort(devs.begin(), devs.end());
    std::size_t mid = devs.size() / 2;
    double median = devs.size() % 2 ? devs[mid] : 0.5 * (devs[mid - 1] + devs[mid]);
    return DistanceKind::heterogeneous(median);
}

NeighborIndex::NeighborIndex(const Dataset& data, std::vector<std::size_t> rows,
                             DistanceKind dist)
    : data_(&data), rows_(std::move(rows)), dist_(dist) {
    if (rows_.empty()) throw Error(ErrorCode::InvalidArgument, "index over empty row list");
    if (dist_.tag == DistanceKind::Tag::euclidean && !data.all_continuous())
        throw Error(ErrorCode::DistanceMismatch,
                    "euclidean distance requested but nominal columns are present");
}

std::vector<Neighbor> NeighborIndex::scan(std::span<const double> query, std::size_t k,
                                          std::optional<std::size_t> exclude) const {
    std::size_t available = rows_.size();
    if (exclude && std::find(rows_.begin(), rows_.end(), *exclude) != rows_.end()) --available;
    if (k < 1 || k > available)
        throw Error(ErrorCode::InvalidArgument,
                    "knn: k=" + std::to_string(k) + " exceeds available candidates (" +
                        std::to_string(available) + ")");

    // Bounded worst-first heap over (squared distance, row index).
    using Entry = std::pair<double, std::size_t>;
    std::vector<Entry> heap;
    heap.reserve(k + 1);
    auto worse = [](const Entry& a, const Entry& b) { return a < b; };  // max-heap
    for (std::size_t r : rows_) {
        if (exclude && r == *exclude) continue;
        double d2 = squared_distance(query, data_->row(r), data_->column_kinds, dist_);
        Entry e{d2, r};
        if (heap.size() < k) {
            heap.push_back(e);
            std::push_heap(heap.begin(), heap.end(), worse);
        } else if (e < heap.front()) {
            std::pop_heap(heap.begin(), heap.end(), worse);
            heap.back() = e;
            std::push_heap(heap.begin(), heap.end(), worse);
        }
    }
    std::sort(heap.begin(), heap.end());
    std::vector<Neighbor> out;
    out.reserve(heap.size());
    for (const auto& [d2, r] : heap) out.push_back({r, std::sqrt(d2)});
    return out;
}

std::vector<Neighbor> NeighborIndex::knn(std::span<const double> query, std::size_t k) const {
    if (query.size() != data_->n_cols)
        throw Error(ErrorCode::InvalidArgument, "knn: query width mismatch");
    return scan(query, k, std::nullopt);
}

std::vector<Neighbor> NeighborIndex::knn_row(std::size_t dataset_row, std::size_t k) const {
    if (dataset_row >= data_->n_rows)
        throw Error(ErrorCode::InvalidArgument, "knn_row: row out of range");
    return scan(data_->row(dataset_row), k, dataset_row);
}

NeighborIndex build_index(const Dataset& data, std::span<const std::size_t> rows,
                          DistanceKind dist, std::optional<int> class_filter) {
    std::vector<std::size_t> kept;
    kept.reserve(rows.size());
    for (std::size_t r : rows) {
        if (r >= data.n_rows)
            throw Error(ErrorCode::InvalidArgument, "build_index: row out of range");
        if (!class_filter || data.labels[r] == *class_filter) kept.push_back(r);
    }
    return NeighborIndex(data, std::move(kept), dist);
}

std::vector<std::vector<Neighbor>> knn_batch(const NeighborIndex& index,
                                             std::span<const std::size_t> query_rows,
                                             std::size_t k) {
    std::vector<std::vector<Neighbor>> out(query_rows.size());
    const auto n = static_cast<std::ptrdiff_t>(query_rows.size());
    std::exception_ptr failure;  // exceptions must not unwind out of the omp region
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] =
                index.knn_row(query_rows[static_cast<std::size_t>(i)], k);
        } catch (...) {
#pragma omp critical(rebalance_knn_batch)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace rebalance
