#include "rebalance/reference.hpp"

#include <algorithm>
#include <cmath>

#include "rebalance/error.hpp"

namespace rebalance::reference {

namespace {

double distance(const Dataset& data, std::span<const double> a, std::span<const double> b,
                const DistanceKind& dist) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        if (dist.tag == DistanceKind::Tag::heterogeneous &&
            data.column_kinds[c] == ColumnKind::nominal) {
            if (a[c] != b[c]) d2 += dist.nominal_penalty * dist.nominal_penalty;
        } else {
            d2 += (a[c] - b[c]) * (a[c] - b[c]);
        }
    }
    return std::sqrt(d2);
}

}  // namespace

std::vector<Neighbor> knn_scan(const Dataset& data, std::span<const std::size_t> rows,
                               const DistanceKind& dist, std::span<const double> query,
                               std::size_t k, std::ptrdiff_t exclude_row) {
    std::vector<Neighbor> all;
    for (std::size_t r : rows) {
        if (exclude_row >= 0 && r == static_cast<std::size_t>(exclude_row)) continue;
        all.push_back({r, distance(data, query, data.row(r), dist)});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.row < b.row;
    });
    if (k > all.size())
        throw Error(ErrorCode::InvalidArgument, "reference knn: k exceeds candidates");
    all.resize(k);
    return all;
}

std::vector<std::size_t> enn_deletions(const Dataset& data, std::span<const std::size_t> rows,
                                       const DistanceKind& dist) {
    std::vector<std::size_t> deleted;
    for (std::size_t r : rows) {
        auto nbs = knn_scan(data, rows, dist, data.row(r), 3, static_cast<std::ptrdiff_t>(r));
        int votes = 0;
        for (const auto& nb : nbs) votes += data.labels[nb.row];
        int verdict = votes >= 2 ? 1 : 0;
        if (verdict != data.labels[r]) deleted.push_back(r);
    }
    return deleted;
}

std::vector<CrossPair> tomek_links(const Dataset& data, std::span<const std::size_t> rows,
                                   const DistanceKind& dist) {
    std::vector<CrossPair> links;
    for (std::size_t i : rows) {
        if (data.labels[i] != 1) continue;
        for (std::size_t j : rows) {
            if (data.labels[j] != 0) continue;
            double dij = distance(data, data.row(i), data.row(j), dist);
            bool blocked = false;
            for (std::size_t x : rows) {
                if (x == i || x == j) continue;
                if (distance(data, data.row(i), data.row(x), dist) < dij ||
                    distance(data, data.row(j), data.row(x), dist) < dij) {
                    blocked = true;
                    break;
                }
            }
            if (!blocked) links.push_back({i, j});
        }
    }
    return links;
}

double auc_pair_count(std::span<const int> labels, std::span<const double> scores) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    if (pairs == 0)
        throw Error(ErrorCode::UndefinedAuc, "pair counting needs both classes");
    return wins / static_cast<double>(pairs);
}

GrayImage median_filter(const GrayImage& img, std::size_t window) {
    GrayImage out = img;
    const auto half = static_cast<std::ptrdiff_t>(window / 2);
    const auto w = static_cast<std::ptrdiff_t>(img.width);
    const auto h = static_cast<std::ptrdiff_t>(img.height);
    std::vector<std::uint16_t> patch;
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            patch.clear();
            for (std::ptrdiff_t dy = -half; dy <= half; ++dy) {
                for (std::ptrdiff_t dx = -half; dx <= half; ++dx) {
                    auto sx = std::clamp<std::ptrdiff_t>(x + dx, 0, w - 1);
                    auto sy = std::clamp<std::ptrdiff_t>(y + dy, 0, h - 1);
                    patch.push_back(img.at(static_cast<std::size_t>(sx),
                                           static_cast<std::size_t>(sy)));
                }
            }
            std::sort(patch.begin(), patch.end());
            out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
                patch[patch.size() / 2];
        }
    }
    return out;
}

Glcm glcm(const GrayImage& img, std::size_t levels, int dx, int dy, const PixelMask* mask) {
    Glcm g;
    g.levels = levels;
    g.dx = dx;
    g.dy = dy;
    g.p.assign(levels * levels, 0.0);
    const auto w = static_cast<std::ptrdiff_t>(img.width);
    const auto h = static_cast<std::ptrdiff_t>(img.height);
    const std::size_t range = std::size_t{1} << img.bit_depth;
    double pairs = 0.0;
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            std::ptrdiff_t x2 = x + dx, y2 = y + dy;
            if (x2 < 0 || x2 >= w || y2 < 0 || y2 >= h) continue;
            auto i1 = static_cast<std::size_t>(y) * img.width + static_cast<std::size_t>(x);
            auto i2 = static_cast<std::size_t>(y2) * img.width + static_cast<std::size_t>(x2);
            if (mask && (!(*mask)[i1] || !(*mask)[i2])) continue;
            auto a = static_cast<std::size_t>(static_cast<std::uint64_t>(img.pixels[i1]) * levels /
                                              range);
            auto b = static_cast<std::size_t>(static_cast<std::uint64_t>(img.pixels[i2]) * levels /
                                              range);
            g.p[a * levels + b] += 1.0;
            g.p[b * levels + a] += 1.0;
            pairs += 2.0;
        }
    }
    if (pairs == 0.0) throw Error(ErrorCode::InvalidArgument, "reference glcm: no pairs");
    for (auto& v : g.p) v /= pairs;
    g.normalized = true;
    return g;
}

}  // namespace rebalance::reference
