#include "rebalance/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rebalance/apportion.hpp"
#include "rebalance/error.hpp"
#include "rebalance/neighbors.hpp"
#include "rebalance/rng.hpp"

namespace rebalance {

ClassCounts count_classes(const Dataset& data) {
    ClassCounts c;
    for (int y : data.labels) (y == 1 ? c.positives : c.negatives)++;
    return c;
}

namespace {

// Copies the training rows and works out how many minority synthetics a
// target ratio asks for.
struct OversampleSetup {
    Dataset out;
    std::vector<std::size_t> minority;  // out-row indices, label 1
    std::size_t majority_count = 0;
    std::size_t needed = 0;
};

OversampleSetup prepare(const Dataset& data, std::span<const std::size_t> train_rows,
                        double target_ratio, const char* op) {
    if (train_rows.empty())
        throw Error(ErrorCode::InvalidArgument, std::string(op) + ": empty train_rows");
    if (!(target_ratio > 0.0 && target_ratio <= 1.0))
        throw Error(ErrorCode::InvalidArgument, std::string(op) + ": target_ratio outside (0,1]");
    OversampleSetup s;
    s.out = data.subset(train_rows);
    s.minority = s.out.rows_with_label(1);
    s.majority_count = s.out.n_rows - s.minority.size();
    if (s.minority.size() < 2)
        throw Error(ErrorCode::InvalidArgument,
                    std::string(op) + ": minority class needs at least 2 rows");
    auto target =
        static_cast<long long>(std::llround(target_ratio * static_cast<double>(s.majority_count)));
    long long gap = target - static_cast<long long>(s.minority.size());
    s.needed = gap > 0 ? static_cast<std::size_t>(gap) : 0;
    return s;
}

ResampleResult finish(OversampleSetup&& s, std::vector<SyntheticRecord>&& provenance,
                      std::vector<std::string>&& warnings) {
    ResampleResult r;
    r.data = std::move(s.out);
    r.provenance = std::move(provenance);
    r.warnings = std::move(warnings);
    r.kept_rows.resize(r.data.n_rows);
    std::iota(r.kept_rows.begin(), r.kept_rows.end(), std::size_t{0});
    r.clean.before = r.clean.after = count_classes(r.data);
    return r;
}

std::size_t clamp_neighbors(std::size_t k, std::size_t available, const char* what,
                            std::vector<std::string>& warnings) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": k must be >= 1");
    if (k <= available) return k;
    warnings.push_back(std::string(what) + " neighbor count clamped from " + std::to_string(k) +
                       " to " + std::to_string(available));
    return available;
}

std::vector<double> interpolate(std::span<const double> source, std::span<const double> neighbor,
                                double delta) {
    std::vector<double> row(source.size());
    for (std::size_t c = 0; c < source.size(); ++c)
        row[c] = source[c] + delta * (neighbor[c] - source[c]);
    return row;
}

// Majority members among the m nearest neighbors of `row` over the whole
// training set, self excluded.
std::size_t majority_neighbor_count(const NeighborIndex& whole, const Dataset& data,
                                    std::size_t row, std::size_t m) {
    std::size_t c = 0;
    for (const auto& nb : whole.knn_row(row, m))
        if (data.labels[nb.row] == 0) ++c;
    return c;
}

}  // namespace

ResampleResult smote(const Dataset& data, std::span<const std::size_t> train_rows,
                     const SmoteConfig& cfg) {
    auto s = prepare(data, train_rows, cfg.target_ratio, "smote");
    std::vector<std::string> warnings;
    std::vector<SyntheticRecord> provenance;
    if (s.needed == 0) return finish(std::move(s), std::move(provenance), std::move(warnings));

    std::size_t k = clamp_neighbors(cfg.k, s.minority.size() - 1, "smote", warnings);
    auto index = build_index(s.out, s.minority, DistanceKind::euclid());
    auto neighborhoods = knn_batch(index, s.minority, k);

    Rng rng = Rng::derive(cfg.seed, "smote");
    for (std::size_t t = 0; t < s.needed; ++t) {
        std::size_t src_pos = t % s.minority.size();
        std::size_t src = s.minority[src_pos];
        const auto& nbs = neighborhoods[src_pos];
        std::size_t nb = nbs[rng.uniform_index(k)].row;
        double delta = rng.uniform();
        auto row = interpolate(s.out.row(src), s.out.row(nb), delta);
        provenance.push_back({s.out.n_rows, "smote", src, nb, delta});
        s.out.push_row(row, 1, RowProvenance::synthetic);
    }
    return finish(std::move(s), std::move(provenance), std::move(warnings));
}

ResampleResult smote_nc(const Dataset& data, std::span<const std::size_t> train_rows,
                        const SmoteConfig& cfg) {
    bool any_continuous = std::any_of(data.column_kinds.begin(), data.column_kinds.end(),
                                      [](ColumnKind k) { return k == ColumnKind::continuous; });
    if (!any_continuous)
        throw Error(ErrorCode::AllNominal, "smote_nc: dataset has no continuous columns");

    auto s = prepare(data, train_rows, cfg.target_ratio, "smote_nc");
    std::vector<std::string> warnings;
    std::vector<SyntheticRecord> provenance;
    if (s.needed == 0) return finish(std::move(s), std::move(provenance), std::move(warnings));

    std::size_t k = clamp_neighbors(cfg.k, s.minority.size() - 1, "smote_nc", warnings);
    auto dist = default_distance(s.out, s.out.all_rows());
    auto index = build_index(s.out, s.minority, dist);
    auto neighborhoods = knn_batch(index, s.minority, k);

    Rng rng = Rng::derive(cfg.seed, "smote_nc");
    for (std::size_t t = 0; t < s.needed; ++t) {
        std::size_t src_pos = t % s.minority.size();
        std::size_t src = s.minority[src_pos];
        const auto& nbs = neighborhoods[src_pos];
        std::size_t nb = nbs[rng.uniform_index(k)].row;
        double delta = rng.uniform();
        auto row = interpolate(s.out.row(src), s.out.row(nb), delta);
        // Nominal coordinates: modal value over the k neighbors; on a tie
        // the value of the nearest neighbor carrying a tied value wins.
        for (std::size_t c = 0; c < s.out.n_cols; ++c) {
            if (s.out.column_kinds[c] != ColumnKind::nominal) continue;
            std::map<double, std::size_t> counts;
            for (std::size_t i = 0; i < k; ++i) counts[s.out.at(nbs[i].row, c)]++;
            std::size_t best = 0;
            for (const auto& [value, count] : counts) best = std::max(best, count);
            double chosen = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                double v = s.out.at(nbs[i].row, c);
                if (counts[v] == best) {
                    chosen = v;
                    break;
                }
            }
            row[c] = chosen;
        }
        provenance.push_back({s.out.n_rows, "smote_nc", src, nb, delta});
        s.out.push_row(row, 1, RowProvenance::synthetic);
    }
    return finish(std::move(s), std::move(provenance), std::move(warnings));
}

ResampleResult borderline_smote(const Dataset& data, std::span<const std::size_t> train_rows,
                                const BorderlineConfig& cfg) {
    if (cfg.m < 2) throw Error(ErrorCode::InvalidArgument, "borderline_smote: m must be >= 2");
    auto s = prepare(data, train_rows, cfg.target_ratio, "borderline_smote");
    std::vector<std::string> warnings;
    std::vector<SyntheticRecord> provenance;
    if (s.needed == 0) return finish(std::move(s), std::move(provenance), std::move(warnings));

    std::size_t m = clamp_neighbors(cfg.m, s.out.n_rows - 1, "borderline_smote danger-test",
                                    warnings);
    auto whole = build_index(s.out, s.out.all_rows(), DistanceKind::euclid());

    // Danger set: minority rows whose m-neighborhood is majority-dominated
    // but not fully majority (fully majority is treated as noise).
    std::vector<std::size_t> sources;
    for (std::size_t row : s.minority) {
        std::size_t c = majority_neighbor_count(whole, s.out, row, m);
        if (2 * c >= m && c < m) sources.push_back(row);
    }
    if (sources.empty()) {
        warnings.push_back("borderline_smote: danger set empty, falling back to plain SMOTE");
        sources = s.minority;
    }

    std::size_t k = clamp_neighbors(cfg.k, s.minority.size() - 1, "borderline_smote", warnings);
    auto min_index = build_index(s.out, s.minority, DistanceKind::euclid());
    auto neighborhoods = knn_batch(min_index, sources, k);

    Rng rng = Rng::derive(cfg.seed, "borderline_smote");
    for (std::size_t t = 0; t < s.needed; ++t) {
        std::size_t pos = t % sources.size();
        std::size_t src = sources[pos];
        std::size_t nb = neighborhoods[pos][rng.uniform_index(k)].row;
        double delta = rng.uniform();
        auto row = interpolate(s.out.row(src), s.out.row(nb), delta);
        provenance.push_back({s.out.n_rows, "borderline_smote", src, nb, delta});
        s.out.push_row(row, 1, RowProvenance::synthetic);
    }
    return finish(std::move(s), std::move(provenance), std::move(warnings));
}

double LinearSvm::margin(std::span<const double> x, int label) const {
    double score = bias;
    for (std::size_t c = 0; c < weights.size(); ++c) score += weights[c] * x[c];
    return (label == 1 ? 1.0 : -1.0) * score;
}

LinearSvm train_linear_svm(const Dataset& data, std::span<const std::size_t> rows,
                           double regularization, std::size_t epochs) {
    if (!(regularization > 0.0))
        throw Error(ErrorCode::InvalidArgument, "svm: regularization must be > 0");
    if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "svm: epochs must be >= 1");
    if (!data.all_continuous())
        throw Error(ErrorCode::DistanceMismatch, "svm: nominal columns are not supported");

    const std::size_t d = data.n_cols;
    const auto n = static_cast<double>(rows.size());
    const double lambda = 1.0 / (regularization * n);

    LinearSvm svm;
    svm.weights.assign(d, 0.0);
    std::vector<double> acc(d);
    for (std::size_t t = 1; t <= epochs; ++t) {
        std::fill(acc.begin(), acc.end(), 0.0);
        double acc_b = 0.0;
        for (std::size_t r : rows) {
            int y = data.labels[r] == 1 ? 1 : -1;
            if (svm.margin(data.row(r), data.labels[r]) >= 1.0) continue;
            auto x = data.row(r);
            for (std::size_t c = 0; c < d; ++c) acc[c] += y * x[c];
            acc_b += y;
        }
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double keep = 1.0 - eta * lambda;
        for (std::size_t c = 0; c < d; ++c) svm.weights[c] = keep * svm.weights[c] + eta / n * acc[c];
        svm.bias = keep * svm.bias + eta / n * acc_b;
    }
    for (double w : svm.weights)
        if (!std::isfinite(w)) throw Error(ErrorCode::SvmDiverged, "non-finite SVM weights");
    if (!std::isfinite(svm.bias)) throw Error(ErrorCode::SvmDiverged, "non-finite SVM bias");
    return svm;
}

ResampleResult svm_smote(const Dataset& data, std::span<const std::size_t> train_rows,
                         const SvmSmoteConfig& cfg) {
    auto s = prepare(data, train_rows, cfg.target_ratio, "svm_smote");
    if (s.out.n_rows - s.minority.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "svm_smote: both classes need at least 2 rows");
    std::vector<std::string> warnings;
    std::vector<SyntheticRecord> provenance;
    if (s.needed == 0) return finish(std::move(s), std::move(provenance), std::move(warnings));

    auto svm = train_linear_svm(s.out, s.out.all_rows(), cfg.svm_regularization, cfg.svm_epochs);

    // Sources are the minority rows on or inside the margin.
    std::vector<std::size_t> sources;
    for (std::size_t row : s.minority)
        if (svm.margin(s.out.row(row), 1) <= 1.0) sources.push_back(row);
    if (sources.empty()) {
        warnings.push_back("svm_smote: no minority support vectors, falling back to plain SMOTE");
        sources = s.minority;
    }

    std::size_t m = clamp_neighbors(cfg.m, s.out.n_rows - 1, "svm_smote density-test", warnings);
    auto whole = build_index(s.out, s.out.all_rows(), DistanceKind::euclid());
    std::vector<bool> extrapolate(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        std::size_t c = majority_neighbor_count(whole, s.out, sources[i], m);
        extrapolate[i] = 2 * c < m;  // sparse majority around the vector: push outward
    }

    std::size_t k = clamp_neighbors(cfg.k, s.minority.size() - 1, "svm_smote", warnings);
    auto min_index = build_index(s.out, s.minority, DistanceKind::euclid());
    auto neighborhoods = knn_batch(min_index, sources, k);

    Rng rng = Rng::derive(cfg.seed, "svm_smote");
    for (std::size_t t = 0; t < s.needed; ++t) {
        std::size_t pos = t % sources.size();
        std::size_t src = sources[pos];
        std::size_t nb = neighborhoods[pos][rng.uniform_index(k)].row;
        double delta = rng.uniform();
        double coeff = extrapolate[pos] ? -delta : delta;
        auto row = interpolate(s.out.row(src), s.out.row(nb), coeff);
        provenance.push_back({s.out.n_rows, "svm_smote", src, nb, coeff});
        s.out.push_row(row, 1, RowProvenance::synthetic);
    }
    return finish(std::move(s), std::move(provenance), std::move(warnings));
}

ResampleResult adasyn(const Dataset& data, std::span<const std::size_t> train_rows,
                      const AdasynConfig& cfg) {
    if (!(cfg.beta > 0.0 && cfg.beta <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "adasyn: beta outside (0,1]");
    auto s = prepare(data, train_rows, 1.0, "adasyn");
    std::vector<std::string> warnings;
    std::vector<SyntheticRecord> provenance;

    long long gap = static_cast<long long>(s.majority_count) -
                    static_cast<long long>(s.minority.size());
    auto total = static_cast<std::size_t>(
        std::max<long long>(0, std::llround(cfg.beta * static_cast<double>(gap))));
    if (total == 0) return finish(std::move(s), std::move(provenance), std::move(warnings));

    // Learning-difficulty weights: the share of majority members among
    // each minority row's k nearest neighbors over the whole set.
    std::size_t k_all = clamp_neighbors(cfg.k, s.out.n_rows - 1, "adasyn difficulty", warnings);
    auto whole = build_index(s.out, s.out.all_rows(), DistanceKind::euclid());
    std::vector<double> ratios(s.minority.size());
    double ratio_sum = 0.0;
    for (std::size_t i = 0; i < s.minority.size(); ++i) {
        auto delta_i = majority_neighbor_count(whole, s.out, s.minority[i], k_all);
        ratios[i] = static_cast<double>(delta_i) / static_cast<double>(k_all);
        ratio_sum += ratios[i];
    }

    std::vector<double> quotas(s.minority.size());
    if (ratio_sum == 0.0) {
        warnings.push_back("adasyn: no minority row has majority neighbors, allocating uniformly");
        for (auto& q : quotas) q = static_cast<double>(total) / static_cast<double>(quotas.size());
    } else {
        for (std::size_t i = 0; i < quotas.size(); ++i)
            quotas[i] = ratios[i] / ratio_sum * static_cast<double>(total);
    }
    auto allocation = apportion(quotas, total);

    std::size_t k = clamp_neighbors(cfg.k, s.minority.size() - 1, "adasyn", warnings);
    auto min_index = build_index(s.out, s.minority, DistanceKind::euclid());
    auto neighborhoods = knn_batch(min_index, s.minority, k);

    Rng rng = Rng::derive(cfg.seed, "adasyn");
    for (std::size_t i = 0; i < s.minority.size(); ++i) {
        std::size_t src = s.minority[i];
        for (std::size_t g = 0; g < allocation[i]; ++g) {
            std::size_t nb = neighborhoods[i][rng.uniform_index(k)].row;
            double delta = rng.uniform();
            auto row = interpolate(s.out.row(src), s.out.row(nb), delta);
            provenance.push_back({s.out.n_rows, "adasyn", src, nb, delta});
            s.out.push_row(row, 1, RowProvenance::synthetic);
        }
    }
    return finish(std::move(s), std::move(provenance), std::move(warnings));
}

std::vector<double> mixup_pair(std::span<const double> a, std::span<const double> b,
                               double lambda) {
    if (a.size() != b.size())
        throw Error(ErrorCode::InvalidArgument, "mixup_pair: dimension mismatch");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "mixup_pair: lambda outside [0,1]");
    std::vector<double> out(a.size());
    for (std::size_t c = 0; c < a.size(); ++c) out[c] = lambda * a[c] + (1.0 - lambda) * b[c];
    return out;
}

ResampleResult mixup_augment_per_class(const Dataset& data, std::span<const std::size_t> rows,
                                       const MixupConfig& cfg,
                                       std::array<std::size_t, 2> counts) {
    if (!(cfg.alpha > 0.0))
        throw Error(ErrorCode::InvalidArgument, "mixup_augment: alpha must be > 0");
    if (!cfg.same_class_only)
        throw Error(ErrorCode::InvalidArgument, "mixup_augment: only same-class mode exists");
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "mixup_augment: empty row list");
    if (!data.all_continuous())
        throw Error(ErrorCode::InvalidArgument,
                    "mixup_augment: nominal columns cannot be convexly combined");

    ResampleResult r;
    r.data = data.subset(rows);
    std::array<std::vector<std::size_t>, 2> members = {r.data.rows_with_label(0),
                                                       r.data.rows_with_label(1)};
    for (int label = 0; label < 2; ++label)
        if (counts[static_cast<std::size_t>(label)] > 0 && members[label].size() < 2)
            throw Error(ErrorCode::InvalidArgument,
                        "mixup_augment: class " + std::to_string(label) + " has fewer than 2 rows");

    Rng rng = Rng::derive(cfg.seed, "mixup");
    for (int label = 0; label < 2; ++label) {
        const auto& pool = members[label];
        for (std::size_t t = 0; t < counts[static_cast<std::size_t>(label)]; ++t) {
            std::size_t i = rng.uniform_index(pool.size());
            std::size_t j = rng.uniform_index(pool.size() - 1);
            if (j >= i) ++j;  // distinct partner
            double lambda = rng.beta(cfg.alpha, cfg.alpha);
            auto row = mixup_pair(r.data.row(pool[i]), r.data.row(pool[j]), lambda);
            r.provenance.push_back({r.data.n_rows, "mixup", pool[i], pool[j], lambda});
            r.data.push_row(row, label, RowProvenance::synthetic);
        }
    }
    r.kept_rows.resize(r.data.n_rows);
    std::iota(r.kept_rows.begin(), r.kept_rows.end(), std::size_t{0});
    r.clean.before = r.clean.after = count_classes(r.data);
    return r;
}

ResampleResult mixup_augment(const Dataset& data, std::span<const std::size_t> rows,
                             const MixupConfig& cfg) {
    std::array<std::size_t, 2> counts{};
    std::array<std::size_t, 2> sizes{};
    for (std::size_t r : rows) sizes[static_cast<std::size_t>(data.labels[r])]++;
    for (int label = 0; label < 2; ++label) {
        const auto pool = sizes[static_cast<std::size_t>(label)];
        if (pool == 0) {
            counts[static_cast<std::size_t>(label)] = 0;
            continue;
        }
        if (pool < 2)
            throw Error(ErrorCode::InvalidArgument,
                        "mixup_augment: class " + std::to_string(label) + " has fewer than 2 rows");
        counts[static_cast<std::size_t>(label)] = cfg.pairs_per_class.value_or(pool);
    }
    return mixup_augment_per_class(data, rows, cfg, counts);
}

}  // namespace rebalance
