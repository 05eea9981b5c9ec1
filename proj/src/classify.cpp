#include "rebalance/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rebalance/error.hpp"
#include "rebalance/metrics.hpp"
#include "rebalance/neighbors.hpp"
#include "rebalance/rng.hpp"

namespace rebalance {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// Dense lower Cholesky; returns false on a non-positive pivot.
bool cholesky(std::vector<double>& a, std::size_t d) {
    for (std::size_t j = 0; j < d; ++j) {
        double diag = a[j * d + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
        if (!(diag > 0.0)) return false;
        double root = std::sqrt(diag);
        a[j * d + j] = root;
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * d + k] * a[j * d + k];
            a[i * d + j] = v / root;
        }
        for (std::size_t k = j + 1; k < d; ++k) a[j * d + k] = 0.0;
    }
    return true;
}

// Solves L z = v in place of v.
void forward_solve(const std::vector<double>& chol, std::size_t d, std::vector<double>& v) {
    for (std::size_t i = 0; i < d; ++i) {
        double s = v[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol[i * d + k] * v[k];
        v[i] = s / chol[i * d + i];
    }
}

// Solves L^T w = v in place of v.
void backward_solve(const std::vector<double>& chol, std::size_t d, std::vector<double>& v) {
    for (std::size_t i = d; i-- > 0;) {
        double s = v[i];
        for (std::size_t k = i + 1; k < d; ++k) s -= chol[k * d + i] * v[k];
        v[i] = s / chol[i * d + i];
    }
}

struct KnnModel {
    Dataset train;
    DistanceKind dist;
    std::size_t k;
};

struct GaussianClass {
    std::vector<double> mean;
    std::vector<double> chol;  // lower Cholesky of the covariance
    double log_det = 0.0;
    double log_prior = 0.0;
};

struct GaussianModel {
    std::array<GaussianClass, 2> cls;
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
};

struct TreeNode {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double p = 0.5;
};

struct ExtraTreesModel {
    std::vector<std::vector<TreeNode>> trees;
};

struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    int polarity = 1;  // +1: predict positive when x >= threshold
    double alpha = 0.0;
};

struct AdaBoostModel {
    std::vector<Stump> stumps;
};

}  // namespace

struct TrainedModel::Impl {
    std::variant<KnnModel, GaussianModel, LogisticModel, ExtraTreesModel, AdaBoostModel> model;
};

namespace {

// --- k-NN ------------------------------------------------------------------

KnnModel fit_knn(const KnnConfig& cfg, const Dataset& data, std::span<const std::size_t> rows) {
    if (cfg.k < 1) throw Error(ErrorCode::InvalidArgument, "knn: k must be >= 1");
    KnnModel m;
    m.train = data.subset(rows);
    m.dist = default_distance(m.train, m.train.all_rows());
    m.k = std::min(cfg.k, m.train.n_rows);
    return m;
}

double predict_knn(const KnnModel& m, std::span<const double> x) {
    auto index = NeighborIndex(m.train, m.train.all_rows(), m.dist);
    auto nbs = index.knn(x, m.k);
    double votes = 0.0;
    for (const auto& nb : nbs) votes += m.train.labels[nb.row];
    return votes / static_cast<double>(m.k);
}

// --- LDA / QDA ---------------------------------------------------------------

GaussianModel fit_gaussian(const Dataset& data, std::span<const std::size_t> rows,
                           bool pooled_covariance, double ridge_scale, double shrinkage) {
    const std::size_t d = data.n_cols;
    std::array<std::vector<std::size_t>, 2> members;
    for (std::size_t r : rows) members[static_cast<std::size_t>(data.labels[r])].push_back(r);

    GaussianModel model;
    std::array<std::vector<double>, 2> scatter;  // per-class centered scatter
    for (int c = 0; c < 2; ++c) {
        const auto& rs = members[static_cast<std::size_t>(c)];
        auto& cls = model.cls[static_cast<std::size_t>(c)];
        cls.mean.assign(d, 0.0);
        for (std::size_t r : rs)
            for (std::size_t j = 0; j < d; ++j) cls.mean[j] += data.at(r, j);
        for (auto& v : cls.mean) v /= static_cast<double>(rs.size());
        cls.log_prior = std::log(static_cast<double>(rs.size()) /
                                 static_cast<double>(rows.size()));

        auto& s = scatter[static_cast<std::size_t>(c)];
        s.assign(d * d, 0.0);
        std::vector<double> centered(d);
        for (std::size_t r : rs) {
            for (std::size_t j = 0; j < d; ++j) centered[j] = data.at(r, j) - cls.mean[j];
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j <= i; ++j) s[i * d + j] += centered[i] * centered[j];
        }
    }

    std::vector<double> pooled(d * d, 0.0);
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < d * d; ++i) pooled[i] += scatter[static_cast<std::size_t>(c)][i];
    for (auto& v : pooled) v /= static_cast<double>(rows.size());

    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += pooled[i * d + i];
    double ridge = ridge_scale * trace / static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) pooled[i * d + i] += ridge;

    for (int c = 0; c < 2; ++c) {
        auto& cls = model.cls[static_cast<std::size_t>(c)];
        std::vector<double> cov(d * d, 0.0);
        if (pooled_covariance) {
            cov = pooled;
        } else {
            const auto n_c = static_cast<double>(members[static_cast<std::size_t>(c)].size());
            for (std::size_t i = 0; i < d * d; ++i)
                cov[i] = (1.0 - shrinkage) * scatter[static_cast<std::size_t>(c)][i] / n_c +
                         shrinkage * pooled[i];
        }
        // Mirror the lower triangle before factorization.
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) cov[i * d + j] = cov[j * d + i];
        if (!cholesky(cov, d))
            throw Error(ErrorCode::IllConditioned, "covariance is singular despite regularization");
        cls.chol = std::move(cov);
        cls.log_det = 0.0;
        for (std::size_t i = 0; i < d; ++i) cls.log_det += 2.0 * std::log(cls.chol[i * d + i]);
    }
    return model;
}

double gaussian_log_likelihood(const GaussianClass& cls, std::span<const double> x) {
    const std::size_t d = cls.mean.size();
    std::vector<double> v(d);
    for (std::size_t j = 0; j < d; ++j) v[j] = x[j] - cls.mean[j];
    forward_solve(cls.chol, d, v);
    double quad = 0.0;
    for (double z : v) quad += z * z;
    return -0.5 * quad - 0.5 * cls.log_det + cls.log_prior;
}

double predict_gaussian(const GaussianModel& m, std::span<const double> x) {
    double ll1 = gaussian_log_likelihood(m.cls[1], x);
    double ll0 = gaussian_log_likelihood(m.cls[0], x);
    return sigmoid(ll1 - ll0);
}

// --- Logistic regression -----------------------------------------------------

LogisticModel fit_logistic(const LogisticConfig& cfg, const Dataset& data,
                           std::span<const std::size_t> rows) {
    if (cfg.epochs < 1 || !(cfg.rate > 0.0) || cfg.l2 < 0.0)
        throw Error(ErrorCode::InvalidArgument, "logistic: bad hyperparameters");
    const std::size_t d = data.n_cols;
    LogisticModel m;
    m.weights.assign(d, 0.0);
    std::vector<double> grad(d);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double grad_b = 0.0;
        logistic_gradient(data, rows, m.weights, m.bias, cfg.l2, grad, grad_b);
        for (std::size_t j = 0; j < d; ++j) m.weights[j] -= cfg.rate * grad[j];
        m.bias -= cfg.rate * grad_b;
    }
    for (double w : m.weights)
        if (!std::isfinite(w)) throw Error(ErrorCode::Diverged, "logistic: non-finite weights");
    if (!std::isfinite(m.bias)) throw Error(ErrorCode::Diverged, "logistic: non-finite bias");
    return m;
}

double predict_logistic(const LogisticModel& m, std::span<const double> x) {
    double z = m.bias;
    for (std::size_t j = 0; j < m.weights.size(); ++j) z += m.weights[j] * x[j];
    return sigmoid(z);
}

// --- Extra trees --------------------------------------------------------------

double gini(double pos, double total) {
    if (total <= 0.0) return 0.0;
    double p = pos / total;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct TreeBuilder {
    const Dataset& data;
    const ExtraTreesConfig& cfg;
    std::size_t n_candidates;
    Rng rng;
    std::vector<TreeNode> nodes;

    std::int32_t build(std::vector<std::size_t>& rows, std::size_t depth) {
        double pos = 0.0;
        for (std::size_t r : rows) pos += data.labels[r];
        const auto n = static_cast<double>(rows.size());

        auto make_leaf = [&] {
            TreeNode leaf;
            leaf.leaf = true;
            leaf.p = pos / n;
            nodes.push_back(leaf);
            return static_cast<std::int32_t>(nodes.size() - 1);
        };
        if (depth >= cfg.max_depth || rows.size() < 2 * cfg.min_leaf || pos == 0.0 || pos == n)
            return make_leaf();

        // Random feature subset, one uniform threshold per feature, best
        // Gini reduction wins.
        std::vector<std::size_t> features(data.n_cols);
        std::iota(features.begin(), features.end(), std::size_t{0});
        for (std::size_t i = 0; i < n_candidates; ++i) {
            std::size_t j = i + rng.uniform_index(features.size() - i);
            std::swap(features[i], features[j]);
        }

        double best_gain = -1.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        const double parent = gini(pos, n);
        for (std::size_t i = 0; i < n_candidates; ++i) {
            std::size_t f = features[i];
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (std::size_t r : rows) {
                lo = std::min(lo, data.at(r, f));
                hi = std::max(hi, data.at(r, f));
            }
            if (!(hi > lo)) continue;
            double thr = rng.uniform(lo, hi);
            double left_n = 0.0, left_pos = 0.0;
            for (std::size_t r : rows) {
                if (data.at(r, f) < thr) {
                    left_n += 1.0;
                    left_pos += data.labels[r];
                }
            }
            double right_n = n - left_n;
            if (left_n < static_cast<double>(cfg.min_leaf) ||
                right_n < static_cast<double>(cfg.min_leaf))
                continue;
            double gain = parent - (left_n / n) * gini(left_pos, left_n) -
                          (right_n / n) * gini(pos - left_pos, right_n);
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = f;
                best_threshold = thr;
            }
        }
        if (best_gain < 0.0) return make_leaf();

        std::vector<std::size_t> left, right;
        for (std::size_t r : rows) {
            (data.at(r, best_feature) < best_threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        TreeNode node;
        node.leaf = false;
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.p = pos / n;
        nodes.push_back(node);
        auto self = static_cast<std::int32_t>(nodes.size() - 1);
        auto l = build(left, depth + 1);
        auto r = build(right, depth + 1);
        nodes[static_cast<std::size_t>(self)].left = l;
        nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }
};

ExtraTreesModel fit_extra_trees(const ExtraTreesConfig& cfg, const Dataset& data,
                                std::span<const std::size_t> rows, std::uint64_t seed) {
    if (cfg.n_trees < 1 || cfg.min_leaf < 1 || cfg.max_depth < 1)
        throw Error(ErrorCode::InvalidArgument, "extra_trees: bad hyperparameters");
    ExtraTreesModel model;
    model.trees.resize(cfg.n_trees);
    auto n_candidates = static_cast<std::size_t>(
        std::max(1.0, std::round(std::sqrt(static_cast<double>(data.n_cols)))));

    std::exception_ptr failure;
    const auto n_trees = static_cast<std::ptrdiff_t>(cfg.n_trees);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
        try {
            TreeBuilder builder{data, cfg, n_candidates,
                                Rng::derive(seed, "tree/" + std::to_string(t)), {}};
            std::vector<std::size_t> node_rows(rows.begin(), rows.end());
            builder.build(node_rows, 0);
            model.trees[static_cast<std::size_t>(t)] = std::move(builder.nodes);
        } catch (...) {
#pragma omp critical(rebalance_trees)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return model;
}

double predict_tree(const std::vector<TreeNode>& tree, std::span<const double> x) {
    std::size_t i = 0;
    for (;;) {
        const TreeNode& node = tree[i];
        if (node.leaf) return node.p;
        i = static_cast<std::size_t>(x[node.feature] < node.threshold ? node.left : node.right);
    }
}

double predict_extra_trees(const ExtraTreesModel& m, std::span<const double> x) {
    double sum = 0.0;
    for (const auto& tree : m.trees) sum += predict_tree(tree, x);
    return sum / static_cast<double>(m.trees.size());
}

// --- AdaBoost over stumps ------------------------------------------------------

int stump_predict(const Stump& s, std::span<const double> x) {
    bool high = x[s.feature] >= s.threshold;
    return (s.polarity == 1) == high ? 1 : -1;
}

AdaBoostModel fit_adaboost(const AdaBoostConfig& cfg, const Dataset& data,
                           std::span<const std::size_t> rows) {
    if (cfg.rounds < 1) throw Error(ErrorCode::InvalidArgument, "adaboost: rounds must be >= 1");
    const std::size_t n = rows.size();
    const std::size_t d = data.n_cols;

    // Per-feature sort order, reused every round.
    std::vector<std::vector<std::size_t>> order(d);
    for (std::size_t f = 0; f < d; ++f) {
        order[f].resize(n);
        std::iota(order[f].begin(), order[f].end(), std::size_t{0});
        std::sort(order[f].begin(), order[f].end(), [&](std::size_t a, std::size_t b) {
            return data.at(rows[a], f) < data.at(rows[b], f);
        });
    }

    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    AdaBoostModel model;
    for (std::size_t round = 0; round < cfg.rounds; ++round) {
        double total_pos = 0.0;  // weight of positive rows
        for (std::size_t i = 0; i < n; ++i)
            if (data.labels[rows[i]] == 1) total_pos += weights[i];

        double best_err = std::numeric_limits<double>::infinity();
        Stump best;
        for (std::size_t f = 0; f < d; ++f) {
            // Sweep cuts; below starts empty (threshold -inf: everything
            // is on the high side).
            double below_pos = 0.0, below_neg = 0.0;
            auto consider = [&](double threshold) {
                // polarity +1: predict 1 when x >= threshold
                double err_plus = below_pos + ((1.0 - total_pos) - below_neg);
                double err_minus = 1.0 - err_plus;
                if (err_plus < best_err) {
                    best_err = err_plus;
                    best = {f, threshold, 1, 0.0};
                }
                if (err_minus < best_err) {
                    best_err = err_minus;
                    best = {f, threshold, -1, 0.0};
                }
            };
            consider(-std::numeric_limits<double>::infinity());
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t idx = order[f][i];
                double v = data.at(rows[idx], f);
                if (data.labels[rows[idx]] == 1)
                    below_pos += weights[idx];
                else
                    below_neg += weights[idx];
                if (i + 1 < n) {
                    double next = data.at(rows[order[f][i + 1]], f);
                    if (next > v) consider(0.5 * (v + next));
                }
            }
        }

        double e = std::clamp(best_err, 1e-12, 1.0 - 1e-12);
        best.alpha = 0.5 * std::log((1.0 - e) / e);
        model.stumps.push_back(best);
        if (best_err <= 1e-12) break;  // perfect stump

        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int y = data.labels[rows[i]] == 1 ? 1 : -1;
            int h = stump_predict(best, data.row(rows[i]));
            weights[i] *= std::exp(-best.alpha * y * h);
            norm += weights[i];
        }
        for (auto& w : weights) w /= norm;
    }
    return model;
}

double predict_adaboost(const AdaBoostModel& m, std::span<const double> x) {
    double score = 0.0;
    for (const auto& s : m.stumps) score += s.alpha * stump_predict(s, x);
    return sigmoid(2.0 * score);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string kind_name(const ClassifierKind& kind) {
    switch (kind.index()) {
        case 0: return "knn";
        case 1: return "lda";
        case 2: return "qda";
        case 3: return "logistic";
        case 4: return "extra_trees";
        case 5: return "adaboost";
    }
    return "?";
}

std::string kind_initials(const ClassifierKind& kind) {
    switch (kind.index()) {
        case 0: return "K";
        case 1: return "Ld";
        case 2: return "Q";
        case 3: return "Lr";
        case 4: return "E";
        case 5: return "A";
    }
    return "?";
}

ClassifierKind kind_from_name(const std::string& name) {
    if (name == "knn") return KnnConfig{};
    if (name == "lda") return LdaConfig{};
    if (name == "qda") return QdaConfig{};
    if (name == "logistic") return LogisticConfig{};
    if (name == "extra_trees") return ExtraTreesConfig{};
    if (name == "adaboost") return AdaBoostConfig{};
    throw Error(ErrorCode::InvalidArgument, "unknown classifier '" + name + "'");
}

double TrainedModel::predict_proba(std::span<const double> x) const {
    if (x.size() != dimension_)
        throw Error(ErrorCode::InvalidArgument, "predict_proba: dimension mismatch");
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KnnModel>) return predict_knn(m, x);
            else if constexpr (std::is_same_v<T, GaussianModel>) return predict_gaussian(m, x);
            else if constexpr (std::is_same_v<T, LogisticModel>) return predict_logistic(m, x);
            else if constexpr (std::is_same_v<T, ExtraTreesModel>)
                return predict_extra_trees(m, x);
            else return predict_adaboost(m, x);
        },
        impl_->model);
}

TrainedModel train(const ClassifierKind& kind, const Dataset& data,
                   std::span<const std::size_t> rows, std::uint64_t seed) {
    if (data.n_cols < 1) throw Error(ErrorCode::InvalidArgument, "train: no features");
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += data.labels[r] == 1;
    if (pos == 0 || pos == rows.size())
        throw Error(ErrorCode::InvalidArgument, "train: both classes required");

    auto impl = std::make_shared<TrainedModel::Impl>();
    std::visit(
        [&](const auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, KnnConfig>)
                impl->model = fit_knn(cfg, data, rows);
            else if constexpr (std::is_same_v<T, LdaConfig>)
                impl->model = fit_gaussian(data, rows, true, cfg.ridge_scale, 0.0);
            else if constexpr (std::is_same_v<T, QdaConfig>)
                impl->model = fit_gaussian(data, rows, false, 1e-6, cfg.shrinkage);
            else if constexpr (std::is_same_v<T, LogisticConfig>)
                impl->model = fit_logistic(cfg, data, rows);
            else if constexpr (std::is_same_v<T, ExtraTreesConfig>)
                impl->model = fit_extra_trees(cfg, data, rows, seed);
            else
                impl->model = fit_adaboost(cfg, data, rows);
        },
        kind);
    return TrainedModel(kind, data.n_cols, std::move(impl));
}

// ---------------------------------------------------------------------------

double logistic_loss(const Dataset& data, std::span<const std::size_t> rows,
                     std::span<const double> weights, double bias, double l2) {
    double loss = 0.0;
    for (std::size_t r : rows) {
        double z = bias;
        auto x = data.row(r);
        for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
        double y = data.labels[r];
        // log(1 + e^-z) variants, numerically safe on both tails
        loss += (z >= 0.0 ? std::log1p(std::exp(-z)) + (1.0 - y) * z
                          : std::log1p(std::exp(z)) - y * z);
    }
    loss /= static_cast<double>(rows.size());
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    return loss + 0.5 * l2 * reg;
}

void logistic_gradient(const Dataset& data, std::span<const std::size_t> rows,
                       std::span<const double> weights, double bias, double l2,
                       std::span<double> grad_weights, double& grad_bias) {
    std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
    grad_bias = 0.0;
    for (std::size_t r : rows) {
        double z = bias;
        auto x = data.row(r);
        for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
        double err = sigmoid(z) - static_cast<double>(data.labels[r]);
        for (std::size_t j = 0; j < weights.size(); ++j) grad_weights[j] += err * x[j];
        grad_bias += err;
    }
    const auto n = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < weights.size(); ++j)
        grad_weights[j] = grad_weights[j] / n + l2 * weights[j];
    grad_bias /= n;
}

std::vector<double> lda_direction(const TrainedModel& model) {
    if (!std::holds_alternative<LdaConfig>(model.kind()))
        throw Error(ErrorCode::InvalidArgument, "lda_direction: not an LDA model");
    const auto& gm = std::get<GaussianModel>(model.impl_->model);
    const std::size_t d = gm.cls[0].mean.size();
    std::vector<double> w(d);
    for (std::size_t j = 0; j < d; ++j) w[j] = gm.cls[1].mean[j] - gm.cls[0].mean[j];
    forward_solve(gm.cls[1].chol, d, w);   // pooled covariance: both classes share it
    backward_solve(gm.cls[1].chol, d, w);  // w = cov^{-1} (mu1 - mu0)
    return w;
}

// ---------------------------------------------------------------------------

std::string Ensemble::code() const {
    std::string out;
    for (const auto& m : members) out += kind_initials(m.kind());
    return out;
}

Ensemble select_top3(const std::vector<TrainedModel>& models, const Dataset& data,
                     std::span<const std::size_t> validation_rows) {
    if (models.size() < 3)
        throw Error(ErrorCode::InvalidArgument, "select_top3: need at least 3 candidates");

    struct Scored {
        double auc;
        double f1;
        std::size_t kind_order;
        std::size_t position;
    };
    std::vector<int> labels;
    labels.reserve(validation_rows.size());
    for (std::size_t r : validation_rows) labels.push_back(data.labels[r]);

    std::vector<Scored> scored(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        std::vector<double> probs;
        std::vector<int> preds;
        probs.reserve(validation_rows.size());
        for (std::size_t r : validation_rows) {
            double p = models[i].predict_proba(data.row(r));
            probs.push_back(p);
            preds.push_back(p >= 0.5 ? 1 : 0);
        }
        scored[i] = {roc_auc(labels, probs).auc, f1_score(confusion(labels, preds)),
                     models[i].kind().index(), i};
    }
    std::vector<std::size_t> rank(models.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        if (scored[a].auc != scored[b].auc) return scored[a].auc > scored[b].auc;
        if (scored[a].f1 != scored[b].f1) return scored[a].f1 > scored[b].f1;
        if (scored[a].kind_order != scored[b].kind_order)
            return scored[a].kind_order < scored[b].kind_order;
        return scored[a].position < scored[b].position;
    });

    Ensemble ensemble;
    for (std::size_t i = 0; i < 3; ++i) {
        ensemble.members.push_back(models[rank[i]]);
        ensemble.selection_scores.push_back(scored[rank[i]].auc);
    }
    return ensemble;
}

int vote(const Ensemble& ensemble, std::span<const double> x) {
    int votes = 0;
    for (const auto& m : ensemble.members) votes += m.predict(x);
    return votes >= 2 ? 1 : 0;
}

double ensemble_proba(const Ensemble& ensemble, std::span<const double> x) {
    double sum = 0.0;
    for (const auto& m : ensemble.members) sum += m.predict_proba(x);
    return sum / static_cast<double>(ensemble.members.size());
}

}  // namespace rebalance
