#pragma once

// From-scratch binary classifiers: k-NN, regularized LDA/QDA, logistic
// regression, extremely randomized trees and AdaBoost over decision
// stumps, plus top-3-by-AUC selection with hard majority voting.

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rebalance/dataset.hpp"

namespace rebalance {

struct KnnConfig {
    std::size_t k = 5;
};

struct LdaConfig {
    double ridge_scale = 1e-6;  // times trace(cov)/d, added to the pooled diagonal
};

struct QdaConfig {
    double shrinkage = 0.1;  // weight pulling class covariances toward the pooled one
};

struct LogisticConfig {
    double rate = 0.1;
    std::size_t epochs = 500;
    double l2 = 1e-4;
};

struct ExtraTreesConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 12;
    std::size_t min_leaf = 2;
};

struct AdaBoostConfig {
    std::size_t rounds = 100;
};

using ClassifierKind = std::variant<KnnConfig, LdaConfig, QdaConfig, LogisticConfig,
                                    ExtraTreesConfig, AdaBoostConfig>;

std::string kind_name(const ClassifierKind& kind);
// Report-table initials: K, Ld, Q, Lr, E, A.
std::string kind_initials(const ClassifierKind& kind);
ClassifierKind kind_from_name(const std::string& name);

class TrainedModel {
public:
    double predict_proba(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }
    const ClassifierKind& kind() const { return kind_; }
    std::size_t dimension() const { return dimension_; }

    struct Impl;
    TrainedModel(ClassifierKind kind, std::size_t dimension, std::shared_ptr<const Impl> impl)
        : kind_(std::move(kind)), dimension_(dimension), impl_(std::move(impl)) {}

private:
    friend std::vector<double> lda_direction(const TrainedModel& model);

    ClassifierKind kind_;
    std::size_t dimension_ = 0;
    std::shared_ptr<const Impl> impl_;
};

TrainedModel train(const ClassifierKind& kind, const Dataset& data,
                   std::span<const std::size_t> rows, std::uint64_t seed);

struct Ensemble {
    std::vector<TrainedModel> members;     // exactly 3, descending validation AUC
    std::vector<double> selection_scores;  // matching AUCs

    std::string code() const;  // concatenated member initials
};

// Ranks candidates by validation AUC, breaking ties by validation F1 and
// then by the fixed kind order.
Ensemble select_top3(const std::vector<TrainedModel>& models, const Dataset& data,
                     std::span<const std::size_t> validation_rows);

// Hard majority vote of the three members at the 0.5 threshold.
int vote(const Ensemble& ensemble, std::span<const double> x);
// Mean member probability, used when the ensemble is scored by AUC.
double ensemble_proba(const Ensemble& ensemble, std::span<const double> x);

// L2-regularized mean cross-entropy and its analytic gradient, exposed
// so the gradient can be checked against finite differences.
double logistic_loss(const Dataset& data, std::span<const std::size_t> rows,
                     std::span<const double> weights, double bias, double l2);
void logistic_gradient(const Dataset& data, std::span<const std::size_t> rows,
                       std::span<const double> weights, double bias, double l2,
                       std::span<double> grad_weights, double& grad_bias);

// Linear-discriminant weight vector of a fitted LDA model, for boundary
// geometry checks.
std::vector<double> lda_direction(const TrainedModel& model);

}  // namespace rebalance
