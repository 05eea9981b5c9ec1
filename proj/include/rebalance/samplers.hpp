#pragma once

// Oversamplers: SMOTE and its nominal-aware, borderline, SVM-guided and
// adaptive variants, plus instance-level same-class mixup. Every
// sampler is a pure function of (data, rows, config); randomness comes
// from a stream derived from the config seed, so identical inputs give
// bit-identical outputs.

#include <optional>
#include <span>

#include "rebalance/resample.hpp"

namespace rebalance {

struct SmoteConfig {
    std::size_t k = 5;
    double target_ratio = 1.0;  // desired minority/majority count ratio, (0,1]
    std::uint64_t seed = 0;
};

struct BorderlineConfig {
    std::size_t m = 10;  // danger-test neighborhood
    std::size_t k = 5;   // interpolation neighborhood
    double target_ratio = 1.0;
    std::uint64_t seed = 0;
};

struct AdasynConfig {
    std::size_t k = 5;
    double beta = 1.0;  // fraction of the minority/majority gap to fill
    std::uint64_t seed = 0;
};

struct SvmSmoteConfig {
    std::size_t m = 10;
    std::size_t k = 5;
    double svm_regularization = 1.0;
    std::size_t svm_epochs = 200;
    double target_ratio = 1.0;
    std::uint64_t seed = 0;
};

struct MixupConfig {
    double alpha = 0.2;  // Beta(alpha, alpha) interpolation strength
    // Synthetic rows per class; unset doubles each class, preserving the
    // class ratio exactly.
    std::optional<std::size_t> pairs_per_class{};
    bool same_class_only = true;
    std::uint64_t seed = 0;
};

ResampleResult smote(const Dataset& data, std::span<const std::size_t> train_rows,
                     const SmoteConfig& cfg);

// Mixed-feature variant: continuous coordinates interpolate under the
// heterogeneous distance; each nominal coordinate takes the modal value
// among the source's k nearest minority neighbors.
ResampleResult smote_nc(const Dataset& data, std::span<const std::size_t> train_rows,
                        const SmoteConfig& cfg);

ResampleResult borderline_smote(const Dataset& data, std::span<const std::size_t> train_rows,
                                const BorderlineConfig& cfg);

ResampleResult svm_smote(const Dataset& data, std::span<const std::size_t> train_rows,
                         const SvmSmoteConfig& cfg);

ResampleResult adasyn(const Dataset& data, std::span<const std::size_t> train_rows,
                      const AdasynConfig& cfg);

// Exact convex combination lambda * a + (1 - lambda) * b.
std::vector<double> mixup_pair(std::span<const double> a, std::span<const double> b,
                               double lambda);

// Appends per-class synthetic rows, each a convex combination of two
// distinct same-class rows with lambda ~ Beta(alpha, alpha). Labels stay
// pure: mixing within a class makes the mixed label equal the shared one.
ResampleResult mixup_augment(const Dataset& data, std::span<const std::size_t> rows,
                             const MixupConfig& cfg);

// Same generator with explicit per-class counts [negatives, positives].
// The draw order is fixed (class 0 first), so a call with counts equal to
// what mixup_augment would choose is bit-identical to it.
ResampleResult mixup_augment_per_class(const Dataset& data, std::span<const std::size_t> rows,
                                       const MixupConfig& cfg,
                                       std::array<std::size_t, 2> counts);

// Linear soft-margin SVM fitted by full-batch subgradient descent with
// the bias folded in as a constant feature. Exposed so the support-set
// geometry of svm_smote can be checked from the outside.
struct LinearSvm {
    std::vector<double> weights;  // n_cols entries
    double bias = 0.0;

    double margin(std::span<const double> x, int label) const;
};

LinearSvm train_linear_svm(const Dataset& data, std::span<const std::size_t> rows,
                           double regularization, std::size_t epochs);

}  // namespace rebalance
