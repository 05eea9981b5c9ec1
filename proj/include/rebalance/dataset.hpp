#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace rebalance {

enum class ColumnKind : std::uint8_t { continuous, nominal };
enum class RowProvenance : std::uint8_t { original, synthetic };

// Row-major feature table with binary labels. Label 1 is the positive /
// minority class by convention. Nominal columns hold integer category
// codes; `categories[c]` maps a code back to its text (empty for
// continuous columns). Immutable by convention once built: operations
// return new datasets instead of mutating shared ones.
struct Dataset {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> features;  // n_rows * n_cols
    std::vector<int> labels;
    std::vector<ColumnKind> column_kinds;
    std::vector<RowProvenance> row_provenance;
    std::vector<std::string> feature_names;
    std::vector<std::vector<std::string>> categories;
    std::string label_name = "label";
    std::array<std::string, 2> label_texts{{"0", "1"}};  // [negative, positive]

    std::span<const double> row(std::size_t r) const {
        return {features.data() + r * n_cols, n_cols};
    }
    double at(std::size_t r, std::size_t c) const { return features[r * n_cols + c]; }
    double& at(std::size_t r, std::size_t c) { return features[r * n_cols + c]; }

    void push_row(std::span<const double> values, int label, RowProvenance provenance);

    bool all_continuous() const;
    std::size_t count_label(int label) const;
    std::vector<std::size_t> rows_with_label(int label) const;
    std::vector<std::size_t> all_rows() const;

    // New dataset holding the given rows in the given order.
    Dataset subset(std::span<const std::size_t> rows) const;
    // Column schema (kinds, names, categories, label names) without rows.
    Dataset empty_like() const;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> holdout;
};

// Per-column z-scoring statistics, population (1/N) deviation. Nominal
// columns pass through untouched; zero-deviation columns transform to
// zero instead of dividing by zero.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<ColumnKind> kinds;

    Dataset transform(const Dataset& data) const;
    Dataset inverse_transform(const Dataset& data) const;
};

// RFC-4180 records (quoted fields may hold commas, doubled quotes and
// line breaks), one string vector per row.
std::vector<std::vector<std::string>> read_csv_records(const std::filesystem::path& path);

// RFC-4180 CSV with a header row. The label column must hold exactly two
// distinct values; the less frequent one is coded 1 (ties broken toward
// the lexicographically smaller text). Nominal columns are integer-coded
// against their lexicographically sorted category set.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::set<std::string>& nominal_columns = {},
                 const std::set<std::string>& ignore_columns = {});

// Writes features at 17 significant digits; nominal cells and labels are
// written as their category text. Datasets with nominal columns get a
// sidecar `<path>.dict.json` recording the category dictionaries.
void save_csv(const Dataset& data, const std::filesystem::path& path);

// Seeded stratified three-way split. Part totals are the rounded
// fractions of the row count; per-class allocations within the
// validation and holdout parts follow largest-remainder quotas, and the
// training part absorbs every remainder. Index lists come back sorted.
SplitIndices stratified_split(const Dataset& data, std::array<double, 3> fractions,
                              std::uint64_t seed);

Standardizer fit_standardizer(const Dataset& data, std::span<const std::size_t> rows);

}  // namespace rebalance
