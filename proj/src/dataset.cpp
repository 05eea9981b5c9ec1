#include "rebalance/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rebalance/apportion.hpp"
#include "rebalance/error.hpp"
#include "rebalance/rng.hpp"

namespace rebalance {

void Dataset::push_row(std::span<const double> values, int label, RowProvenance provenance) {
    if (values.size() != n_cols)
        throw Error(ErrorCode::InvalidArgument, "push_row: width mismatch");
    features.insert(features.end(), values.begin(), values.end());
    labels.push_back(label);
    row_provenance.push_back(provenance);
    ++n_rows;
}

bool Dataset::all_continuous() const {
    return std::all_of(column_kinds.begin(), column_kinds.end(),
                       [](ColumnKind k) { return k == ColumnKind::continuous; });
}

std::size_t Dataset::count_label(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

std::vector<std::size_t> Dataset::rows_with_label(int label) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < n_rows; ++r)
        if (labels[r] == label) rows.push_back(r);
    return rows;
}

std::vector<std::size_t> Dataset::all_rows() const {
    std::vector<std::size_t> rows(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) rows[r] = r;
    return rows;
}

Dataset Dataset::empty_like() const {
    Dataset out;
    out.n_cols = n_cols;
    out.column_kinds = column_kinds;
    out.feature_names = feature_names;
    out.categories = categories;
    out.label_name = label_name;
    out.label_texts = label_texts;
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out = empty_like();
    out.features.reserve(rows.size() * n_cols);
    for (std::size_t r : rows) {
        if (r >= n_rows) throw Error(ErrorCode::InvalidArgument, "subset: row out of range");
        out.push_row(row(r), labels[r], row_provenance[r]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

// RFC-4180 reader: quoted fields may contain commas, doubled quotes and
// line breaks. Returns one vector of cells per record.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string cell;
    bool in_quotes = false;
    bool cell_started = false;

    auto end_cell = [&] {
        record.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
    };
    auto end_record = [&] {
        end_cell();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                cell_started = true;
                break;
            case ',':
                end_cell();
                cell_started = true;  // the next cell exists even if empty
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                break;
            default:
                cell.push_back(c);
                cell_started = true;
        }
    }
    if (in_quotes) throw Error(ErrorCode::ParseError, "unterminated quoted CSV field");
    if (cell_started || !cell.empty() || !record.empty()) end_record();
    return records;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& cell, std::size_t record, const std::string& column) {
    try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\t')) ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        if (!std::isfinite(v))
            throw Error(ErrorCode::ParseError, "non-finite value in column '" + column + "'");
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "non-numeric cell '" + cell + "' in column '" +
                                               column + "', record " + std::to_string(record));
    }
}

}  // namespace

std::vector<std::vector<std::string>> read_csv_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::set<std::string>& nominal_columns,
                 const std::set<std::string>& ignore_columns) {
    auto records = read_csv_records(path);
    if (records.size() < 2) throw Error(ErrorCode::ParseError, "CSV needs a header and data rows");

    const auto& header = records.front();
    std::size_t label_col = header.size();
    std::vector<bool> skip(header.size(), false);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == label_column) label_col = c;
        if (ignore_columns.count(header[c])) skip[c] = true;
    }
    if (label_col == header.size())
        throw Error(ErrorCode::ParseError, "label column '" + label_column + "' not found");
    skip[label_col] = true;
    for (const auto& name : nominal_columns)
        if (std::find(header.begin(), header.end(), name) == header.end())
            throw Error(ErrorCode::ParseError, "nominal column '" + name + "' not found");

    Dataset data;
    data.label_name = label_column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (skip[c]) continue;
        ++data.n_cols;
        data.feature_names.push_back(header[c]);
        data.column_kinds.push_back(nominal_columns.count(header[c]) ? ColumnKind::nominal
                                                                     : ColumnKind::continuous);
    }
    if (data.n_cols == 0) throw Error(ErrorCode::ParseError, "no feature columns remain");
    data.categories.resize(data.n_cols);

    // First pass: label counts and nominal category sets.
    std::map<std::string, std::size_t> label_counts;
    std::vector<std::set<std::string>> category_sets(data.n_cols);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != header.size())
            throw Error(ErrorCode::ParseError,
                        "record " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                            " cells, expected " + std::to_string(header.size()));
        label_counts[rec[label_col]]++;
        std::size_t out_c = 0;
        for (std::size_t c = 0; c < rec.size(); ++c) {
            if (skip[c]) continue;
            if (data.column_kinds[out_c] == ColumnKind::nominal)
                category_sets[out_c].insert(rec[c]);
            ++out_c;
        }
    }
    if (label_counts.size() != 2)
        throw Error(ErrorCode::NotBinary, "label column has " +
                                              std::to_string(label_counts.size()) +
                                              " distinct values, need exactly 2");
    for (const auto& [text, count] : label_counts)
        if (count == 0) throw Error(ErrorCode::NotBinary, "empty class '" + text + "'");

    // Minority class is coded 1: fewer rows wins, ties go to the
    // lexicographically smaller text (std::map iterates sorted).
    auto it = label_counts.begin();
    auto [text_a, count_a] = *it++;
    auto [text_b, count_b] = *it;
    std::string positive = (count_a <= count_b) ? text_a : text_b;
    std::string negative = (count_a <= count_b) ? text_b : text_a;
    data.label_texts = {negative, positive};

    for (std::size_t c = 0; c < data.n_cols; ++c)
        data.categories[c].assign(category_sets[c].begin(), category_sets[c].end());

    // Second pass: numeric payload.
    data.features.reserve((records.size() - 1) * data.n_cols);
    std::vector<double> row(data.n_cols);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        std::size_t out_c = 0;
        for (std::size_t c = 0; c < rec.size(); ++c) {
            if (skip[c]) continue;
            if (data.column_kinds[out_c] == ColumnKind::nominal) {
                const auto& cats = data.categories[out_c];
                auto pos = std::lower_bound(cats.begin(), cats.end(), rec[c]);
                row[out_c] = static_cast<double>(pos - cats.begin());
            } else {
                row[out_c] = parse_double(rec[c], r, data.feature_names[out_c]);
            }
            ++out_c;
        }
        data.push_row(row, rec[label_col] == positive ? 1 : 0, RowProvenance::original);
    }
    return data;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (std::size_t c = 0; c < data.n_cols; ++c) out << csv_escape(data.feature_names[c]) << ',';
    out << csv_escape(data.label_name) << '\n';
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        for (std::size_t c = 0; c < data.n_cols; ++c) {
            if (data.column_kinds[c] == ColumnKind::nominal) {
                auto code = static_cast<std::size_t>(data.at(r, c));
                if (code >= data.categories[c].size())
                    throw Error(ErrorCode::InvalidArgument, "nominal code out of dictionary");
                out << csv_escape(data.categories[c][code]);
            } else {
                out << format_double(data.at(r, c));
            }
            out << ',';
        }
        out << csv_escape(data.label_texts[static_cast<std::size_t>(data.labels[r])]) << '\n';
    }
    if (!data.all_continuous()) {
        std::ofstream dict(path.string() + ".dict.json", std::ios::binary);
        dict << "{\n";
        bool first = true;
        for (std::size_t c = 0; c < data.n_cols; ++c) {
            if (data.column_kinds[c] != ColumnKind::nominal) continue;
            if (!first) dict << ",\n";
            first = false;
            dict << "  \"" << data.feature_names[c] << "\": [";
            for (std::size_t i = 0; i < data.categories[c].size(); ++i) {
                if (i) dict << ", ";
                dict << '"' << data.categories[c][i] << '"';
            }
            dict << "]";
        }
        dict << "\n}\n";
    }
}

// ---------------------------------------------------------------------------
// Splitting

SplitIndices stratified_split(const Dataset& data, std::array<double, 3> fractions,
                              std::uint64_t seed) {
    double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9 || fractions[0] <= 0.0 || fractions[1] < 0.0 ||
        fractions[2] < 0.0)
        throw Error(ErrorCode::InvalidArgument, "split fractions must be non-negative and sum to 1");

    std::array<std::vector<std::size_t>, 2> class_rows = {data.rows_with_label(0),
                                                          data.rows_with_label(1)};
    for (int label = 0; label < 2; ++label)
        if (class_rows[label].size() < 3)
            throw Error(ErrorCode::InvalidArgument,
                        "class " + std::to_string(label) + " too small to appear in every part");

    const auto n = static_cast<double>(data.n_rows);
    std::size_t total_val = static_cast<std::size_t>(std::llround(fractions[1] * n));
    std::size_t total_hold = static_cast<std::size_t>(std::llround(fractions[2] * n));

    auto class_quotas = [&](std::size_t part_total) {
        std::vector<double> q(2);
        for (int label = 0; label < 2; ++label)
            q[label] = static_cast<double>(part_total) *
                       static_cast<double>(class_rows[label].size()) / n;
        return q;
    };
    auto alloc_val = apportion(class_quotas(total_val), total_val);
    auto alloc_hold = apportion(class_quotas(total_hold), total_hold);

    // Every class reaches every part that has room for both: a rare class
    // whose quota rounds to zero still gets one slot, taken from the
    // other class. Keeps the model-selection parts two-class whenever the
    // class sizes permit (still within one row of the exact quota).
    auto enforce_presence = [](std::vector<std::size_t>& alloc, std::size_t part_total) {
        if (part_total < 2) return;
        for (std::size_t c = 0; c < alloc.size(); ++c) {
            if (alloc[c] > 0) continue;
            std::size_t donor = c == 0 ? 1 : 0;
            if (alloc[donor] > 1) {
                alloc[donor]--;
                alloc[c]++;
            }
        }
    };
    enforce_presence(alloc_val, total_val);
    enforce_presence(alloc_hold, total_hold);

    SplitIndices split;
    for (int label = 0; label < 2; ++label) {
        auto rows = class_rows[label];
        if (alloc_val[label] + alloc_hold[label] >= rows.size())
            throw Error(ErrorCode::InvalidArgument,
                        "class " + std::to_string(label) + " too small to appear in every part");
        Rng rng = Rng::derive(seed, "split/class/" + std::to_string(label));
        rng.shuffle(rows);
        std::size_t i = 0;
        for (std::size_t k = 0; k < alloc_val[label]; ++k) split.validation.push_back(rows[i++]);
        for (std::size_t k = 0; k < alloc_hold[label]; ++k) split.holdout.push_back(rows[i++]);
        for (; i < rows.size(); ++i) split.train.push_back(rows[i]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.holdout.begin(), split.holdout.end());
    return split;
}

// ---------------------------------------------------------------------------
// Standardization

Standardizer fit_standardizer(const Dataset& data, std::span<const std::size_t> rows) {
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "fit_standardizer: empty row list");
    Standardizer std_;
    std_.mean.assign(data.n_cols, 0.0);
    std_.stddev.assign(data.n_cols, 1.0);
    std_.kinds = data.column_kinds;
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
        std_.mean[c] = mean;
        std_.stddev[c] = std::sqrt(var / n);  // population deviation
    }
    return std_;
}

Dataset Standardizer::transform(const Dataset& data) const {
    if (data.n_cols != kinds.size())
        throw Error(ErrorCode::InvalidArgument, "standardizer width mismatch");
    Dataset out = data;
    for (std::size_t r = 0; r < out.n_rows; ++r) {
        for (std::size_t c = 0; c < out.n_cols; ++c) {
            if (kinds[c] != ColumnKind::continuous) continue;
            out.at(r, c) = stddev[c] > 0.0 ? (out.at(r, c) - mean[c]) / stddev[c] : 0.0;
        }
    }
    return out;
}

Dataset Standardizer::inverse_transform(const Dataset& data) const {
    if (data.n_cols != kinds.size())
        throw Error(ErrorCode::InvalidArgument, "standardizer width mismatch");
    Dataset out = data;
    for (std::size_t r = 0; r < out.n_rows; ++r) {
        for (std::size_t c = 0; c < out.n_cols; ++c) {
            if (kinds[c] != ColumnKind::continuous) continue;
            out.at(r, c) = stddev[c] > 0.0 ? out.at(r, c) * stddev[c] + mean[c] : mean[c];
        }
    }
    return out;
}

}  // namespace rebalance
