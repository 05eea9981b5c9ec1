#include "rebalance/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "rebalance/error.hpp"
#include "rebalance/rng.hpp"

namespace rebalance {

using nlohmann::json;

void apply_thread_env() {
#ifdef _OPENMP
    if (const char* env = std::getenv("REBALANCE_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

// ---------------------------------------------------------------------------
// Config file

namespace {

struct RawSection {
    std::string header;
    std::map<std::string, std::string> entries;
    std::vector<std::string> order;  // key insertion order, for error reporting
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<RawSection> parse_sections(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
    std::vector<RawSection> sections;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error(ErrorCode::ParseError,
                            path.string() + ":" + std::to_string(line_no) + ": bad section header");
            sections.push_back({trim(line.substr(1, line.size() - 2)), {}, {}});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos || sections.empty())
            throw Error(ErrorCode::ParseError,
                        path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto& section = sections.back();
        if (!section.entries.emplace(key, value).second)
            throw Error(ErrorCode::ParseError, "duplicate key '" + key + "' in [" +
                                                   section.header + "]");
        section.order.push_back(key);
    }
    return sections;
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad number '" + v + "' for " + key);
    }
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad integer '" + v + "' for " + key);
    }
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw Error(ErrorCode::ParseError, "bad boolean '" + v + "' for " + key);
}

// Pulls a key out of the map, so leftovers can be reported as unknown.
template <class F>
void take(std::map<std::string, std::string>& entries, const std::string& key, F&& apply) {
    auto it = entries.find(key);
    if (it == entries.end()) return;
    apply(it->second);
    entries.erase(it);
}

void expect_empty(const std::map<std::string, std::string>& entries, const std::string& where) {
    if (!entries.empty())
        throw Error(ErrorCode::ParseError,
                    "unknown key '" + entries.begin()->first + "' in [" + where + "]");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

SamplerSpec parse_sampler(const std::string& name, std::map<std::string, std::string> entries) {
    if (std::find(kSamplerNames.begin(), kSamplerNames.end(), name) == kSamplerNames.end())
        throw Error(ErrorCode::ParseError, "unknown sampler '" + name + "'");
    SamplerSpec spec;
    spec.name = name;
    const std::string where = "sampler " + name;
    take(entries, "k", [&](const std::string& v) {
        auto k = static_cast<std::size_t>(to_u64(v, "k"));
        spec.smote.k = spec.borderline.k = spec.svm.k = spec.adasyn.k = k;
    });
    take(entries, "m", [&](const std::string& v) {
        auto m = static_cast<std::size_t>(to_u64(v, "m"));
        spec.borderline.m = spec.svm.m = m;
    });
    take(entries, "target_ratio", [&](const std::string& v) {
        double t = to_double(v, "target_ratio");
        spec.smote.target_ratio = spec.borderline.target_ratio = spec.svm.target_ratio = t;
        spec.mixup_target_ratio = t;
    });
    take(entries, "beta", [&](const std::string& v) { spec.adasyn.beta = to_double(v, "beta"); });
    take(entries, "alpha", [&](const std::string& v) {
        spec.mixup.alpha = to_double(v, "alpha");
    });
    take(entries, "pairs_per_class", [&](const std::string& v) {
        spec.mixup.pairs_per_class = static_cast<std::size_t>(to_u64(v, "pairs_per_class"));
    });
    take(entries, "svm_regularization", [&](const std::string& v) {
        spec.svm.svm_regularization = to_double(v, "svm_regularization");
    });
    take(entries, "svm_epochs", [&](const std::string& v) {
        spec.svm.svm_epochs = static_cast<std::size_t>(to_u64(v, "svm_epochs"));
    });
    take(entries, "remove_both", [&](const std::string& v) {
        spec.remove_both = to_bool(v, "remove_both");
    });
    expect_empty(entries, where);
    return spec;
}

ClassifierKind parse_classifier(const std::string& name,
                                std::map<std::string, std::string> entries) {
    ClassifierKind kind = kind_from_name(name);
    const std::string where = "classifier " + name;
    std::visit(
        [&](auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, KnnConfig>) {
                take(entries, "k",
                     [&](const std::string& v) { cfg.k = static_cast<std::size_t>(to_u64(v, "k")); });
            } else if constexpr (std::is_same_v<T, LdaConfig>) {
                take(entries, "ridge_scale",
                     [&](const std::string& v) { cfg.ridge_scale = to_double(v, "ridge_scale"); });
            } else if constexpr (std::is_same_v<T, QdaConfig>) {
                take(entries, "shrinkage",
                     [&](const std::string& v) { cfg.shrinkage = to_double(v, "shrinkage"); });
            } else if constexpr (std::is_same_v<T, LogisticConfig>) {
                take(entries, "rate", [&](const std::string& v) { cfg.rate = to_double(v, "rate"); });
                take(entries, "epochs", [&](const std::string& v) {
                    cfg.epochs = static_cast<std::size_t>(to_u64(v, "epochs"));
                });
                take(entries, "l2", [&](const std::string& v) { cfg.l2 = to_double(v, "l2"); });
            } else if constexpr (std::is_same_v<T, ExtraTreesConfig>) {
                take(entries, "trees", [&](const std::string& v) {
                    cfg.n_trees = static_cast<std::size_t>(to_u64(v, "trees"));
                });
                take(entries, "max_depth", [&](const std::string& v) {
                    cfg.max_depth = static_cast<std::size_t>(to_u64(v, "max_depth"));
                });
                take(entries, "min_leaf", [&](const std::string& v) {
                    cfg.min_leaf = static_cast<std::size_t>(to_u64(v, "min_leaf"));
                });
            } else if constexpr (std::is_same_v<T, AdaBoostConfig>) {
                take(entries, "rounds", [&](const std::string& v) {
                    cfg.rounds = static_cast<std::size_t>(to_u64(v, "rounds"));
                });
            }
        },
        kind);
    expect_empty(entries, where);
    return kind;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    ExperimentConfig cfg;
    auto base = std::filesystem::absolute(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    for (auto& section : parse_sections(path)) {
        auto& entries = section.entries;
        if (section.header == "dataset") {
            take(entries, "path",
                 [&](const std::string& v) { cfg.dataset.path = resolve(v); });
            take(entries, "label_column",
                 [&](const std::string& v) { cfg.dataset.label_column = v; });
            take(entries, "nominal_columns", [&](const std::string& v) {
                for (auto& name : split_list(v)) cfg.dataset.nominal_columns.insert(name);
            });
            take(entries, "ignore_columns", [&](const std::string& v) {
                for (auto& name : split_list(v)) cfg.dataset.ignore_columns.insert(name);
            });
            expect_empty(entries, "dataset");
        } else if (section.header == "split") {
            take(entries, "fractions", [&](const std::string& v) {
                auto parts = split_list(v);
                if (parts.size() != 3)
                    throw Error(ErrorCode::ParseError, "fractions needs 3 comma-separated values");
                for (std::size_t i = 0; i < 3; ++i)
                    cfg.fractions[i] = to_double(parts[i], "fractions");
            });
            expect_empty(entries, "split");
        } else if (section.header == "run") {
            take(entries, "master_seed",
                 [&](const std::string& v) { cfg.master_seed = to_u64(v, "master_seed"); });
            take(entries, "repetitions", [&](const std::string& v) {
                cfg.repetitions = static_cast<std::size_t>(to_u64(v, "repetitions"));
            });
            take(entries, "output",
                 [&](const std::string& v) { cfg.output_dir = resolve(v); });
            expect_empty(entries, "run");
        } else if (section.header.rfind("sampler ", 0) == 0) {
            cfg.samplers.push_back(
                parse_sampler(trim(section.header.substr(8)), std::move(entries)));
        } else if (section.header.rfind("classifier ", 0) == 0) {
            cfg.classifiers.push_back(
                parse_classifier(trim(section.header.substr(11)), std::move(entries)));
        } else {
            throw Error(ErrorCode::ParseError, "unknown section [" + section.header + "]");
        }
    }
    if (cfg.dataset.path.empty() || cfg.dataset.label_column.empty())
        throw Error(ErrorCode::ParseError, "config needs [dataset] path and label_column");
    if (cfg.samplers.empty())
        throw Error(ErrorCode::ParseError, "config needs at least one [sampler ...]");
    if (cfg.classifiers.size() < 3)
        throw Error(ErrorCode::ParseError, "config needs at least three [classifier ...]");
    if (cfg.repetitions < 1) throw Error(ErrorCode::ParseError, "repetitions must be >= 1");
    return cfg;
}

// ---------------------------------------------------------------------------
// Samplers dispatch

ResampleResult mixup_oversample(const Dataset& data, std::span<const std::size_t> rows,
                                const MixupConfig& cfg, double target_ratio) {
    if (!(target_ratio > 0.0 && target_ratio <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "mixup_oversample: target_ratio outside (0,1]");
    ResampleResult r;
    r.data = data.subset(rows);
    auto minority = r.data.rows_with_label(1);
    std::size_t majority = r.data.n_rows - minority.size();
    if (minority.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "mixup_oversample: minority needs at least 2 rows");

    auto target = static_cast<long long>(
        std::llround(target_ratio * static_cast<double>(majority)));
    long long needed = target - static_cast<long long>(minority.size());
    Rng rng = Rng::derive(cfg.seed, "mixup");
    for (long long t = 0; t < needed; ++t) {
        std::size_t i = rng.uniform_index(minority.size());
        std::size_t j = rng.uniform_index(minority.size() - 1);
        if (j >= i) ++j;
        double lambda = rng.beta(cfg.alpha, cfg.alpha);
        auto row = mixup_pair(r.data.row(minority[i]), r.data.row(minority[j]), lambda);
        r.provenance.push_back({r.data.n_rows, "mixup", minority[i], minority[j], lambda});
        r.data.push_row(row, 1, RowProvenance::synthetic);
    }
    r.kept_rows.resize(r.data.n_rows);
    std::iota(r.kept_rows.begin(), r.kept_rows.end(), std::size_t{0});
    r.clean.before = r.clean.after = count_classes(r.data);
    return r;
}

ResampleResult apply_sampler(const SamplerSpec& spec, const Dataset& data,
                             std::span<const std::size_t> train_rows, std::uint64_t seed) {
    SamplerSpec s = spec;
    s.smote.seed = s.borderline.seed = s.svm.seed = s.adasyn.seed = s.mixup.seed = seed;

    if (s.name == "none") {
        ResampleResult r;
        r.data = data.subset(train_rows);
        r.kept_rows.resize(r.data.n_rows);
        std::iota(r.kept_rows.begin(), r.kept_rows.end(), std::size_t{0});
        r.clean.before = r.clean.after = count_classes(r.data);
        return r;
    }
    if (s.name == "smote") return smote(data, train_rows, s.smote);
    if (s.name == "smote_nc") return smote_nc(data, train_rows, s.smote);
    if (s.name == "borderline") return borderline_smote(data, train_rows, s.borderline);
    if (s.name == "svm_smote") return svm_smote(data, train_rows, s.svm);
    if (s.name == "adasyn") return adasyn(data, train_rows, s.adasyn);
    if (s.name == "smote_tomek") return smote_tomek(data, train_rows, s.smote, s.remove_both);
    if (s.name == "smote_enn") return smote_enn(data, train_rows, s.smote);
    if (s.name == "mixup") return mixup_oversample(data, train_rows, s.mixup, s.mixup_target_ratio);
    if (s.name == "stem") return stem(data, train_rows, s.smote, s.mixup);
    throw Error(ErrorCode::InvalidArgument, "unknown sampler '" + s.name + "'");
}

// ---------------------------------------------------------------------------
// Grid runner

namespace {

void verify_partition(const SplitIndices& split, std::size_t n_rows) {
    std::vector<std::uint8_t> seen(n_rows, 0);
    auto mark = [&](const std::vector<std::size_t>& rows) {
        for (std::size_t r : rows) {
            if (r >= n_rows || seen[r])
                throw Error(ErrorCode::Internal, "split is not a partition");
            seen[r] = 1;
        }
    };
    mark(split.train);
    mark(split.validation);
    mark(split.holdout);
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw Error(ErrorCode::Internal, "split does not cover all rows");
}

// Leakage and mutation guard: every surviving pre-synthetic row must be
// a bit-identical copy of its training row; nothing outside the training
// partition may appear.
void verify_originals(const ResampleResult& resampled, const Dataset& source,
                      std::span<const std::size_t> train_rows) {
    if (resampled.kept_rows.size() != resampled.data.n_rows)
        throw Error(ErrorCode::Internal, "sampler kept_rows map is inconsistent");
    for (std::size_t i = 0; i < resampled.data.n_rows; ++i) {
        std::size_t pre = resampled.kept_rows[i];
        if (pre >= train_rows.size()) continue;  // synthetic
        auto a = resampled.data.row(i);
        auto b = source.row(train_rows[pre]);
        if (!std::equal(a.begin(), a.end(), b.begin(), b.end()) ||
            resampled.data.labels[i] != source.labels[train_rows[pre]])
            throw Error(ErrorCode::Internal, "sampler mutated an original training row");
    }
}

ClassCounts count_over(const Dataset& data, std::span<const std::size_t> rows) {
    ClassCounts c;
    for (std::size_t r : rows) (data.labels[r] == 1 ? c.positives : c.negatives)++;
    return c;
}

std::string modal_code(std::vector<std::string> codes) {
    if (codes.empty()) return "-";
    std::map<std::string, std::size_t> counts;
    for (const auto& c : codes) counts[c]++;
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [code, count] : counts) {  // map order breaks ties lexicographically
        if (count > best_count) {
            best = code;
            best_count = count;
        }
    }
    return best;
}

std::string format_metric(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

bool RunManifest::any_failed() const {
    return std::any_of(cells.begin(), cells.end(), [](const CellOutcome& c) { return !c.ok; });
}

RunManifest run_experiment(const ExperimentConfig& cfg) {
    if (cfg.samplers.empty() || cfg.classifiers.size() < 3)
        throw Error(ErrorCode::InvalidArgument,
                    "experiment needs at least one sampler and three classifiers");
    apply_thread_env();
    auto t0 = std::chrono::steady_clock::now();

    RunManifest manifest;
    manifest.config = cfg;

    Dataset data = load_csv(cfg.dataset.path, cfg.dataset.label_column,
                            cfg.dataset.nominal_columns, cfg.dataset.ignore_columns);

    // Shared per-repetition artifacts: split, leak-free standardizer,
    // transformed dataset.
    struct RepContext {
        SplitIndices split;
        Dataset zdata;
        std::vector<int> validation_labels;
        std::vector<int> holdout_labels;
    };
    std::vector<RepContext> reps(cfg.repetitions);
    for (std::size_t r = 0; r < cfg.repetitions; ++r) {
        auto seed = derive_seed(cfg.master_seed, "rep/" + std::to_string(r) + "/split");
        manifest.subseeds.emplace_back("rep/" + std::to_string(r) + "/split", seed);
        reps[r].split = stratified_split(data, cfg.fractions, seed);
        verify_partition(reps[r].split, data.n_rows);
        auto standardizer = fit_standardizer(data, reps[r].split.train);
        reps[r].zdata = standardizer.transform(data);
        for (std::size_t row : reps[r].split.validation)
            reps[r].validation_labels.push_back(data.labels[row]);
        for (std::size_t row : reps[r].split.holdout)
            reps[r].holdout_labels.push_back(data.labels[row]);
    }

    // Pre-derived seeds so the manifest records the whole table even if a
    // cell fails.
    const std::size_t n_cells = cfg.samplers.size() * cfg.repetitions;
    manifest.cells.assign(n_cells, {});
    for (std::size_t s = 0; s < cfg.samplers.size(); ++s) {
        for (std::size_t r = 0; r < cfg.repetitions; ++r) {
            auto& cell = manifest.cells[s * cfg.repetitions + r];
            cell.sampler = cfg.samplers[s].name;
            cell.rep = r;
            std::string label = "rep/" + std::to_string(r) + "/sampler/" + cfg.samplers[s].name;
            cell.sampler_seed = derive_seed(cfg.master_seed, label);
            manifest.subseeds.emplace_back(label, cell.sampler_seed);
        }
    }
    for (std::size_t r = 0; r < cfg.repetitions; ++r)
        for (const auto& kind : cfg.classifiers) {
            std::string label = "rep/" + std::to_string(r) + "/classifier/" + kind_name(kind);
            manifest.subseeds.emplace_back(label, derive_seed(cfg.master_seed, label));
        }

    const auto n_flat = static_cast<std::ptrdiff_t>(n_cells);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t flat = 0; flat < n_flat; ++flat) {
        auto& cell = manifest.cells[static_cast<std::size_t>(flat)];
        const auto s = static_cast<std::size_t>(flat) / cfg.repetitions;
        const auto r = static_cast<std::size_t>(flat) % cfg.repetitions;
        const auto& ctx = reps[r];
        auto cell_t0 = std::chrono::steady_clock::now();
        try {
            auto resampled = apply_sampler(cfg.samplers[s], ctx.zdata, ctx.split.train,
                                           cell.sampler_seed);
            verify_originals(resampled, ctx.zdata, ctx.split.train);
            cell.train_before = count_over(ctx.zdata, ctx.split.train);
            cell.train_after = count_classes(resampled.data);
            cell.clean = resampled.clean;
            cell.provenance = resampled.provenance;
            cell.warnings = resampled.warnings;

            std::vector<TrainedModel> models;
            auto all = resampled.data.all_rows();
            for (const auto& kind : cfg.classifiers) {
                auto seed = derive_seed(cfg.master_seed,
                                        "rep/" + std::to_string(r) + "/classifier/" +
                                            kind_name(kind));
                models.push_back(train(kind, resampled.data, all, seed));
            }

            auto ensemble = select_top3(models, ctx.zdata, ctx.split.validation);
            for (std::size_t m = 0; m < models.size(); ++m) {
                std::vector<double> probs;
                for (std::size_t row : ctx.split.validation)
                    probs.push_back(models[m].predict_proba(ctx.zdata.row(row)));
                cell.validation_auc.emplace_back(kind_name(models[m].kind()),
                                                 roc_auc(ctx.validation_labels, probs).auc);
            }
            for (const auto& member : ensemble.members)
                cell.ensemble_members.push_back(kind_name(member.kind()));
            cell.ensemble_code = ensemble.code();

            std::vector<double> holdout_probs;
            std::vector<int> holdout_votes;
            for (std::size_t row : ctx.split.holdout) {
                holdout_probs.push_back(ensemble_proba(ensemble, ctx.zdata.row(row)));
                holdout_votes.push_back(vote(ensemble, ctx.zdata.row(row)));
            }
            cell.holdout_cm = confusion(ctx.holdout_labels, holdout_votes);
            cell.holdout = summarize(cell.holdout_cm);
            auto roc = roc_auc(ctx.holdout_labels, holdout_probs);
            cell.holdout_auc = roc.auc;
            cell.holdout_roc = roc.points;
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
        cell.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - cell_t0).count();
    }

    // Aggregate one table row per sampler: means over successful reps.
    for (std::size_t s = 0; s < cfg.samplers.size(); ++s) {
        TableRow row;
        row.approach = cfg.samplers[s].name;
        row.total_reps = cfg.repetitions;
        std::vector<std::string> codes;
        for (std::size_t r = 0; r < cfg.repetitions; ++r) {
            const auto& cell = manifest.cells[s * cfg.repetitions + r];
            if (!cell.ok) continue;
            ++row.ok_reps;
            row.acc += cell.holdout.accuracy;
            row.auc += cell.holdout_auc;
            row.rec += cell.holdout.recall;
            row.pre += cell.holdout.precision;
            row.f1 += cell.holdout.f1;
            codes.push_back(cell.ensemble_code);
        }
        if (row.ok_reps > 0) {
            const auto n = static_cast<double>(row.ok_reps);
            row.acc /= n;
            row.auc /= n;
            row.rec /= n;
            row.pre /= n;
            row.f1 /= n;
        } else {
            row.acc = row.auc = row.rec = row.pre = row.f1 =
                std::numeric_limits<double>::quiet_NaN();
        }
        row.code = modal_code(std::move(codes));
        manifest.table.push_back(std::move(row));
    }
    manifest.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Outputs.
    std::filesystem::create_directories(cfg.output_dir);
    save_manifest(manifest, cfg.output_dir / "manifest.json");
    auto report = emit_report(manifest);
    std::ofstream(cfg.output_dir / "results.md") << report.markdown;
    std::ofstream(cfg.output_dir / "results.csv") << report.csv;
    for (std::size_t s = 0; s < cfg.samplers.size(); ++s) {
        const auto& cell = manifest.cells[s * cfg.repetitions];
        if (!cell.ok) continue;
        std::ofstream roc(cfg.output_dir / ("roc_" + cell.sampler + ".csv"));
        roc << "fpr,tpr\n";
        for (const auto& pt : cell.holdout_roc)
            roc << format_metric(pt.fpr) << ',' << format_metric(pt.tpr) << '\n';
    }
    return manifest;
}

}  // namespace rebalance
