// Manifest serialization, report rendering, texture-table extraction.

#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rebalance/error.hpp"
#include "rebalance/experiment.hpp"

namespace rebalance {

using nlohmann::json;

namespace {

json sampler_to_json(const SamplerSpec& s) {
    json j;
    j["name"] = s.name;
    j["k"] = s.smote.k;
    j["m"] = s.borderline.m;
    j["target_ratio"] = s.smote.target_ratio;
    j["beta"] = s.adasyn.beta;
    j["alpha"] = s.mixup.alpha;
    if (s.mixup.pairs_per_class)
        j["pairs_per_class"] = *s.mixup.pairs_per_class;
    else
        j["pairs_per_class"] = nullptr;
    j["svm_regularization"] = s.svm.svm_regularization;
    j["svm_epochs"] = s.svm.svm_epochs;
    j["remove_both"] = s.remove_both;
    return j;
}

SamplerSpec sampler_from_json(const json& j) {
    SamplerSpec s;
    s.name = j.at("name").get<std::string>();
    auto k = j.at("k").get<std::size_t>();
    s.smote.k = s.borderline.k = s.svm.k = s.adasyn.k = k;
    s.borderline.m = s.svm.m = j.at("m").get<std::size_t>();
    double t = j.at("target_ratio").get<double>();
    s.smote.target_ratio = s.borderline.target_ratio = s.svm.target_ratio = t;
    s.mixup_target_ratio = t;
    s.adasyn.beta = j.at("beta").get<double>();
    s.mixup.alpha = j.at("alpha").get<double>();
    if (!j.at("pairs_per_class").is_null())
        s.mixup.pairs_per_class = j.at("pairs_per_class").get<std::size_t>();
    s.svm.svm_regularization = j.at("svm_regularization").get<double>();
    s.svm.svm_epochs = j.at("svm_epochs").get<std::size_t>();
    s.remove_both = j.at("remove_both").get<bool>();
    return s;
}

json classifier_to_json(const ClassifierKind& kind) {
    json j;
    j["name"] = kind_name(kind);
    std::visit(
        [&](const auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, KnnConfig>) {
                j["k"] = cfg.k;
            } else if constexpr (std::is_same_v<T, LdaConfig>) {
                j["ridge_scale"] = cfg.ridge_scale;
            } else if constexpr (std::is_same_v<T, QdaConfig>) {
                j["shrinkage"] = cfg.shrinkage;
            } else if constexpr (std::is_same_v<T, LogisticConfig>) {
                j["rate"] = cfg.rate;
                j["epochs"] = cfg.epochs;
                j["l2"] = cfg.l2;
            } else if constexpr (std::is_same_v<T, ExtraTreesConfig>) {
                j["trees"] = cfg.n_trees;
                j["max_depth"] = cfg.max_depth;
                j["min_leaf"] = cfg.min_leaf;
            } else if constexpr (std::is_same_v<T, AdaBoostConfig>) {
                j["rounds"] = cfg.rounds;
            }
        },
        kind);
    return j;
}

ClassifierKind classifier_from_json(const json& j) {
    ClassifierKind kind = kind_from_name(j.at("name").get<std::string>());
    std::visit(
        [&](auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, KnnConfig>) {
                cfg.k = j.at("k").get<std::size_t>();
            } else if constexpr (std::is_same_v<T, LdaConfig>) {
                cfg.ridge_scale = j.at("ridge_scale").get<double>();
            } else if constexpr (std::is_same_v<T, QdaConfig>) {
                cfg.shrinkage = j.at("shrinkage").get<double>();
            } else if constexpr (std::is_same_v<T, LogisticConfig>) {
                cfg.rate = j.at("rate").get<double>();
                cfg.epochs = j.at("epochs").get<std::size_t>();
                cfg.l2 = j.at("l2").get<double>();
            } else if constexpr (std::is_same_v<T, ExtraTreesConfig>) {
                cfg.n_trees = j.at("trees").get<std::size_t>();
                cfg.max_depth = j.at("max_depth").get<std::size_t>();
                cfg.min_leaf = j.at("min_leaf").get<std::size_t>();
            } else if constexpr (std::is_same_v<T, AdaBoostConfig>) {
                cfg.rounds = j.at("rounds").get<std::size_t>();
            }
        },
        kind);
    return kind;
}

json counts_to_json(const ClassCounts& c) { return json::array({c.negatives, c.positives}); }

ClassCounts counts_from_json(const json& j) {
    return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

json cell_to_json(const CellOutcome& c) {
    json j;
    j["sampler"] = c.sampler;
    j["rep"] = c.rep;
    j["seed"] = c.sampler_seed;
    j["ok"] = c.ok;
    j["error"] = c.error;
    j["train_before"] = counts_to_json(c.train_before);
    j["train_after"] = counts_to_json(c.train_after);
    json removed = json::array();
    for (const auto& rr : c.clean.removed)
        removed.push_back(json::array({rr.row, static_cast<int>(rr.reason)}));
    j["clean"] = {{"removed", removed},
                  {"before", counts_to_json(c.clean.before)},
                  {"after", counts_to_json(c.clean.after)}};
    json prov = json::array();
    for (const auto& p : c.provenance)
        prov.push_back(json::array({p.row_id, p.algorithm, p.source_idx, p.neighbor_idx,
                                    p.coefficient}));
    j["provenance"] = prov;
    json val = json::array();
    for (const auto& [name, auc] : c.validation_auc) val.push_back(json::array({name, auc}));
    j["validation_auc"] = val;
    j["ensemble"] = c.ensemble_members;
    j["ensemble_code"] = c.ensemble_code;
    j["holdout_cm"] =
        json::array({c.holdout_cm.t_pos, c.holdout_cm.t_neg, c.holdout_cm.f_pos,
                     c.holdout_cm.f_neg});
    j["holdout"] = {{"accuracy", c.holdout.accuracy},   {"precision", c.holdout.precision},
                    {"recall", c.holdout.recall},       {"f1", c.holdout.f1},
                    {"precision_degenerate", c.holdout.precision_degenerate},
                    {"recall_degenerate", c.holdout.recall_degenerate},
                    {"f1_degenerate", c.holdout.f1_degenerate}};
    j["holdout_auc"] = c.holdout_auc;
    json roc = json::array();
    for (const auto& pt : c.holdout_roc) roc.push_back(json::array({pt.fpr, pt.tpr}));
    j["roc"] = roc;
    j["warnings"] = c.warnings;
    j["seconds"] = c.seconds;
    return j;
}

CellOutcome cell_from_json(const json& j) {
    CellOutcome c;
    c.sampler = j.at("sampler").get<std::string>();
    c.rep = j.at("rep").get<std::size_t>();
    c.sampler_seed = j.at("seed").get<std::uint64_t>();
    c.ok = j.at("ok").get<bool>();
    c.error = j.at("error").get<std::string>();
    c.train_before = counts_from_json(j.at("train_before"));
    c.train_after = counts_from_json(j.at("train_after"));
    for (const auto& rr : j.at("clean").at("removed"))
        c.clean.removed.push_back(
            {rr.at(0).get<std::size_t>(), static_cast<RemovalReason>(rr.at(1).get<int>())});
    c.clean.before = counts_from_json(j.at("clean").at("before"));
    c.clean.after = counts_from_json(j.at("clean").at("after"));
    for (const auto& p : j.at("provenance"))
        c.provenance.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::string>(),
                                p.at(2).get<std::size_t>(), p.at(3).get<std::size_t>(),
                                p.at(4).get<double>()});
    for (const auto& v : j.at("validation_auc"))
        c.validation_auc.emplace_back(v.at(0).get<std::string>(), v.at(1).get<double>());
    c.ensemble_members = j.at("ensemble").get<std::vector<std::string>>();
    c.ensemble_code = j.at("ensemble_code").get<std::string>();
    const auto& cm = j.at("holdout_cm");
    c.holdout_cm = {cm.at(0).get<std::size_t>(), cm.at(1).get<std::size_t>(),
                    cm.at(2).get<std::size_t>(), cm.at(3).get<std::size_t>()};
    const auto& h = j.at("holdout");
    c.holdout.accuracy = h.at("accuracy").get<double>();
    c.holdout.precision = h.at("precision").get<double>();
    c.holdout.recall = h.at("recall").get<double>();
    c.holdout.f1 = h.at("f1").get<double>();
    c.holdout.precision_degenerate = h.at("precision_degenerate").get<bool>();
    c.holdout.recall_degenerate = h.at("recall_degenerate").get<bool>();
    c.holdout.f1_degenerate = h.at("f1_degenerate").get<bool>();
    c.holdout_auc = j.at("holdout_auc").get<double>();
    for (const auto& pt : j.at("roc"))
        c.holdout_roc.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
    c.warnings = j.at("warnings").get<std::vector<std::string>>();
    c.seconds = j.at("seconds").get<double>();
    return c;
}

std::string metric_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string metric_text4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    json j;
    const auto& cfg = manifest.config;
    j["config"] = {{"dataset",
                    {{"path", cfg.dataset.path.string()},
                     {"label_column", cfg.dataset.label_column},
                     {"nominal_columns",
                      std::vector<std::string>(cfg.dataset.nominal_columns.begin(),
                                               cfg.dataset.nominal_columns.end())},
                     {"ignore_columns",
                      std::vector<std::string>(cfg.dataset.ignore_columns.begin(),
                                               cfg.dataset.ignore_columns.end())}}},
                   {"fractions", cfg.fractions},
                   {"master_seed", cfg.master_seed},
                   {"repetitions", cfg.repetitions},
                   {"output", cfg.output_dir.string()}};
    json samplers = json::array();
    for (const auto& s : cfg.samplers) samplers.push_back(sampler_to_json(s));
    j["config"]["samplers"] = samplers;
    json classifiers = json::array();
    for (const auto& k : cfg.classifiers) classifiers.push_back(classifier_to_json(k));
    j["config"]["classifiers"] = classifiers;

    json subseeds = json::object();
    for (const auto& [label, seed] : manifest.subseeds) subseeds[label] = seed;
    j["subseeds"] = subseeds;

    json cells = json::array();
    for (const auto& c : manifest.cells) cells.push_back(cell_to_json(c));
    j["cells"] = cells;

    json table = json::array();
    for (const auto& row : manifest.table) {
        table.push_back({{"approach", row.approach},
                         {"acc", row.acc},
                         {"auc", row.auc},
                         {"rec", row.rec},
                         {"pre", row.pre},
                         {"f1", row.f1},
                         {"code", row.code},
                         {"ok_reps", row.ok_reps},
                         {"total_reps", row.total_reps}});
    }
    j["table"] = table;
    j["total_seconds"] = manifest.total_seconds;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << j.dump(1) << '\n';
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ParseError, "manifest: " + std::string(e.what()));
    }

    RunManifest m;
    const auto& jc = j.at("config");
    m.config.dataset.path = jc.at("dataset").at("path").get<std::string>();
    m.config.dataset.label_column = jc.at("dataset").at("label_column").get<std::string>();
    for (const auto& n : jc.at("dataset").at("nominal_columns"))
        m.config.dataset.nominal_columns.insert(n.get<std::string>());
    for (const auto& n : jc.at("dataset").at("ignore_columns"))
        m.config.dataset.ignore_columns.insert(n.get<std::string>());
    for (std::size_t i = 0; i < 3; ++i) m.config.fractions[i] = jc.at("fractions").at(i);
    m.config.master_seed = jc.at("master_seed").get<std::uint64_t>();
    m.config.repetitions = jc.at("repetitions").get<std::size_t>();
    m.config.output_dir = jc.at("output").get<std::string>();
    for (const auto& s : jc.at("samplers")) m.config.samplers.push_back(sampler_from_json(s));
    for (const auto& k : jc.at("classifiers"))
        m.config.classifiers.push_back(classifier_from_json(k));

    for (const auto& [label, seed] : j.at("subseeds").items())
        m.subseeds.emplace_back(label, seed.get<std::uint64_t>());
    for (const auto& c : j.at("cells")) m.cells.push_back(cell_from_json(c));
    for (const auto& row : j.at("table")) {
        m.table.push_back({row.at("approach").get<std::string>(), row.at("acc").get<double>(),
                           row.at("auc").get<double>(), row.at("rec").get<double>(),
                           row.at("pre").get<double>(), row.at("f1").get<double>(),
                           row.at("code").get<std::string>(),
                           row.at("ok_reps").get<std::size_t>(),
                           row.at("total_reps").get<std::size_t>()});
    }
    m.total_seconds = j.at("total_seconds").get<double>();
    return m;
}

Report emit_report(const RunManifest& manifest) {
    Report report;

    std::ostringstream csv;
    csv << "Approach,Acc,AUC,Rec,Pre,F1,CL\n";
    for (const auto& row : manifest.table) {
        csv << row.approach << ',' << metric_text(row.acc) << ',' << metric_text(row.auc) << ','
            << metric_text(row.rec) << ',' << metric_text(row.pre) << ',' << metric_text(row.f1)
            << ',' << row.code << '\n';
    }
    report.csv = csv.str();

    std::ostringstream md;
    md << "# Resampling comparison\n\n";
    md << "Dataset: `" << manifest.config.dataset.path.string() << "`, "
       << manifest.config.repetitions << " repetition(s), master seed "
       << manifest.config.master_seed << ". Metrics are holdout means over repetitions.\n\n";
    md << "| Approach | Acc | AUC | Rec | Pre | F1 | CL |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& row : manifest.table) {
        md << "| " << row.approach << " | " << metric_text4(row.acc) << " | "
           << metric_text4(row.auc) << " | " << metric_text4(row.rec) << " | "
           << metric_text4(row.pre) << " | " << metric_text4(row.f1) << " | " << row.code
           << " |";
        if (row.ok_reps < row.total_reps)
            md << " (" << (row.total_reps - row.ok_reps) << " failed rep(s))";
        md << '\n';
    }
    md << "\nCL is the modal top-3 ensemble selected by validation AUC in this run; the zoo\n"
          "here is its own, so trios are not comparable across toolkits. Member initials:\n"
          "K = k-nearest neighbors, Ld = linear discriminant, Q = quadratic discriminant,\n"
          "Lr = logistic regression, E = extra trees, A = AdaBoost stumps.\n";
    bool any_failed = false;
    for (const auto& c : manifest.cells) any_failed |= !c.ok;
    if (any_failed) {
        md << "\nFailed cells:\n";
        for (const auto& c : manifest.cells)
            if (!c.ok) md << "- " << c.sampler << " rep " << c.rep << ": " << c.error << '\n';
    }
    report.markdown = md.str();
    return report;
}

// ---------------------------------------------------------------------------
// Texture table extraction

void extract_texture_dataset(const std::filesystem::path& image_dir,
                             const std::filesystem::path& labels_file, TextureMode mode,
                             const TextureConfig& cfg, const std::filesystem::path& out_csv) {
    auto records = read_csv_records(labels_file);
    if (records.size() < 2)
        throw Error(ErrorCode::ParseError, "labels file needs a header and at least one row");
    const auto& header = records.front();
    std::size_t image_col = header.size(), label_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "image") image_col = c;
        if (header[c] == "label") label_col = c;
    }
    if (image_col == header.size() || label_col == header.size())
        throw Error(ErrorCode::ParseError, "labels file needs 'image' and 'label' columns");

    struct Item {
        std::string name;
        std::string label;
        std::vector<SegmentFeatures> records;
    };
    std::vector<Item> items;
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != header.size())
            throw Error(ErrorCode::ParseError, "labels file: ragged record " + std::to_string(r));
        if (records[r][label_col].empty())
            throw Error(ErrorCode::ParseError, "missing label for image " + records[r][image_col]);
        items.push_back({records[r][image_col], records[r][label_col], {}});
    }

    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            auto& item = items[static_cast<std::size_t>(i)];
            std::filesystem::path p = image_dir / item.name;
            if (!p.has_extension()) p.replace_extension(".pgm");
            auto img = load_pgm(p);
            auto filtered = median_filter(img, cfg.median_window);
            auto bg = suppress_background(filtered);
            item.records = extract_features(bg.image, bg.mask, cfg);
        } catch (...) {
#pragma omp critical(rebalance_extract)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_csv.string());
    out << "image_id,segment";
    for (const auto& name : texture_feature_names()) out << ',' << name;
    out << ",label\n";
    for (const auto& item : items) {
        std::string id = std::filesystem::path(item.name).stem().string();
        for (const auto& rec : item.records) {
            bool keep = mode == TextureMode::full ? rec.segment == "whole"
                                                  : rec.segment != "whole";
            if (!keep) continue;
            out << id << ',' << rec.segment;
            for (double v : rec.values) out << ',' << metric_text(v);
            out << ',' << item.label << '\n';
        }
    }
}

}  // namespace rebalance
