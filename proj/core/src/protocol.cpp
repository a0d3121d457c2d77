#include "slstt/protocol.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "json.hpp"
#include "slstt/error.hpp"

namespace slstt {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Sole-database label sets: the classes actually scored, and the full list
// of labels the corpus is known to carry (the difference is excluded as
// too rare rather than rejected).
struct DatasetLabels {
    std::vector<std::string> scored;
    std::vector<std::string> known;
};

const DatasetLabels& dataset_labels(const std::string& dataset) {
    static const std::map<std::string, DatasetLabels> table = {
        {"SMIC-HS",
         {{"negative", "positive", "surprise"}, {"negative", "positive", "surprise"}}},
        {"CASME2",
         {{"Happiness", "Disgust", "Surprise", "Repression", "Others"},
          {"Happiness", "Disgust", "Surprise", "Repression", "Others", "Fear", "Sadness"}}},
        {"SAMM",
         {{"Anger", "Happiness", "Other", "Surprise", "Contempt"},
          {"Anger", "Happiness", "Other", "Surprise", "Contempt", "Disgust", "Fear",
           "Sadness"}}},
    };
    const auto it = table.find(dataset);
    require(it != table.end(), "no sole-database label set for dataset '" + dataset + "'");
    return it->second;
}

}  // namespace

CdeClass cde_label_map(const std::string& dataset, const std::string& label) {
    const std::string l = lower(label);
    if (l == "happiness" || l == "positive") return CdeClass::Positive;
    if (l == "surprise") return CdeClass::Surprise;
    if (l == "disgust" || l == "repression" || l == "anger" || l == "contempt" ||
        l == "fear" || l == "sadness" || l == "negative")
        return CdeClass::Negative;
    if (l == "others" || l == "other") return CdeClass::Excluded;
    fail("no composite mapping for label '" + label + "' (dataset '" + dataset + "')");
}

std::string cde_class_name(CdeClass c) {
    switch (c) {
        case CdeClass::Negative: return "negative";
        case CdeClass::Positive: return "positive";
        case CdeClass::Surprise: return "surprise";
        default: return "excluded";
    }
}

ProtocolSpec make_protocol(ProtocolKind kind, const std::string& dataset_filter,
                           const std::vector<SampleRecord>& records) {
    ProtocolSpec spec;
    spec.kind = kind;
    spec.dataset_filter = dataset_filter;
    if (kind == ProtocolKind::CDE) {
        spec.label_set = {"negative", "positive", "surprise"};
        return spec;
    }
    require(!dataset_filter.empty(), "sole-database protocol needs a dataset");
    if (dataset_filter == "SYNTH") {
        std::set<std::string> labels;
        for (const auto& r : records)
            if (r.dataset == "SYNTH") labels.insert(r.label);
        require(labels.size() >= 2, "synthetic manifest carries fewer than two labels");
        spec.label_set.assign(labels.begin(), labels.end());
    } else {
        spec.label_set = dataset_labels(dataset_filter).scored;
    }
    return spec;
}

std::optional<int> map_label(const ProtocolSpec& spec, const std::string& dataset,
                             const std::string& label) {
    if (spec.kind == ProtocolKind::CDE) {
        const CdeClass c = cde_label_map(dataset, label);
        if (c == CdeClass::Excluded) return std::nullopt;
        const auto it =
            std::find(spec.label_set.begin(), spec.label_set.end(), cde_class_name(c));
        return static_cast<int>(it - spec.label_set.begin());
    }
    const auto it = std::find(spec.label_set.begin(), spec.label_set.end(), label);
    if (it != spec.label_set.end()) return static_cast<int>(it - spec.label_set.begin());
    if (dataset == "SYNTH") fail("unknown synthetic label '" + label + "'");
    const auto& known = dataset_labels(dataset).known;
    if (std::find(known.begin(), known.end(), label) != known.end()) return std::nullopt;
    fail("unknown label '" + label + "' for dataset '" + dataset + "'");
}

std::vector<Fold> loso_splits(const std::vector<ClipSample>& samples) {
    require(!samples.empty(), "cannot split an empty sample list");
    std::map<std::pair<std::string, std::string>, Fold> folds;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto key = std::make_pair(samples[i].dataset, samples[i].subject_id);
        auto& fold = folds[key];
        fold.dataset = samples[i].dataset;
        fold.subject_id = samples[i].subject_id;
        fold.test.push_back(static_cast<int>(i));
    }
    std::vector<Fold> out;
    out.reserve(folds.size());
    for (auto& [key, fold] : folds) {
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (std::make_pair(samples[i].dataset, samples[i].subject_id) != key)
                fold.train.push_back(static_cast<int>(i));
        out.push_back(std::move(fold));
    }
    return out;  // std::map iteration already orders by (dataset, subject)
}

namespace {

void finalize_report(ProtocolReport& report) {
    const auto [acc, f1] = accuracy_and_macro_f1(report.pooled);
    report.accuracy = acc;
    report.macro_f1 = f1;
    report.uf1_value = uf1(report.pooled);
    report.uar_value = uar(report.pooled);
    report.degenerate = degenerate_classes(report.pooled);
}

}  // namespace

ProtocolReport run_protocol(const std::vector<ClipSample>& samples, const ProtocolSpec& spec,
                            const ModelSpec& model, const TrainConfig& config) {
    require(static_cast<int>(spec.label_set.size()) == model.classes,
            "model class count does not match the protocol label set");
    ProtocolReport report;
    report.spec = spec;
    report.pooled = ConfusionMatrix(spec.label_set);

    const auto folds = loso_splits(samples);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const Fold& fold = folds[f];
        require(!fold.train.empty(), "fold for subject '" + fold.subject_id +
                                         "' (" + fold.dataset +
                                         ") has an empty training set");
        std::vector<ClipSample> train_set, test_set;
        for (int i : fold.train) train_set.push_back(samples[i]);
        for (int i : fold.test) test_set.push_back(samples[i]);

        TrainConfig fold_config = config;
        fold_config.seed = Rng::derive(config.seed, {0xF01D, f}).next_u64();
        NamedTensors init = init_model(model, fold_config.seed);
        TrainResult trained = train(std::move(init), train_set, model, fold_config);
        const std::vector<int> preds = predict(trained.weights, test_set, model);

        FoldResult fr;
        fr.dataset = fold.dataset;
        fr.subject_id = fold.subject_id;
        fr.confusion = ConfusionMatrix(spec.label_set);
        for (std::size_t i = 0; i < test_set.size(); ++i) {
            fr.confusion.add(test_set[i].label, preds[i]);
            fr.test_sample_ids.push_back(test_set[i].sample_id);
            fr.truths.push_back(test_set[i].label);
            fr.predictions.push_back(preds[i]);
            auto [it, inserted] =
                report.by_dataset.try_emplace(test_set[i].dataset, spec.label_set);
            it->second.add(test_set[i].label, preds[i]);
        }
        long long diag = 0;
        for (int c = 0; c < fr.confusion.classes(); ++c) diag += fr.confusion.at(c, c);
        fr.accuracy = static_cast<double>(diag) / static_cast<double>(test_set.size());
        report.pooled += fr.confusion;
        report.folds.push_back(std::move(fr));
    }
    finalize_report(report);
    return report;
}

ProtocolReport score_predictions(const std::vector<ClipSample>& samples,
                                 const std::vector<int>& predictions,
                                 const ProtocolSpec& spec) {
    require(samples.size() == predictions.size(), "prediction/sample count mismatch");
    require(!samples.empty(), "nothing to score");
    ProtocolReport report;
    report.spec = spec;
    report.pooled = ConfusionMatrix(spec.label_set);
    FoldResult fr;
    fr.dataset = spec.dataset_filter.empty() ? "all" : spec.dataset_filter;
    fr.subject_id = "all";
    fr.confusion = ConfusionMatrix(spec.label_set);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        fr.confusion.add(samples[i].label, predictions[i]);
        fr.test_sample_ids.push_back(samples[i].sample_id);
        fr.truths.push_back(samples[i].label);
        fr.predictions.push_back(predictions[i]);
        auto [it, inserted] = report.by_dataset.try_emplace(samples[i].dataset, spec.label_set);
        it->second.add(samples[i].label, predictions[i]);
    }
    long long diag = 0;
    for (int c = 0; c < fr.confusion.classes(); ++c) diag += fr.confusion.at(c, c);
    fr.accuracy = static_cast<double>(diag) / static_cast<double>(samples.size());
    report.pooled += fr.confusion;
    report.folds.push_back(std::move(fr));
    finalize_report(report);
    return report;
}

namespace {

nlohmann::json confusion_json(const ConfusionMatrix& cm) {
    nlohmann::json rows = nlohmann::json::array();
    for (int t = 0; t < cm.classes(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 0; p < cm.classes(); ++p) row.push_back(cm.at(t, p));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

std::string report_json(const ProtocolReport& report) {
    nlohmann::json j;
    j["protocol"] = report.spec.kind == ProtocolKind::CDE ? "CDE" : "SDE";
    j["dataset"] = report.spec.dataset_filter.empty() ? "composite" : report.spec.dataset_filter;
    j["label_set"] = report.spec.label_set;
    j["folds"] = nlohmann::json::array();
    for (const auto& f : report.folds)
        j["folds"].push_back({{"dataset", f.dataset},
                              {"subject", f.subject_id},
                              {"confusion", confusion_json(f.confusion)},
                              {"accuracy", f.accuracy},
                              {"samples", f.test_sample_ids}});
    j["pooled"] = {{"confusion", confusion_json(report.pooled)},
                   {"accuracy", report.accuracy},
                   {"macro_f1", report.macro_f1},
                   {"uf1", report.uf1_value},
                   {"uar", report.uar_value},
                   {"degenerate_classes", report.degenerate}};
    nlohmann::json per_dataset = nlohmann::json::object();
    for (const auto& [dataset, cm] : report.by_dataset) {
        const auto [acc, f1] = accuracy_and_macro_f1(cm);
        per_dataset[dataset] = {{"confusion", confusion_json(cm)},
                                {"accuracy", acc},
                                {"macro_f1", f1},
                                {"uf1", uf1(cm)},
                                {"uar", uar(cm)}};
    }
    j["per_dataset"] = per_dataset;
    return j.dump(2);
}

void write_report_csv(std::ostream& os, const ProtocolReport& report) {
    os << "# pooled\n";
    write_confusion_csv(os, report.pooled);
    for (const auto& f : report.folds) {
        os << "# fold " << f.dataset << " " << f.subject_id << "\n";
        write_confusion_csv(os, f.confusion);
    }
}

}  // namespace slstt
