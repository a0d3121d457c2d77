#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slstt/manifest.hpp"
#include "slstt/metrics.hpp"
#include "slstt/trainer.hpp"

namespace slstt {

/// SDE scores one corpus on its own label set; CDE pools corpora onto the
/// three merged classes {negative, positive, surprise}.
enum class ProtocolKind { SDE, CDE };

struct ProtocolSpec {
    ProtocolKind kind = ProtocolKind::SDE;
    std::string dataset_filter;  // SDE: the corpus; empty for composite
    std::vector<std::string> label_set;
};

enum class CdeClass { Negative, Positive, Surprise, Excluded };

/// Composite-protocol label merge:
///   positive  <- Happiness (and SMIC "positive")
///   surprise  <- Surprise
///   negative  <- Disgust, Repression, Anger, Contempt, Fear, Sadness,
///                SMIC "negative"
///   excluded  <- Others / Other
/// Unknown labels are an error, never silently dropped.
CdeClass cde_label_map(const std::string& dataset, const std::string& label);
std::string cde_class_name(CdeClass c);

/// Resolves the protocol's label set from the manifest: fixed sets for the
/// real corpora, the sorted distinct labels for SYNTH, the three merged
/// classes for CDE.
ProtocolSpec make_protocol(ProtocolKind kind, const std::string& dataset_filter,
                           const std::vector<SampleRecord>& records);

/// Index into spec.label_set, nullopt when the sample is excluded from the
/// protocol (Others under CDE, rare classes under SDE). Unknown labels
/// throw.
std::optional<int> map_label(const ProtocolSpec& spec, const std::string& dataset,
                             const std::string& label);

/// One fold per distinct (dataset, subject) pair, ordered by that key.
struct Fold {
    std::string dataset;
    std::string subject_id;
    std::vector<int> test;   // sample indices
    std::vector<int> train;
};

std::vector<Fold> loso_splits(const std::vector<ClipSample>& samples);

struct FoldResult {
    std::string dataset;
    std::string subject_id;
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    std::vector<std::string> test_sample_ids;
    std::vector<int> truths;
    std::vector<int> predictions;
};

struct ProtocolReport {
    ProtocolSpec spec;
    std::vector<FoldResult> folds;
    ConfusionMatrix pooled;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double uf1_value = 0.0;
    double uar_value = 0.0;
    std::vector<std::string> degenerate;  // classes scored 0 by convention
    std::map<std::string, ConfusionMatrix> by_dataset;
};

/// Full LOSO pass: per fold, train from a fresh fold-derived init on the
/// training subjects and classify the held-out subject; fold matrices pool
/// by summation into the headline metrics.
ProtocolReport run_protocol(const std::vector<ClipSample>& samples, const ProtocolSpec& spec,
                            const ModelSpec& model, const TrainConfig& config);

/// Metrics for a fixed predictor (no training), same report shape with a
/// single pseudo-fold.
ProtocolReport score_predictions(const std::vector<ClipSample>& samples,
                                 const std::vector<int>& predictions,
                                 const ProtocolSpec& spec);

std::string report_json(const ProtocolReport& report);
void write_report_csv(std::ostream& os, const ProtocolReport& report);

}  // namespace slstt
