#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace slstt {

/// Row = true class, column = predicted class.
struct ConfusionMatrix {
    std::vector<std::string> class_names;
    std::vector<long long> counts;  // C x C row-major

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> names);

    int classes() const { return static_cast<int>(class_names.size()); }
    long long at(int truth, int predicted) const;
    void add(int truth, int predicted, long long count = 1);
    long long total() const;

    /// Pool by cell-wise summation; class name lists must match.
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

/// Mean of per-class F1 scores 2TP/(2TP+FP+FN). A class never seen in
/// either truth or prediction scores 0 (see degenerate_classes).
double uf1(const ConfusionMatrix& cm);

/// Mean of per-class recalls TP/N_c; a class absent from the truth
/// contributes 0.
double uar(const ConfusionMatrix& cm);

std::pair<double, double> accuracy_and_macro_f1(const ConfusionMatrix& cm);

/// Classes with TP+FP+FN = 0 (for uf1) or N_c = 0 (for uar): their zero
/// contribution is a convention, so reports flag them.
std::vector<std::string> degenerate_classes(const ConfusionMatrix& cm);

/// CSV with a class-name header row and one leading name column per row.
void write_confusion_csv(std::ostream& os, const ConfusionMatrix& cm);

/// (true, predicted) label-name pairs from a CSV with header
/// "sample_id,true_label,predicted_label".
std::vector<std::pair<std::string, std::string>> load_predictions_csv(const std::string& path);

/// Confusion matrix over the union of label names (sorted), from pairs.
ConfusionMatrix confusion_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace slstt
