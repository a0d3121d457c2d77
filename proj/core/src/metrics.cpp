#include "slstt/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "slstt/error.hpp"

namespace slstt {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> names)
    : class_names(std::move(names)) {
    require(class_names.size() >= 2, "confusion matrix needs at least two classes");
    counts.assign(class_names.size() * class_names.size(), 0);
}

long long ConfusionMatrix::at(int truth, int predicted) const {
    require(truth >= 0 && truth < classes() && predicted >= 0 && predicted < classes(),
            "confusion matrix index out of range");
    return counts[static_cast<std::size_t>(truth) * classes() + predicted];
}

void ConfusionMatrix::add(int truth, int predicted, long long count) {
    require(truth >= 0 && truth < classes() && predicted >= 0 && predicted < classes(),
            "confusion matrix index out of range");
    require(count >= 0, "confusion counts are non-negative");
    counts[static_cast<std::size_t>(truth) * classes() + predicted] += count;
}

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (long long c : counts) t += c;
    return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    require(class_names == other.class_names, "cannot pool matrices over different classes");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    return *this;
}

namespace {

struct ClassTallies {
    long long tp = 0, fp = 0, fn = 0, support = 0;
};

std::vector<ClassTallies> tally(const ConfusionMatrix& cm) {
    const int c = cm.classes();
    std::vector<ClassTallies> out(static_cast<std::size_t>(c));
    for (int t = 0; t < c; ++t)
        for (int p = 0; p < c; ++p) {
            const long long n = cm.at(t, p);
            out[t].support += n;
            if (t == p) {
                out[t].tp += n;
            } else {
                out[t].fn += n;
                out[p].fp += n;
            }
        }
    return out;
}

}  // namespace

double uf1(const ConfusionMatrix& cm) {
    require(cm.classes() >= 2, "uf1 needs at least two classes");
    const auto ts = tally(cm);
    double total = 0.0;
    for (const auto& t : ts) {
        const long long denom = 2 * t.tp + t.fp + t.fn;
        total += denom == 0 ? 0.0 : 2.0 * static_cast<double>(t.tp) / static_cast<double>(denom);
    }
    return total / static_cast<double>(ts.size());
}

double uar(const ConfusionMatrix& cm) {
    require(cm.classes() >= 2, "uar needs at least two classes");
    const auto ts = tally(cm);
    double total = 0.0;
    for (const auto& t : ts)
        total += t.support == 0
                     ? 0.0
                     : static_cast<double>(t.tp) / static_cast<double>(t.support);
    return total / static_cast<double>(ts.size());
}

std::pair<double, double> accuracy_and_macro_f1(const ConfusionMatrix& cm) {
    const long long n = cm.total();
    require(n > 0, "cannot score an empty confusion matrix");
    long long diag = 0;
    for (int i = 0; i < cm.classes(); ++i) diag += cm.at(i, i);
    return {static_cast<double>(diag) / static_cast<double>(n), uf1(cm)};
}

std::vector<std::string> degenerate_classes(const ConfusionMatrix& cm) {
    const auto ts = tally(cm);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i].tp + ts[i].fp + ts[i].fn == 0 || ts[i].support == 0)
            out.push_back(cm.class_names[i]);
    return out;
}

void write_confusion_csv(std::ostream& os, const ConfusionMatrix& cm) {
    os << "true\\predicted";
    for (const auto& name : cm.class_names) os << "," << name;
    os << "\n";
    for (int t = 0; t < cm.classes(); ++t) {
        os << cm.class_names[t];
        for (int p = 0; p < cm.classes(); ++p) os << "," << cm.at(t, p);
        os << "\n";
    }
}

std::vector<std::pair<std::string, std::string>> load_predictions_csv(const std::string& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), "cannot open: " + path);
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "empty prediction file: " + path);
    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::stringstream ss(s);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        return fields;
    };
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    require(header.size() == 3 && header[0] == "sample_id" && header[1] == "true_label" &&
                header[2] == "predicted_label",
            "prediction CSV must start with 'sample_id,true_label,predicted_label': " + path);
    std::vector<std::pair<std::string, std::string>> pairs;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        require(fields.size() == 3,
                "line " + std::to_string(line_no) + " of " + path + " needs 3 fields");
        pairs.emplace_back(fields[1], fields[2]);
    }
    require(!pairs.empty(), "prediction file has no data rows: " + path);
    return pairs;
}

ConfusionMatrix confusion_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::set<std::string> names;
    for (const auto& [t, p] : pairs) {
        names.insert(t);
        names.insert(p);
    }
    ConfusionMatrix cm(std::vector<std::string>(names.begin(), names.end()));
    auto index_of = [&](const std::string& name) {
        const auto it = std::find(cm.class_names.begin(), cm.class_names.end(), name);
        return static_cast<int>(it - cm.class_names.begin());
    };
    for (const auto& [t, p] : pairs) cm.add(index_of(t), index_of(p));
    return cm;
}

}  // namespace slstt
