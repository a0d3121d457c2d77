#include "slstt/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "slstt/error.hpp"

namespace fs = std::filesystem;

namespace slstt {

namespace {

std::string padded(int index) {
    std::ostringstream os;
    os.width(6);
    os.fill('0');
    os << index;
    return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

int parse_index(const std::string& text, const std::string& what, const std::string& sample) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(text, &pos);
        require(pos == text.size(), "");
        return v;
    } catch (...) {
        fail("sample '" + sample + "': " + what + " is not an integer: '" + text + "'");
    }
}

const std::set<std::string> kKnownDatasets = {"SMIC-HS", "CASME2", "SAMM", "SYNTH"};

}  // namespace

std::string frame_path(const SampleRecord& record, int index) {
    const std::string stem = record.frames_dir + "/" + padded(index);
    if (fs::exists(stem + ".pgm")) return stem + ".pgm";
    return stem + ".ppm";
}

Image load_frame(const SampleRecord& record, int index) {
    return read_pnm(frame_path(record, index));
}

std::string landmark_path(const SampleRecord& record, int index) {
    return record.landmarks_dir + "/" + padded(index) + ".txt";
}

Manifest load_manifest(const std::string& path, bool verify_frames) {
    std::ifstream is(path);
    require(static_cast<bool>(is), "cannot open manifest: " + path);
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "manifest is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv(line);
    const std::vector<std::string> required = {"sample_id", "dataset",  "subject_id",
                                              "frames_dir", "onset",   "apex",
                                              "offset",     "label"};
    require(header.size() == required.size() || header.size() == required.size() + 1,
            "manifest header must list the 8 required columns (+ optional landmarks_dir): " +
                path);
    for (std::size_t i = 0; i < required.size(); ++i)
        require(header[i] == required[i],
                "manifest column " + std::to_string(i + 1) + " must be '" + required[i] +
                    "', got '" + header[i] + "'");
    const bool has_landmarks = header.size() == required.size() + 1;
    if (has_landmarks)
        require(header.back() == "landmarks_dir",
                "ninth manifest column must be 'landmarks_dir'");

    Manifest manifest;
    std::set<std::string> seen_ids;
    std::map<std::string, std::pair<double, int>> frame_totals;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        require(fields.size() == header.size(),
                "manifest line " + std::to_string(line_no) + " has " +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(header.size()));

        SampleRecord r;
        r.sample_id = fields[0];
        r.dataset = fields[1];
        r.subject_id = fields[2];
        r.frames_dir = fields[3];
        r.onset = parse_index(fields[4], "onset", r.sample_id);
        r.apex = parse_index(fields[5], "apex", r.sample_id);
        r.offset = parse_index(fields[6], "offset", r.sample_id);
        r.label = fields[7];
        if (has_landmarks) r.landmarks_dir = fields[8];

        require(!r.sample_id.empty(), "manifest line " + std::to_string(line_no) +
                                          ": sample_id is empty");
        require(seen_ids.insert(r.sample_id).second,
                "duplicate sample_id '" + r.sample_id + "'");
        require(kKnownDatasets.count(r.dataset) == 1,
                "sample '" + r.sample_id + "': unknown dataset '" + r.dataset + "'");
        require(!r.subject_id.empty(), "sample '" + r.sample_id + "': subject_id is empty");
        require(!r.label.empty(), "sample '" + r.sample_id + "': label is empty");
        require(r.onset <= r.apex,
                "sample '" + r.sample_id + "': apex precedes onset");
        require(r.apex <= r.offset,
                "sample '" + r.sample_id + "': offset precedes apex");

        if (verify_frames) {
            int w = -1, h = -1;
            for (int t = r.onset; t <= r.offset; ++t) {
                const std::string fp = frame_path(r, t);
                require(fs::exists(fp),
                        "sample '" + r.sample_id + "': missing frame file " + fp);
                Image img = read_pnm(fp);
                if (w < 0) {
                    w = img.width;
                    h = img.height;
                } else {
                    require(img.width == w && img.height == h,
                            "sample '" + r.sample_id + "': frame " + fp +
                                " has mismatched dimensions");
                }
            }
            if (!r.landmarks_dir.empty()) {
                for (int t = r.onset; t <= r.offset; ++t)
                    require(fs::exists(landmark_path(r, t)),
                            "sample '" + r.sample_id + "': missing landmark file " +
                                landmark_path(r, t));
            }
        }

        auto& [total, count] = frame_totals[r.dataset];
        total += r.frame_count();
        count += 1;
        manifest.samples.push_back(std::move(r));
    }
    require(!manifest.samples.empty(), "manifest has no samples: " + path);
    for (const auto& [dataset, tc] : frame_totals)
        manifest.mean_frames[dataset] = tc.first / tc.second;
    return manifest;
}

void save_manifest(const std::string& path, const std::vector<SampleRecord>& records) {
    std::ofstream os(path);
    require(static_cast<bool>(os), "cannot open for writing: " + path);
    bool any_landmarks = false;
    for (const auto& r : records) any_landmarks |= !r.landmarks_dir.empty();
    os << "sample_id,dataset,subject_id,frames_dir,onset,apex,offset,label";
    if (any_landmarks) os << ",landmarks_dir";
    os << "\n";
    for (const auto& r : records) {
        for (const std::string* f : {&r.sample_id, &r.dataset, &r.subject_id, &r.frames_dir,
                                     &r.label, &r.landmarks_dir})
            require(f->find(',') == std::string::npos,
                    "manifest fields must not contain commas: '" + *f + "'");
        os << r.sample_id << "," << r.dataset << "," << r.subject_id << "," << r.frames_dir
           << "," << r.onset << "," << r.apex << "," << r.offset << "," << r.label;
        if (any_landmarks) os << "," << r.landmarks_dir;
        os << "\n";
    }
    require(static_cast<bool>(os), "write failed: " + path);
}

}  // namespace slstt
