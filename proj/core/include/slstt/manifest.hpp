#pragma once

#include <map>
#include <string>
#include <vector>

#include "slstt/image.hpp"

namespace slstt {

struct SampleRecord {
    std::string sample_id;
    std::string dataset;  // SMIC-HS | CASME2 | SAMM | SYNTH
    std::string subject_id;
    std::string frames_dir;
    int onset = 0;
    int apex = 0;
    int offset = 0;
    std::string label;
    std::string landmarks_dir;  // empty when the corpus ships no landmarks

    int frame_count() const { return offset - onset + 1; }
};

struct Manifest {
    std::vector<SampleRecord> samples;
    /// Mean clip length per dataset, the default interpolation target.
    std::map<std::string, double> mean_frames;
};

/// Zero-padded frame filename inside the sample's frames_dir; probes .pgm
/// then .ppm.
std::string frame_path(const SampleRecord& record, int index);
Image load_frame(const SampleRecord& record, int index);

/// Per-frame landmark filename (same zero-padded scheme, .txt).
std::string landmark_path(const SampleRecord& record, int index);

/// Columns: sample_id,dataset,subject_id,frames_dir,onset,apex,offset,label
/// and optionally landmarks_dir. Header required. Each validation failure
/// names the offending sample or line. With verify_frames, every frame in
/// [onset, offset] must exist and share dimensions.
Manifest load_manifest(const std::string& path, bool verify_frames = true);

void save_manifest(const std::string& path, const std::vector<SampleRecord>& records);

}  // namespace slstt
