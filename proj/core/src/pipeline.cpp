#include "slstt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <utility>

#include "slstt/error.hpp"
#include "slstt/landmarks.hpp"

namespace slstt {

namespace {

void check_params(const PreprocessParams& params) {
    require(params.input_side >= 8, "preprocess input side must be at least 8");
    require(params.frames >= 1, "preprocess frame count must be positive");
}

// Selected processed frames plus their onset-anchored flow, the common
// intermediate behind the public entry points.
struct ProcessedClip {
    std::vector<Image> frames;
    std::vector<FlowField> fields;
    double peak_magnitude = 0.0;
};

Image geometry_normalize(const Image& img, const PreprocessParams& params) {
    if (img.width == params.input_side && img.height == params.input_side) return img;
    return resize_bilinear(img, params.input_side, params.input_side);
}

ProcessedClip process_clip(const SampleRecord& record, const PreprocessParams& params,
                           double dataset_mean_frames) {
    check_params(params);
    const int count = record.frame_count();
    require(count >= 1, "sample " + record.sample_id + " has no frames");

    // Geometry: landmark-guided alignment to the apex frame when the corpus
    // ships landmarks, plain resize otherwise. Either way every frame lands
    // on the working square.
    std::vector<Image> processed;
    processed.reserve(static_cast<size_t>(count));
    if (!record.landmarks_dir.empty()) {
        const LandmarkSet reference = load_landmarks(landmark_path(record, record.apex));
        const CropSpec crop = crop_square(reference);
        for (int i = 0; i < count; ++i) {
            const LandmarkSet lm = load_landmarks(landmark_path(record, record.onset + i));
            const RigidTransform tf = align_rigid(lm, reference);
            const Image warped = warp_rigid(load_frame(record, record.onset + i), tf);
            processed.push_back(extract_crop(warped, crop, params.input_side));
        }
    } else {
        for (int i = 0; i < count; ++i) {
            processed.push_back(geometry_normalize(load_frame(record, record.onset + i), params));
        }
    }

    // Temporal densification: synthesize enough midpoints to reach the
    // dataset's mean clip length (or an explicit override), apex first.
    const int apex_local = record.apex - record.onset;
    int target = params.target_count;
    if (target < 0) {
        target = std::max(0, static_cast<int>(std::llround(dataset_mean_frames)) - count);
    }
    const InterpolationPlan plan = build_interpolation_queue(0, apex_local, count - 1, target);

    std::map<double, Image> timeline;
    for (int i = 0; i < count; ++i) timeline.emplace(static_cast<double>(i), std::move(processed[i]));
    for (double ts : plan.timestamps) {
        auto hi = timeline.upper_bound(ts);
        require(hi != timeline.begin() && hi != timeline.end(),
                "interpolation timestamp outside the clip for sample " + record.sample_id);
        auto lo = std::prev(hi);
        timeline.emplace(ts, interpolate_midpoint(lo->second, hi->second, params.midpoint, params.flow));
    }

    std::vector<double> times;
    std::vector<Image> seq;
    times.reserve(timeline.size());
    seq.reserve(timeline.size());
    for (auto& [ts, img] : timeline) {
        times.push_back(ts);
        seq.push_back(std::move(img));
    }
    const auto apex_it = std::find(times.begin(), times.end(), static_cast<double>(apex_local));
    require(apex_it != times.end(), "apex frame missing from the timeline");
    const int apex_pos = static_cast<int>(apex_it - times.begin());

    const std::vector<int> selected =
        select_frames(static_cast<int>(seq.size()), apex_pos, params.frames);

    // Long-term flow: every selected frame against the onset frame (the
    // first timeline entry). Clamped selections repeat indices, so fields
    // are cached per index; the onset's own field is exactly zero.
    ProcessedClip clip;
    std::map<int, FlowField> cache;
    for (int idx : selected) {
        auto it = cache.find(idx);
        if (it == cache.end()) {
            FlowField field = idx == 0 ? FlowField(seq[0].width, seq[0].height)
                                       : estimate_flow(seq[0], seq[idx], params.flow);
            it = cache.emplace(idx, std::move(field)).first;
        }
        clip.frames.push_back(seq[idx]);
        clip.fields.push_back(it->second);
    }
    for (const FlowField& field : clip.fields) {
        for (int y = 0; y < field.height; ++y) {
            for (int x = 0; x < field.width; ++x) {
                clip.peak_magnitude = std::max(clip.peak_magnitude, field.magnitude(x, y));
            }
        }
    }
    return clip;
}

// Shared clip-level normalization: saturation reaches 1 at the clip's peak
// magnitude so frames within a clip are comparable.
std::vector<Image> colorize_clip(const ProcessedClip& clip) {
    const double cap = clip.peak_magnitude > 0.0 ? clip.peak_magnitude : 1.0;
    std::vector<Image> out;
    out.reserve(clip.fields.size());
    for (const FlowField& field : clip.fields) out.push_back(colorize_flow(field, cap));
    return out;
}

std::string indexed_name(const char* stem, int index, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%03d%s", stem, index, ext);
    return buf;
}

}  // namespace

std::vector<Image> preprocess_inputs(const SampleRecord& record, const PreprocessParams& params,
                                     double dataset_mean_frames) {
    const ProcessedClip clip = process_clip(record, params, dataset_mean_frames);
    std::vector<Image> inputs = colorize_clip(clip);
    // Flipped so still regions (white in the flow rendering) become zero and
    // the model input is dominated by motion rather than by the background.
    for (Image& img : inputs) {
        for (double& v : img.data) v = 1.0 - v / 255.0;
    }
    return inputs;
}

std::vector<FlowField> preprocess_flow(const SampleRecord& record, const PreprocessParams& params,
                                       double dataset_mean_frames) {
    return process_clip(record, params, dataset_mean_frames).fields;
}

MaterializedSet materialize(const Manifest& manifest, const ProtocolSpec& spec,
                            const PreprocessParams& params) {
    MaterializedSet out;
    for (const SampleRecord& rec : manifest.samples) {
        if (!spec.dataset_filter.empty() && rec.dataset != spec.dataset_filter) continue;
        if (spec.kind == ProtocolKind::CDE && rec.dataset == "SYNTH") continue;
        const std::optional<int> label = map_label(spec, rec.dataset, rec.label);
        if (!label) {
            ++out.excluded;
            continue;
        }
        ClipSample sample;
        sample.sample_id = rec.sample_id;
        sample.dataset = rec.dataset;
        sample.subject_id = rec.subject_id;
        sample.label = *label;
        sample.inputs = preprocess_inputs(rec, params, manifest.mean_frames.at(rec.dataset));
        out.samples.push_back(std::move(sample));
    }
    require(!out.samples.empty(), "no samples retained by the protocol (filter '" +
                                      spec.dataset_filter + "')");
    return out;
}

void preprocess_to_dir(const SampleRecord& record, const PreprocessParams& params,
                       double dataset_mean_frames, const std::string& out_dir, bool visualize) {
    const ProcessedClip clip = process_clip(record, params, dataset_mean_frames);

    namespace fs = std::filesystem;
    const fs::path base = fs::path(out_dir) / record.sample_id;
    fs::create_directories(base / "frames");
    fs::create_directories(base / "flow");
    if (visualize) fs::create_directories(base / "viz");

    for (size_t i = 0; i < clip.frames.size(); ++i) {
        const Image& frame = clip.frames[i];
        const Image gray = frame.channels == 1 ? frame : to_grayscale(frame);
        write_pgm((base / "frames" / indexed_name("frame", static_cast<int>(i), ".pgm")).string(),
                  gray);
        save_flow((base / "flow" / indexed_name("flow", static_cast<int>(i), ".flo")).string(),
                  clip.fields[i]);
    }
    if (visualize) {
        const std::vector<Image> colored = colorize_clip(clip);
        for (size_t i = 0; i < colored.size(); ++i) {
            write_ppm((base / "viz" / indexed_name("flow", static_cast<int>(i), ".ppm")).string(),
                      colored[i]);
        }
    }
}

}  // namespace slstt
