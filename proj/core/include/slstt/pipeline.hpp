#pragma once

#include <string>
#include <vector>

#include "slstt/interpolate.hpp"
#include "slstt/manifest.hpp"
#include "slstt/protocol.hpp"

namespace slstt {

struct PreprocessParams {
    int input_side = 32;  // working resolution: crop/resize, flow, model input
    int frames = 11;      // F frames selected around the apex
    /// Interpolated timestamps to add per clip; -1 derives the value from
    /// the dataset's mean clip length (mean minus this clip's length).
    int target_count = -1;
    MidpointMode midpoint = MidpointMode::Blend;
    FlowParams flow;
};

/// Full single-sample preprocessing: landmark alignment and cropping when
/// landmarks exist (plain resize otherwise), apex-prioritized midpoint
/// interpolation, apex-centered selection of F frames, onset-anchored flow,
/// and inverted colorization into [0, 1] inputs that are zero where nothing
/// moves.
std::vector<Image> preprocess_inputs(const SampleRecord& record, const PreprocessParams& params,
                                     double dataset_mean_frames);

/// The flow fields behind preprocess_inputs (same selection), for artifact
/// output and inspection.
std::vector<FlowField> preprocess_flow(const SampleRecord& record,
                                       const PreprocessParams& params,
                                       double dataset_mean_frames);

struct MaterializedSet {
    std::vector<ClipSample> samples;
    int excluded = 0;  // dropped by the protocol's label mapping
};

/// Applies the protocol's dataset filter and label mapping to the manifest
/// and preprocesses every retained sample.
MaterializedSet materialize(const Manifest& manifest, const ProtocolSpec& spec,
                            const PreprocessParams& params);

/// Writes per-sample artifacts under out_dir/<sample_id>/: processed frames
/// (frames/*.pgm), long-term flow (flow/*.flo) and optional colorized
/// visualizations (viz/*.ppm). Deterministic, so re-runs are bit-identical.
void preprocess_to_dir(const SampleRecord& record, const PreprocessParams& params,
                       double dataset_mean_frames, const std::string& out_dir, bool visualize);

}  // namespace slstt
