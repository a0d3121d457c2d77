#pragma once

#include <vector>

#include "slstt/flow.hpp"
#include "slstt/image.hpp"

namespace slstt {

/// Fractional timestamps to synthesize, in priority order.
struct InterpolationPlan {
    std::vector<double> timestamps;
    int target_count = 0;
};

/// Apex-first midpoint schedule. Each pass takes the midpoints of
/// consecutive entries in the current timeline, ordered by distance to the
/// apex (nearest first, left of apex before right on ties), then repeats on
/// the densified timeline until target_count timestamps are planned.
InterpolationPlan build_interpolation_queue(int onset, int apex, int offset, int target_count);

enum class MidpointMode { Blend, FlowWarp };

/// Synthesize the frame halfway between two frames. Blend averages
/// pixelwise; FlowWarp estimates flow between the frames, pulls each half
/// way toward the other, and averages the two warps.
Image interpolate_midpoint(const Image& left, const Image& right, MidpointMode mode,
                           const FlowParams& flow_params = {});

/// Indices of the apex frame and its (F-1)/2 neighbors on each side,
/// clamped to [0, length-1] (boundary frames repeat so exactly F indices
/// come back).
std::vector<int> select_frames(int length, int apex_index, int count = 11);

}  // namespace slstt
