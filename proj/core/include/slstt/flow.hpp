#pragma once

#include <string>
#include <vector>

#include "slstt/image.hpp"

namespace slstt {

/// Dense displacement field. (u, v) is the motion of each pixel FROM the
/// reference frame TO the target frame, in pixels.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<double> u;
    std::vector<double> v;

    FlowField() = default;
    FlowField(int w, int h);

    double magnitude(int x, int y) const;
    /// Mean magnitude over the interior, excluding a pixel border of the
    /// given width (variational estimates are unreliable at borders).
    double mean_magnitude(int border = 0) const;
    /// Mean (u, v) over the interior.
    std::pair<double, double> mean_vector(int border = 0) const;
};

struct FlowParams {
    double smoothness_weight = 15.0;  // alpha^2 in the Horn-Schunck objective
    int iterations = 100;             // relaxation sweeps per pyramid level
    int pyramid_levels = 3;
};

/// Dense flow from a coarse-to-fine Horn-Schunck scheme: brightness
/// constancy data term plus smoothness_weight times the flow gradient
/// penalty, fixed iteration count per level. Deterministic: identical
/// inputs give bit-identical fields.
FlowField estimate_flow(const Image& reference, const Image& target, const FlowParams& params);

/// One field per frame, each computed between frames[onset_index]
/// (reference) and frames[t] (target). The field at the onset frame is
/// exactly zero without invoking the estimator.
std::vector<FlowField> long_term_flow(const std::vector<Image>& frames, int onset_index,
                                      const FlowParams& params);

/// Flow direction as hue on a fixed color wheel (angle 0 = red, counter
/// clockwise through yellow/green), magnitude as saturation clamped at
/// max_magnitude, full value. Zero flow maps to white. Output channels are
/// continuous 0..255.
Image colorize_flow(const FlowField& field, double max_magnitude);

/// Colorize with max_magnitude taken from the field's own peak magnitude.
Image colorize_flow_auto(const FlowField& field);

// Binary layout: magic "SLFL", u32 width, u32 height, then width*height
// (u, v) pairs as 32-bit little-endian floats, row-major.
void save_flow(const std::string& path, const FlowField& field);
FlowField load_flow(const std::string& path);

}  // namespace slstt
