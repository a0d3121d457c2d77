#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slstt/manifest.hpp"

namespace slstt {

/// Desk-scale stand-in for the restricted corpora: textured clips with a
/// blob whose displacement ramps 0 -> peak -> 0 along a class-specific
/// direction, apex at the middle frame.
struct SynthSpec {
    std::uint64_t seed = 0;
    int subjects = 4;
    int samples_per_subject = 2;
    std::vector<double> class_directions_deg = {0.0, 90.0, 180.0};
    int image_side = 32;
    int frames = 7;  // per clip, odd keeps the apex centered
    double peak_displacement = 3.0;  // pixels
    double noise_std = 1.0;

    void validate() const;
    int classes() const { return static_cast<int>(class_directions_deg.size()); }
    /// Label string of class k, e.g. "deg090".
    std::string label_of(int k) const;
};

/// Writes frames (PGM) plus a manifest.csv into out_dir and returns the
/// records. Deterministic: one seed, one byte stream.
std::vector<SampleRecord> synth_generate(const SynthSpec& spec, const std::string& out_dir);

}  // namespace slstt
