#pragma once

#include <cstdint>
#include <vector>

#include "slstt/encoder.hpp"
#include "slstt/temporal.hpp"

namespace slstt {

/// Everything needed to build and run the classifier: frame encoder
/// geometry, aggregator choice, head and class count, and the number of
/// input frames per clip.
struct ModelSpec {
    EmbedConfig embed;
    EncoderConfig encoder;
    Aggregator aggregator = Aggregator::Lstm;
    int head_hidden = 0;  // 0 means "same as width"
    int classes = 3;
    int frames = 11;  // F

    int head_hidden_or_default() const { return head_hidden > 0 ? head_hidden : embed.width; }
    void validate() const;
};

/// Fresh parameters for the full model, reproducible per seed. Weights come
/// from width-scaled truncated normals (see init_stddev and the LSTM gate
/// rule); biases, the class token and the position embedding start at zero.
NamedTensors init_model(const ModelSpec& spec, std::uint64_t seed);

/// Per-frame class features (the encoder's final class-token states).
std::vector<Tensor> frame_features(const std::vector<Image>& inputs, const NamedTensors& params,
                                   const ModelSpec& spec);

/// Full clip forward pass: encode each frame, aggregate, classify.
Tensor clip_probabilities(const std::vector<Image>& inputs, const NamedTensors& params,
                          const ModelSpec& spec);

}  // namespace slstt
