#include "slstt/model.hpp"

#include "slstt/error.hpp"

namespace slstt {

void ModelSpec::validate() const {
    embed.validate();
    encoder.validate();
    require(embed.width == encoder.width, "embed and encoder widths must agree");
    require(classes >= 2, "need at least two classes");
    require(frames >= 1, "need at least one frame per clip");
}

NamedTensors init_model(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    NamedTensors params;
    Rng rng = Rng::derive(seed, {0x5151});
    init_encoder_params(params, spec.embed, spec.encoder, rng);
    if (spec.aggregator == Aggregator::Lstm) init_lstm_params(params, spec.embed.width, rng);
    init_head_params(params, spec.embed.width, spec.head_hidden_or_default(), spec.classes, rng);
    return params;
}

std::vector<Tensor> frame_features(const std::vector<Image>& inputs, const NamedTensors& params,
                                   const ModelSpec& spec) {
    require(!inputs.empty(), "clip has no frames");
    std::vector<Tensor> features;
    features.reserve(inputs.size());
    for (const Image& img : inputs)
        features.push_back(encode_frame(img, params, spec.embed, spec.encoder).first);
    return features;
}

Tensor clip_probabilities(const std::vector<Image>& inputs, const NamedTensors& params,
                          const ModelSpec& spec) {
    Tensor feature = aggregate(frame_features(inputs, params, spec), spec.aggregator, params);
    return classify(feature, bind_head(params));
}

}  // namespace slstt
