#include "slstt/temporal.hpp"

#include <cmath>
#include <string>

#include "slstt/encoder.hpp"
#include "slstt/error.hpp"

namespace slstt {

LstmState LstmState::zeros(int width) {
    return {Tensor::zeros({width}), Tensor::zeros({width})};
}

Tensor mean_aggregate(const std::vector<Tensor>& features) {
    require(!features.empty(), "mean_aggregate needs at least one feature");
    Tensor z = features[0];
    for (std::size_t t = 2; t <= features.size(); ++t) {
        const double tt = static_cast<double>(t);
        z = add(scale(z, (tt - 1.0) / tt), scale(features[t - 1], 1.0 / tt));
    }
    return z;
}

LstmState lstm_step(const Tensor& input, const LstmState& state, const LstmLayerWeights& w) {
    require(input.rank() == 1 && state.hidden.rank() == 1, "lstm_step expects vectors");
    Tensor cat = concat_vec(state.hidden, input);  // [h, x], length 2D
    auto gate = [&](const Tensor& wm, const Tensor& b) {
        return sigmoid(add(vecmat(cat, wm), b));
    };
    Tensor f = gate(w.wf, w.bf);
    Tensor i = gate(w.wi, w.bi);
    Tensor o = gate(w.wo, w.bo);
    Tensor candidate = tanh_op(add(vecmat(cat, w.wc), w.bc));
    Tensor cell = add(mul(f, state.cell), mul(i, candidate));
    return {mul(o, tanh_op(cell)), cell};
}

Tensor lstm_aggregate(const std::vector<Tensor>& features,
                      const std::vector<LstmLayerWeights>& layers) {
    require(!features.empty(), "lstm_aggregate needs at least one feature");
    require(!layers.empty(), "lstm_aggregate needs layer weights");
    const int width = features[0].dim(0);
    std::vector<LstmState> states(layers.size(), LstmState::zeros(width));
    for (const Tensor& feature : features) {
        Tensor x = feature;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            states[l] = lstm_step(x, states[l], layers[l]);
            x = states[l].hidden;
        }
    }
    return states.back().hidden;
}

Tensor aggregate(const std::vector<Tensor>& features, Aggregator kind,
                 const NamedTensors& params) {
    if (kind == Aggregator::Mean) return mean_aggregate(features);
    return lstm_aggregate(features, bind_lstm(params));
}

Tensor classify(const Tensor& feature, const HeadWeights& head) {
    Tensor h = gelu(add(vecmat(feature, head.fc1_w), head.fc1_b));
    return softmax(add(vecmat(h, head.fc2_w), head.fc2_b), 0);
}

Tensor cross_entropy(const std::vector<Tensor>& probabilities, const std::vector<int>& labels) {
    require(!probabilities.empty(), "cross_entropy needs at least one sample");
    require(probabilities.size() == labels.size(), "probabilities/labels length mismatch");
    Tensor total = Tensor::zeros({1});
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const Tensor& p = probabilities[i];
        require(p.rank() == 1, "probability vectors expected");
        require(labels[i] >= 0 && labels[i] < p.dim(0),
                "label out of range at sample " + std::to_string(i));
        total = add(total, log_clamped(pick(p, labels[i]), kCrossEntropyEps));
    }
    return scale(total, -1.0 / static_cast<double>(probabilities.size()));
}

int argmax(const Tensor& v) {
    require(v.rank() == 1 && v.dim(0) >= 1, "argmax expects a nonempty vector");
    int best = 0;
    for (int i = 1; i < v.dim(0); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

// ---------------------------------------------------------------------------
// Parameter binding
// ---------------------------------------------------------------------------

void init_lstm_params(NamedTensors& params, int width, Rng& rng) {
    require(width > 0, "lstm width must be positive");
    // At zero-bias init the output and input gates each sit at sigmoid(0)=0.5,
    // so a layer attenuates its input by ~1/4; sqrt(8/D) gives the 2D->D gate
    // matrices unit forward gain so the 3-layer stack stays trainable.
    const double std = std::sqrt(8.0 / static_cast<double>(width));
    for (int l = 0; l < kLstmLayers; ++l) {
        const std::string p = "lstm" + std::to_string(l) + ".";
        for (const char* g : {"wf", "wi", "wo", "wc"})
            params.add(p + g, Tensor::truncated_normal({2 * width, width}, rng, std, 2.0));
        for (const char* g : {"bf", "bi", "bo", "bc"})
            params.add(p + g, Tensor::zeros({width}), /*decay=*/false);
    }
}

void init_head_params(NamedTensors& params, int width, int hidden, int classes, Rng& rng) {
    require(width > 0 && hidden > 0 && classes >= 2, "head dimensions out of range");
    const double std = init_stddev(width);
    params.add("head.fc1.weight", Tensor::truncated_normal({width, hidden}, rng, std, 2.0));
    params.add("head.fc1.bias", Tensor::zeros({hidden}), false);
    params.add("head.fc2.weight", Tensor::truncated_normal({hidden, classes}, rng, std, 2.0));
    params.add("head.fc2.bias", Tensor::zeros({classes}), false);
}

std::vector<LstmLayerWeights> bind_lstm(const NamedTensors& params) {
    std::vector<LstmLayerWeights> layers;
    for (int l = 0; l < kLstmLayers; ++l) {
        const std::string p = "lstm" + std::to_string(l) + ".";
        require(params.contains(p + "wf"),
                "aggregator is lstm but weights '" + p + "wf' are missing");
        layers.push_back(LstmLayerWeights{params.get(p + "wf"), params.get(p + "bf"),
                                          params.get(p + "wi"), params.get(p + "bi"),
                                          params.get(p + "wo"), params.get(p + "bo"),
                                          params.get(p + "wc"), params.get(p + "bc")});
    }
    return layers;
}

HeadWeights bind_head(const NamedTensors& params) {
    return {params.get("head.fc1.weight"), params.get("head.fc1.bias"),
            params.get("head.fc2.weight"), params.get("head.fc2.bias")};
}

}  // namespace slstt
