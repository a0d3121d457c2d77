#pragma once

#include <vector>

#include "slstt/rng.hpp"
#include "slstt/tensor.hpp"

namespace slstt {

enum class Aggregator { Mean, Lstm };

constexpr int kLstmLayers = 3;
constexpr double kCrossEntropyEps = 1e-12;

/// Gate weights of one LSTM layer. Each matrix maps the concatenation
/// [previous hidden, current input] (length 2D) to D.
struct LstmLayerWeights {
    Tensor wf, bf;  // forget
    Tensor wi, bi;  // input
    Tensor wo, bo;  // output
    Tensor wc, bc;  // candidate cell
};

struct LstmState {
    Tensor hidden;  // Z_l^t
    Tensor cell;    // C_t

    static LstmState zeros(int width);
};

/// Two fully connected layers with GELU between, softmax on top.
struct HeadWeights {
    Tensor fc1_w, fc1_b;  // D x D_h
    Tensor fc2_w, fc2_b;  // D_h x C
};

/// Running mean, updated as Z^t = ((t-1)/t) Z^{t-1} + (1/t) feature_t.
Tensor mean_aggregate(const std::vector<Tensor>& features);

/// One LSTM cell update:
///   f,i,o = sigmoid(W {f,i,o} [h, x] + b);  C' = tanh(W_C [h, x] + b_C)
///   C_t = f * C_{t-1} + i * C';  h_t = o * tanh(C_t)
LstmState lstm_step(const Tensor& input, const LstmState& state, const LstmLayerWeights& w);

/// Stacked LSTM run over the feature sequence from zero state; returns the
/// top layer's final hidden vector.
Tensor lstm_aggregate(const std::vector<Tensor>& features,
                      const std::vector<LstmLayerWeights>& layers);

/// Dispatch on aggregator kind; Lstm binds its weights from `params`.
Tensor aggregate(const std::vector<Tensor>& features, Aggregator kind,
                 const NamedTensors& params);

/// softmax(FC2(GELU(FC1(feature)))) — a probability vector.
Tensor classify(const Tensor& feature, const HeadWeights& head);

/// Mean negative log-likelihood of the true classes, logs clamped at
/// kCrossEntropyEps.
Tensor cross_entropy(const std::vector<Tensor>& probabilities, const std::vector<int>& labels);

int argmax(const Tensor& v);

// ---------------------------------------------------------------------------
// Parameter store binding, names:
//   lstm{l}.wf/.bf/.wi/.bi/.wo/.bo/.wc/.bc   (l = 0..2)
//   head.fc1.weight/.bias, head.fc2.weight/.bias
// ---------------------------------------------------------------------------

void init_lstm_params(NamedTensors& params, int width, Rng& rng);
void init_head_params(NamedTensors& params, int width, int hidden, int classes, Rng& rng);

std::vector<LstmLayerWeights> bind_lstm(const NamedTensors& params);
HeadWeights bind_head(const NamedTensors& params);

}  // namespace slstt
