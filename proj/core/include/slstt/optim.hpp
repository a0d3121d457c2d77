#pragma once

#include <vector>

#include "slstt/tensor.hpp"

namespace slstt {

/// Cosine-annealed learning rate over the full run, no restarts:
///   lr_min + 0.5 (lr_max - lr_min) (1 + cos(pi step / total_steps)).
double cosine_lr(int step, int total_steps, double lr_max, double lr_min);

/// SGD with momentum and coupled weight decay:
///   g <- grad + wd * param;  v <- momentum * v + g;  param <- param - lr * v.
/// Decay is skipped for entries whose `decay` flag is off (biases, layer
/// norm parameters, embeddings).
class SgdMomentum {
public:
    SgdMomentum(double momentum, double weight_decay)
        : momentum_(momentum), weight_decay_(weight_decay) {}

    /// One update over all parameters; grads[i] pairs with params.entry(i).
    void step(NamedTensors& params, const std::vector<Tensor>& grads, double lr);

    const std::vector<std::vector<double>>& velocity() const { return velocity_; }

private:
    double momentum_;
    double weight_decay_;
    std::vector<std::vector<double>> velocity_;  // sized on first step
};

}  // namespace slstt
