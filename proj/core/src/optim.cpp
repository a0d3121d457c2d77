#include "slstt/optim.hpp"

#include <cmath>

#include "slstt/error.hpp"

namespace slstt {

double cosine_lr(int step, int total_steps, double lr_max, double lr_min) {
    require(total_steps >= 1, "total_steps must be at least 1");
    require(step >= 0 && step <= total_steps, "step outside [0, total_steps]");
    const double phase = 3.14159265358979323846 * static_cast<double>(step) /
                         static_cast<double>(total_steps);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

void SgdMomentum::step(NamedTensors& params, const std::vector<Tensor>& grads, double lr) {
    require(grads.size() == params.count(), "gradient list does not match parameter count");
    if (velocity_.empty()) {
        velocity_.resize(params.count());
        for (std::size_t i = 0; i < params.count(); ++i)
            velocity_[i].assign(params.entry(i).tensor.size(), 0.0);
    }
    for (std::size_t i = 0; i < params.count(); ++i) {
        auto& entry = params.entry(i);
        const auto& p = entry.tensor.values();
        const auto& g = grads[i].values();
        require(g.size() == p.size(),
                "gradient shape mismatch for parameter '" + entry.name + "'");
        grads[i].ensure_finite("gradient of '" + entry.name + "'");
        auto& v = velocity_[i];
        std::vector<double> next(p.size());
        const double wd = entry.decay ? weight_decay_ : 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double gk = g[k] + wd * p[k];
            v[k] = momentum_ * v[k] + gk;
            next[k] = p[k] - lr * v[k];
        }
        params.set(entry.name, Tensor(entry.tensor.shape(), std::move(next)));
    }
}

}  // namespace slstt
