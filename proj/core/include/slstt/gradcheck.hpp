#pragma once

#include <functional>
#include <vector>

#include "slstt/tensor.hpp"

namespace slstt {

/// Scalar function of a parameter list, evaluated tape-free.
using ScalarFn = std::function<double(const std::vector<Tensor>&)>;

/// Central-difference gradient estimate, (f(p+h) - f(p-h)) / 2h per
/// coordinate. The independent oracle behind every gradient test.
std::vector<Tensor> finite_difference_gradient(const ScalarFn& f,
                                               const std::vector<Tensor>& params,
                                               double h);

/// Worst-case deviation between an analytic gradient and the central
/// difference oracle, measured as |a - fd| / max(1, |a|, |fd|).
struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_param = 0;
    std::size_t worst_index = 0;
};

GradCheckResult compare_gradients(const std::vector<Tensor>& analytic,
                                  const std::vector<Tensor>& finite_diff);

}  // namespace slstt
