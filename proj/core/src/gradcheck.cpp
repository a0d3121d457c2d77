#include "slstt/gradcheck.hpp"

#include <cmath>

namespace slstt {

std::vector<Tensor> finite_difference_gradient(const ScalarFn& f,
                                               const std::vector<Tensor>& params,
                                               double h) {
    require(h > 0.0, "finite differences: h must be positive");
    std::vector<Tensor> grads;
    grads.reserve(params.size());
    std::vector<Tensor> work = params;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const Tensor& orig = params[p];
        std::vector<double> g(orig.size());
        for (std::size_t i = 0; i < orig.size(); ++i) {
            std::vector<double> plus = orig.values();
            std::vector<double> minus = orig.values();
            plus[i] += h;
            minus[i] -= h;
            work[p] = Tensor(orig.shape(), std::move(plus));
            const double fp = f(work);
            work[p] = Tensor(orig.shape(), std::move(minus));
            const double fm = f(work);
            require(std::isfinite(fp) && std::isfinite(fm),
                    "finite differences: non-finite function value");
            g[i] = (fp - fm) / (2.0 * h);
        }
        work[p] = orig;
        grads.emplace_back(orig.shape(), std::move(g));
    }
    return grads;
}

GradCheckResult compare_gradients(const std::vector<Tensor>& analytic,
                                  const std::vector<Tensor>& finite_diff) {
    require(analytic.size() == finite_diff.size(), "gradient compare: list length mismatch");
    GradCheckResult result;
    for (std::size_t p = 0; p < analytic.size(); ++p) {
        require(analytic[p].shape() == finite_diff[p].shape(),
                "gradient compare: shape mismatch at param " + std::to_string(p));
        const auto& av = analytic[p].values();
        const auto& fv = finite_diff[p].values();
        for (std::size_t i = 0; i < av.size(); ++i) {
            const double denom = std::max({1.0, std::fabs(av[i]), std::fabs(fv[i])});
            const double rel = std::fabs(av[i] - fv[i]) / denom;
            if (rel > result.max_relative_error) {
                result.max_relative_error = rel;
                result.worst_param = p;
                result.worst_index = i;
            }
        }
    }
    return result;
}

}  // namespace slstt
