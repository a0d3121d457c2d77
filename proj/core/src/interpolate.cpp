#include "slstt/interpolate.hpp"

#include <algorithm>
#include <cmath>

#include "slstt/error.hpp"

namespace slstt {

InterpolationPlan build_interpolation_queue(int onset, int apex, int offset, int target_count) {
    require(onset <= apex && apex <= offset, "need onset <= apex <= offset");
    require(target_count >= 0, "target_count must be non-negative");

    InterpolationPlan plan;
    plan.target_count = target_count;

    std::vector<double> timeline;
    for (int t = onset; t <= offset; ++t) timeline.push_back(t);

    while (static_cast<int>(plan.timestamps.size()) < target_count) {
        std::vector<double> mids;
        for (size_t i = 0; i + 1 < timeline.size(); ++i)
            mids.push_back(0.5 * (timeline[i] + timeline[i + 1]));
        if (mids.empty()) break;  // single-frame clip: nothing to interpolate
        std::stable_sort(mids.begin(), mids.end(), [&](double a, double b) {
            const double da = std::fabs(a - apex), db = std::fabs(b - apex);
            if (da != db) return da < db;
            return a < b;  // equidistant: the earlier side goes first
        });
        for (double m : mids) {
            if (static_cast<int>(plan.timestamps.size()) >= target_count) break;
            plan.timestamps.push_back(m);
        }
        timeline.insert(timeline.end(), mids.begin(), mids.end());
        std::sort(timeline.begin(), timeline.end());
    }
    return plan;
}

Image interpolate_midpoint(const Image& left, const Image& right, MidpointMode mode,
                           const FlowParams& flow_params) {
    require(left.width == right.width && left.height == right.height &&
                left.channels == right.channels,
            "midpoint frames must share dimensions");
    if (mode == MidpointMode::Blend) {
        Image out = left;
        for (size_t i = 0; i < out.data.size(); ++i)
            out.data[i] = 0.5 * (left.data[i] + right.data[i]);
        return out;
    }

    // FlowWarp: pull each endpoint halfway along the flow toward the other
    // and average. Both directions are estimated so the result is symmetric
    // up to the estimator's own asymmetry.
    const FlowField fwd = estimate_flow(left, right, flow_params);
    const FlowField bwd = estimate_flow(right, left, flow_params);
    Image out = left;
    for (int y = 0; y < left.height; ++y)
        for (int x = 0; x < left.width; ++x) {
            const size_t i = static_cast<size_t>(y) * left.width + x;
            for (int c = 0; c < left.channels; ++c) {
                const double a =
                    sample_bilinear(left, x + 0.5 * bwd.u[i], y + 0.5 * bwd.v[i], c);
                const double b =
                    sample_bilinear(right, x + 0.5 * fwd.u[i], y + 0.5 * fwd.v[i], c);
                out.data[i * left.channels + c] = 0.5 * (a + b);
            }
        }
    return out;
}

std::vector<int> select_frames(int length, int apex_index, int count) {
    require(length > 0, "empty sequence");
    require(count > 0 && count % 2 == 1, "frame count must be odd");
    require(apex_index >= 0 && apex_index < length, "apex index out of range");
    std::vector<int> indices;
    indices.reserve(count);
    const int half = (count - 1) / 2;
    for (int i = apex_index - half; i <= apex_index + half; ++i)
        indices.push_back(std::clamp(i, 0, length - 1));
    return indices;
}

}  // namespace slstt
