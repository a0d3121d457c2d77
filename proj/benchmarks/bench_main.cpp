// Hot paths: tensor contraction, dense flow, the frame encoder, and one
// training epoch on the desk-scale model.
#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "slstt/flow.hpp"
#include "slstt/model.hpp"
#include "slstt/rng.hpp"
#include "slstt/tensor.hpp"
#include "slstt/trainer.hpp"

using namespace slstt;

namespace {

Image noise_image(int side, int channels, Rng& rng) {
    Image img(side, side, channels);
    for (double& v : img.data) v = rng.uniform();
    return img;
}

Image textured(int side, double dx) {
    Image img(side, side, 1);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            img.data[static_cast<std::size_t>(y * side + x)] =
                120.0 + 60.0 * std::sin((x - dx) * 0.47) * std::sin(y * 0.31);
    return img;
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(1);
    const Tensor a = Tensor::randn({n, n}, rng, 1.0);
    const Tensor b = Tensor::randn({n, n}, rng, 1.0);
    for (auto _ : state) {
        Tensor c = matmul(a, b);
        benchmark::DoNotOptimize(c);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n * n);
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

static void BM_EstimateFlow(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const Image ref = textured(side, 0.0);
    const Image target = textured(side, 1.5);
    const FlowParams params;
    for (auto _ : state) {
        FlowField f = estimate_flow(ref, target, params);
        benchmark::DoNotOptimize(f);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side) * side);
}
BENCHMARK(BM_EstimateFlow)->Arg(32)->Arg(64)->Arg(128);

static void BM_EncodeFrame(benchmark::State& state) {
    const EmbedConfig ec;
    const EncoderConfig cc;
    Rng rng(2);
    NamedTensors params;
    init_encoder_params(params, ec, cc, rng);
    const Image img = noise_image(ec.image_side, ec.channels, rng);
    for (auto _ : state) {
        auto out = encode_frame(img, params, ec, cc);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_EncodeFrame);

static void BM_TrainEpoch(benchmark::State& state) {
    ModelSpec spec;
    spec.aggregator = state.range(0) == 0 ? Aggregator::Mean : Aggregator::Lstm;
    spec.classes = 2;
    spec.frames = 3;
    Rng rng(3);
    std::vector<ClipSample> samples;
    for (int i = 0; i < 4; ++i) {
        ClipSample s;
        s.sample_id = "clip" + std::to_string(i);
        s.dataset = "SYNTH";
        s.subject_id = "subj" + std::to_string(i);
        s.label = i % 2;
        for (int t = 0; t < spec.frames; ++t)
            s.inputs.push_back(noise_image(spec.embed.image_side, spec.embed.channels, rng));
        samples.push_back(std::move(s));
    }
    TrainConfig tc;
    tc.epochs = 1;
    const NamedTensors init = init_model(spec, 7);
    for (auto _ : state) {
        TrainResult r = train(init, samples, spec, tc);
        benchmark::DoNotOptimize(r);
    }
    state.SetLabel(state.range(0) == 0 ? "mean" : "lstm");
}
BENCHMARK(BM_TrainEpoch)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
