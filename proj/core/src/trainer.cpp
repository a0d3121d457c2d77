#include "slstt/trainer.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "slstt/error.hpp"
#include "slstt/optim.hpp"

namespace slstt {

void TrainConfig::validate() const {
    require(learning_rate >= 0.0 && weight_decay >= 0.0 && momentum >= 0.0 &&
                min_learning_rate >= 0.0,
            "training rates must be non-negative");
    require(batch_size >= 1, "batch size must be at least 1");
    require(epochs >= 0, "epoch count must be non-negative");
}

TrainResult train(NamedTensors initial, const std::vector<ClipSample>& samples,
                  const ModelSpec& spec, const TrainConfig& config, std::ostream* log_stream) {
    config.validate();
    spec.validate();
    require(!samples.empty(), "training set is empty");
    for (const auto& s : samples)
        require(s.label >= 0 && s.label < spec.classes,
                "label out of range for sample '" + s.sample_id + "'");

    TrainResult result{std::move(initial), {}};
    const int n = static_cast<int>(samples.size());
    const int batches_per_epoch = (n + config.batch_size - 1) / config.batch_size;
    const int total_steps = std::max(1, config.epochs * batches_per_epoch);
    SgdMomentum optimizer(config.momentum, config.weight_decay);
    int step = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<int> order(samples.size());
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng = Rng::derive(config.seed, {0xE60C, static_cast<std::uint64_t>(epoch)});
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        int correct = 0;
        double lr = config.learning_rate;

        for (int b = 0; b < batches_per_epoch; ++b) {
            const int lo = b * config.batch_size;
            const int hi = std::min(n, lo + config.batch_size);
            Tape tape;
            NamedTensors watched = watch_all(tape, result.weights);
            std::vector<Tensor> probs;
            std::vector<int> labels;
            for (int k = lo; k < hi; ++k) {
                const ClipSample& sample = samples[order[k]];
                try {
                    probs.push_back(clip_probabilities(sample.inputs, watched, spec));
                } catch (const Error& e) {
                    fail("forward pass failed on sample '" + sample.sample_id +
                         "': " + e.what());
                }
                labels.push_back(sample.label);
                correct += argmax(probs.back()) == sample.label;
            }
            Tensor loss = cross_entropy(probs, labels);
            require(std::isfinite(loss.item()),
                    "non-finite loss in batch starting at sample '" +
                        samples[order[lo]].sample_id + "'");
            epoch_loss += loss.item() * static_cast<double>(hi - lo);

            lr = cosine_lr(step, total_steps, config.learning_rate, config.min_learning_rate);
            tape.backward(loss);
            std::vector<Tensor> grads;
            grads.reserve(watched.count());
            for (std::size_t i = 0; i < watched.count(); ++i)
                grads.push_back(tape.grad(watched.entry(i).tensor));
            optimizer.step(result.weights, grads, lr);
            ++step;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.step = step;
        rec.lr = lr;
        rec.loss = epoch_loss / n;
        rec.train_accuracy = static_cast<double>(correct) / n;
        result.log.push_back(rec);
        if (log_stream) {
            nlohmann::json line = {{"epoch", rec.epoch},
                                   {"step", rec.step},
                                   {"lr", rec.lr},
                                   {"loss", rec.loss},
                                   {"train_accuracy", rec.train_accuracy}};
            *log_stream << line.dump() << "\n";
        }
    }
    return result;
}

std::vector<int> predict(const NamedTensors& params, const std::vector<ClipSample>& samples,
                         const ModelSpec& spec) {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& sample : samples)
        out.push_back(argmax(clip_probabilities(sample.inputs, params, spec)));
    return out;
}

double accuracy_of(const std::vector<int>& predictions, const std::vector<ClipSample>& samples) {
    require(predictions.size() == samples.size(), "prediction/sample count mismatch");
    require(!samples.empty(), "no samples to score");
    int correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        correct += predictions[i] == samples[i].label;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace slstt
