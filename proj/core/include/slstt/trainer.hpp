#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slstt/model.hpp"

namespace slstt {

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    double momentum = 0.9;
    int batch_size = 4;
    int epochs = 50;
    double min_learning_rate = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One clip ready for the model: F input images plus its label and the
/// identifiers the evaluation protocols group by.
struct ClipSample {
    std::string sample_id;
    std::string dataset;
    std::string subject_id;
    int label = -1;
    std::vector<Image> inputs;
};

struct EpochRecord {
    int epoch = 0;
    int step = 0;  // optimizer steps taken so far
    double lr = 0.0;
    double loss = 0.0;
    double train_accuracy = 0.0;
};

struct TrainResult {
    NamedTensors weights;
    std::vector<EpochRecord> log;
};

/// Full training loop: per-epoch deterministic shuffle, batched forward and
/// backward over one tape per batch, SGD-momentum update under the cosine
/// schedule. If `log_stream` is given, each epoch appends one JSON line
/// {epoch, step, lr, loss, train_accuracy}.
TrainResult train(NamedTensors initial, const std::vector<ClipSample>& samples,
                  const ModelSpec& spec, const TrainConfig& config,
                  std::ostream* log_stream = nullptr);

/// Tape-free argmax predictions for each sample.
std::vector<int> predict(const NamedTensors& params, const std::vector<ClipSample>& samples,
                         const ModelSpec& spec);

double accuracy_of(const std::vector<int>& predictions, const std::vector<ClipSample>& samples);

}  // namespace slstt
