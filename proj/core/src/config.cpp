#include "slstt/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "slstt/error.hpp"

namespace slstt {

namespace {

constexpr std::array kKnownKeys = {
    "embed.image_side", "embed.patch_side",  "embed.channels",   "model.width",
    "model.layers",     "model.heads",       "model.scale",      "model.aggregator",
    "model.head_hidden", "model.classes",    "model.frames",     "train.lr",
    "train.weight_decay", "train.momentum",  "train.batch_size", "train.epochs",
    "train.min_lr",     "train.seed",        "flow.smoothness",  "flow.iterations",
    "flow.pyramid_levels", "preprocess.midpoint", "preprocess.input_side",
    "preprocess.target_count",
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool known(const std::string& key) {
    return std::find(kKnownKeys.begin(), kKnownKeys.end(), key) != kKnownKeys.end();
}

}  // namespace

Config Config::load(const std::string& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), "cannot open config: " + path);
    Config config;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos,
                path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        require(!key.empty() && !value.empty(),
                path + ":" + std::to_string(line_no) + ": empty key or value");
        config.set(key, value);
    }
    return config;
}

void Config::set(const std::string& key, const std::string& value) {
    require(known(key), "unknown configuration key '" + key + "'");
    values_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) == 1; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

int Config::get_int(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const int v = std::stoi(it->second, &pos);
        require(pos == it->second.size(), "");
        return v;
    } catch (...) {
        fail("configuration key '" + key + "' is not an integer: '" + it->second + "'");
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        require(pos == it->second.size(), "");
        return v;
    } catch (...) {
        fail("configuration key '" + key + "' is not a number: '" + it->second + "'");
    }
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(it->second, &pos);
        require(pos == it->second.size(), "");
        return v;
    } catch (...) {
        fail("configuration key '" + key + "' is not an unsigned integer: '" + it->second +
             "'");
    }
}

ModelSpec model_spec_from(const Config& config) {
    ModelSpec spec;
    spec.embed.image_side = config.get_int("embed.image_side", 32);
    spec.embed.patch_side = config.get_int("embed.patch_side", 8);
    spec.embed.channels = config.get_int("embed.channels", 3);
    spec.embed.width = config.get_int("model.width", 16);
    spec.encoder.layers = config.get_int("model.layers", 2);
    spec.encoder.heads = config.get_int("model.heads", 4);
    spec.encoder.width = spec.embed.width;
    const std::string scale = config.get_string("model.scale", "d");
    if (scale == "d") {
        spec.encoder.scale = AttnScale::SqrtWidth;
    } else if (scale == "dm") {
        spec.encoder.scale = AttnScale::SqrtHeadWidth;
    } else {
        fail("model.scale must be 'd' or 'dm', got '" + scale + "'");
    }
    const std::string agg = config.get_string("model.aggregator", "lstm");
    if (agg == "mean") {
        spec.aggregator = Aggregator::Mean;
    } else if (agg == "lstm") {
        spec.aggregator = Aggregator::Lstm;
    } else {
        fail("model.aggregator must be 'mean' or 'lstm', got '" + agg + "'");
    }
    spec.head_hidden = config.get_int("model.head_hidden", 0);
    spec.classes = config.get_int("model.classes", 3);
    spec.frames = config.get_int("model.frames", 11);
    spec.validate();
    return spec;
}

TrainConfig train_config_from(const Config& config) {
    TrainConfig tc;
    tc.learning_rate = config.get_double("train.lr", 1e-3);
    tc.weight_decay = config.get_double("train.weight_decay", 1e-4);
    tc.momentum = config.get_double("train.momentum", 0.9);
    tc.batch_size = config.get_int("train.batch_size", 4);
    tc.epochs = config.get_int("train.epochs", 50);
    tc.min_learning_rate = config.get_double("train.min_lr", 0.0);
    tc.seed = config.get_u64("train.seed", 0);
    tc.validate();
    return tc;
}

FlowParams flow_params_from(const Config& config) {
    FlowParams fp;
    fp.smoothness_weight = config.get_double("flow.smoothness", 15.0);
    fp.iterations = config.get_int("flow.iterations", 100);
    fp.pyramid_levels = config.get_int("flow.pyramid_levels", 3);
    return fp;
}

}  // namespace slstt
