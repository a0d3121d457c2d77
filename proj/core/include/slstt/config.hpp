#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "slstt/flow.hpp"
#include "slstt/model.hpp"
#include "slstt/trainer.hpp"

namespace slstt {

/// Flat "key = value" configuration ('#' comments). Keys are checked
/// against the documented set so typos fail loudly; command-line flags
/// override file values via set().
class Config {
public:
    Config() = default;
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Typed views assembled from the documented keys.
ModelSpec model_spec_from(const Config& config);
TrainConfig train_config_from(const Config& config);
FlowParams flow_params_from(const Config& config);

}  // namespace slstt
