#pragma once

#include <stdexcept>
#include <string>

namespace slstt {

/// Thrown on any contract violation: shape mismatches, malformed files,
/// degenerate inputs, non-finite values.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string& msg) {
    throw Error(msg);
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) {
        fail(msg);
    }
}

}  // namespace slstt
