#pragma once

#include <string>

#include "slstt/tensor.hpp"

namespace slstt {

// Container layout, all integers little-endian:
//   magic "SLST", u32 version = 1, u32 tensor count;
//   per tensor: u16 name length, name bytes (UTF-8), u8 dtype
//   (0 = float32, 1 = float64), u8 rank, rank x u64 dims, row-major payload.
void save_weights(const std::string& path, const NamedTensors& params);

/// Restores tensors with their stored dtype tag, so an immediate re-save
/// reproduces the file byte for byte.
NamedTensors load_weights(const std::string& path);

}  // namespace slstt
