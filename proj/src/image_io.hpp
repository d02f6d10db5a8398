#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace shark::img {

/// Loads a strict 8-bit RGB PNG as (1,3,h,w) with values byte/255.
Tensor load_png(const std::string& path);
/// Saves (1,3,h,w) as RGB or (1,1,h,w) as grayscale, byte = round(v*255)
/// clamped to [0,255].
void save_png(const Tensor& image, const std::string& path);

/// Interleaved byte rows <-> planar float tensor.
Tensor from_bytes(const uint8_t* data, int64_t channels, int64_t height, int64_t width);
std::vector<uint8_t> to_bytes(const Tensor& image);

}  // namespace shark::img
