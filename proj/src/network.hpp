#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "rng.hpp"

namespace shark::net {

inline constexpr int64_t kLevels = 4;
/// Spatial dimensions consumed by the encoder must divide this.
inline constexpr int64_t kSizeMultiple = 1 << kLevels;

struct ModelConfig {
  int64_t base_channels = 16;
  int64_t cbam_reduction = 8;
};

/// Channel width at an encoder/decoder level.
inline int64_t level_channels(const ModelConfig& cfg, int64_t level) {
  return cfg.base_channels << level;
}

struct Conv {
  ad::Var weight;  // (out_c, in_c, k, k)
  ad::Var bias;    // (1, out_c, 1, 1)
};

/// Residual block with channel then spatial attention on the second conv's
/// output. `shortcut` projects the input when the channel count changes.
struct AttentionBlock {
  Conv conv1, conv2;      // 3x3
  Conv mlp1, mlp2;        // 1x1 squeeze/excite pair shared by both pooled paths
  Conv spatial;           // 7x7 over [mean;max] channel stats
  std::optional<Conv> shortcut;  // 1x1
};

/// Channel-preserving refinement: conv3x3 -> silu -> conv3x3 -> silu -> conv1x1.
struct MixBlock {
  Conv conv1, conv2;  // 3x3
  Conv fuse;          // 1x1
};

/// Single-channel multiplicative gate on decoder features.
struct GateBlock {
  Conv gate;  // 1x1 -> 1 channel
};

struct Model {
  ModelConfig config;
  std::vector<AttentionBlock> encoder;  // kLevels entries, shallow to deep
  std::vector<MixBlock> mix;            // one per encoder level
  AttentionBlock bottleneck;
  std::vector<AttentionBlock> decoder;  // indexed by level, applied deep to shallow
  std::vector<GateBlock> gates;         // one per decoder level
  Conv head;                            // 1x1 base -> 3
};

/// Builds the layer structure with zero-filled parameters.
Model make_model(const ModelConfig& cfg);
/// Kaiming-uniform weights (bound sqrt(6/fan_in)), zero biases, consuming the
/// generator in parameter order.
void init_params(Model& model, Pcg32& rng);

/// Visits every parameter tensor in a fixed order with a stable dotted name.
void for_each_param(Model& model, const std::function<void(const std::string&, ad::Var&)>& fn);
int64_t parameter_count(const Model& model);

ad::Var apply_conv(const Conv& c, const ad::Var& x);
ad::Var attention_forward(const AttentionBlock& blk, const ad::Var& x);
ad::Var mix_forward(const MixBlock& blk, const ad::Var& x);
ad::Var gate_forward(const GateBlock& blk, const ad::Var& x);

/// Full derain pass: input and output are (n,3,h,w) in [0,1], h and w
/// divisible by kSizeMultiple.
ad::Var model_forward(const Model& model, const ad::Var& x);

/// Graph-free forward for inference.
Tensor infer(const Model& model, const Tensor& x);
/// Inference at arbitrary resolution: reflect-pads to the size multiple,
/// runs the network, and crops back.
Tensor derain(const Model& model, const Tensor& image);

}  // namespace shark::net
