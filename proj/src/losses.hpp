#pragma once

#include "autodiff.hpp"

namespace shark::losses {

struct HarrisParams {
  float k = 0.08f;         // trace penalty in the corner response
  float tau = 0.01f;       // threshold as a fraction of the per-image max response
  int64_t gauss_size = 5;  // structure-tensor smoothing window
  double gauss_sigma = 1.0;
  float soft_beta = 50.0f;  // sharpness of the differentiable threshold
};

struct LossWeights {
  float l1 = 10.0f;
  float ssim = 5.0f;
  float harris = 5.0f;
  bool use_ssim = true;
  bool use_harris = true;
};

void validate(const HarrisParams& p);

/// Mean absolute error over all elements.
ad::Var l1_loss(const ad::Var& pred, const ad::Var& target);

/// Local-statistics similarity map, (n,1,h,w): per-channel maps from an 11x11
/// Gaussian window (sigma 1.5, reflected borders), averaged over channels.
/// Inputs are expected in [0,1].
ad::Var ssim_map(const ad::Var& a, const ad::Var& b);
/// 1 - mean(ssim_map).
ad::Var ssim_loss(const ad::Var& pred, const ad::Var& target);

/// Multi-channel corner response, (n,1,h,w): Sobel gradients per channel,
/// structure tensor summed over channels, Gaussian-smoothed, then
/// det - k*trace^2.
ad::Var harris_response(const ad::Var& x, const HarrisParams& p);
/// Binary corner map: 1 where the response exceeds tau * per-image max.
Tensor harris_hard_map(const Tensor& image, const HarrisParams& p);
/// Differentiable corner map: sigmoid(beta * (R - tau * max(R))); the
/// per-image max is treated as a constant so no gradient flows through it.
ad::Var harris_soft_map(const ad::Var& x, const HarrisParams& p);
/// Mean absolute difference between the soft corner maps of the prediction
/// and of the (constant) target image.
ad::Var harris_loss(const ad::Var& pred, const Tensor& target, const HarrisParams& p);

/// Weighted sum of the enabled terms. Disabled terms are neither computed nor
/// added to the graph; their logged value is 0.
struct LossBreakdown {
  ad::Var total;
  float l1 = 0.0f;
  float ssim = 0.0f;
  float harris = 0.0f;
};
LossBreakdown composite_loss(const ad::Var& pred, const Tensor& target, const LossWeights& w,
                             const HarrisParams& hp);

/// Per-image spatial max, (n,1,1,1); shared by the hard and soft corner maps.
Tensor per_image_max(const Tensor& x);

}  // namespace shark::losses
