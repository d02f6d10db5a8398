#pragma once

#include <cstdint>
#include <vector>

#include "tensor.hpp"

namespace shark::kernels {

// Raw numeric kernels behind the autodiff primitives. All of them are
// single-threaded with a fixed summation order so repeated runs are
// bit-identical.

/// Cross-correlation (no kernel flip) with zero padding and stride 1.
/// weight is (out_c, in_c, kh, kw); bias, when non-null, is (1, out_c, 1, 1).
/// padding must equal (kh-1)/2 so the spatial size is preserved.
Tensor conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor* bias, int64_t padding);
Tensor conv2d_backward_input(const Tensor& grad_out, const Tensor& weight, const Shape& x_shape,
                             int64_t padding);
Tensor conv2d_backward_weight(const Tensor& grad_out, const Tensor& x, const Shape& w_shape,
                              int64_t padding);
Tensor conv2d_backward_bias(const Tensor& grad_out);

/// Depthwise correlation with a fixed odd-sized 2-D kernel and reflect-101
/// border handling; every channel is filtered with the same kernel. Taps are
/// accumulated in double, row-major, and rounded to float once per pixel.
Tensor filter2d_reflect(const Tensor& x, const std::vector<float>& kernel, int64_t ksize);
Tensor filter2d_reflect_backward(const Tensor& grad_out, const std::vector<float>& kernel,
                                 int64_t ksize);

/// 2x2 max pooling with stride 2. argmax records the flat input index that
/// produced each output value (first maximum in row-major window order).
Tensor max_pool2_forward(const Tensor& x, std::vector<int64_t>& argmax);
Tensor max_pool2_backward(const Tensor& grad_out, const std::vector<int64_t>& argmax,
                          const Shape& x_shape);

Tensor global_avg_pool_forward(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& grad_out, const Shape& x_shape);
Tensor global_max_pool_forward(const Tensor& x, std::vector<int64_t>& argmax);
Tensor global_max_pool_backward(const Tensor& grad_out, const std::vector<int64_t>& argmax,
                                const Shape& x_shape);

Tensor channel_sum_forward(const Tensor& x);
Tensor channel_sum_backward(const Tensor& grad_out, const Shape& x_shape);
Tensor channel_mean_forward(const Tensor& x);
Tensor channel_mean_backward(const Tensor& grad_out, const Shape& x_shape);
/// Per-pixel max over channels; argmax stores the winning channel per pixel
/// (first maximum in channel order).
Tensor channel_max_forward(const Tensor& x, std::vector<int64_t>& argmax);
Tensor channel_max_backward(const Tensor& grad_out, const std::vector<int64_t>& argmax,
                            const Shape& x_shape);

/// Doubling bilinear upsample, align-corners = false, edges clamped.
Tensor upsample2_forward(const Tensor& x);
Tensor upsample2_backward(const Tensor& grad_out, const Shape& x_shape);

/// General bilinear resample with the same sampling convention as
/// upsample2_forward. Forward-only (dataset resizing).
Tensor resize_bilinear(const Tensor& x, int64_t out_h, int64_t out_w);

/// Reflect-101 padding / inverse crop. Forward-only (inference tiling).
Tensor reflect_pad(const Tensor& x, int64_t top, int64_t bottom, int64_t left, int64_t right);
Tensor crop(const Tensor& x, int64_t top, int64_t left, int64_t out_h, int64_t out_w);

/// Reflect-101 index fold; valid for any offset once size >= 2.
inline int64_t reflect_index(int64_t i, int64_t size) {
  if (size == 1) return 0;
  int64_t period = 2 * (size - 1);
  i %= period;
  if (i < 0) i += period;
  return i < size ? i : period - i;
}

/// Normalized 2-D Gaussian taps, built in double and rounded to float.
std::vector<float> gaussian_kernel(int64_t size, double sigma);

}  // namespace shark::kernels
