#include "kernels.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace shark::kernels {

namespace {

// Copies one (in, ic) plane of x into a zero-padded scratch buffer.
void zero_pad_plane(const Tensor& x, int64_t in, int64_t ic, int64_t pad, float* out) {
  const int64_t h = x.h(), w = x.w();
  const int64_t pw = w + 2 * pad;
  std::fill(out, out + (h + 2 * pad) * pw, 0.0f);
  const float* src = x.plane(in, ic);
  for (int64_t y = 0; y < h; ++y) {
    std::copy(src + y * w, src + (y + 1) * w, out + (y + pad) * pw + pad);
  }
}

void reflect_pad_plane(const Tensor& x, int64_t in, int64_t ic, int64_t pad, float* out) {
  const int64_t h = x.h(), w = x.w();
  const int64_t pw = w + 2 * pad;
  const float* src = x.plane(in, ic);
  for (int64_t y = -pad; y < h + pad; ++y) {
    const float* row = src + reflect_index(y, h) * w;
    float* dst = out + (y + pad) * pw;
    for (int64_t x2 = -pad; x2 < w + pad; ++x2) {
      dst[x2 + pad] = row[reflect_index(x2, w)];
    }
  }
}

void check_conv_args(const Shape& xs, const Shape& ws, int64_t padding) {
  require(ws.h == ws.w && ws.h % 2 == 1, ErrorCode::Shape, "conv kernel must be square and odd");
  require(padding == (ws.h - 1) / 2, ErrorCode::Shape, "conv padding must preserve spatial size");
  require(xs.c == ws.c, ErrorCode::Shape, "conv input channels do not match weight");
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor* bias, int64_t padding) {
  const Shape xs = x.shape(), ws = weight.shape();
  check_conv_args(xs, ws, padding);
  const int64_t oc = ws.n, ic = ws.c, kh = ws.h, kw = ws.w;
  if (bias != nullptr) {
    require(bias->shape() == Shape{1, oc, 1, 1}, ErrorCode::Shape, "conv bias shape mismatch");
  }
  const int64_t h = xs.h, w = xs.w, pw = w + 2 * padding;
  Tensor out(Shape{xs.n, oc, h, w});
  std::vector<float> pad((h + 2 * padding) * pw);
  for (int64_t in = 0; in < xs.n; ++in) {
    if (bias != nullptr) {
      for (int64_t o = 0; o < oc; ++o) {
        float* dst = out.plane(in, o);
        std::fill(dst, dst + h * w, (*bias)[o]);
      }
    }
    for (int64_t i = 0; i < ic; ++i) {
      zero_pad_plane(x, in, i, padding, pad.data());
      for (int64_t o = 0; o < oc; ++o) {
        float* dst = out.plane(in, o);
        const float* wbase = weight.plane(o, i);
        for (int64_t ky = 0; ky < kh; ++ky) {
          for (int64_t kx = 0; kx < kw; ++kx) {
            const float ws_tap = wbase[ky * kw + kx];
            if (ws_tap == 0.0f) continue;
            for (int64_t y = 0; y < h; ++y) {
              const float* prow = pad.data() + (y + ky) * pw + kx;
              float* drow = dst + y * w;
              for (int64_t x2 = 0; x2 < w; ++x2) drow[x2] += ws_tap * prow[x2];
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor conv2d_backward_input(const Tensor& grad_out, const Tensor& weight, const Shape& x_shape,
                             int64_t padding) {
  const Shape gs = grad_out.shape(), ws = weight.shape();
  check_conv_args(x_shape, ws, padding);
  require(gs == Shape{x_shape.n, ws.n, x_shape.h, x_shape.w}, ErrorCode::Shape,
          "conv grad shape mismatch");
  const int64_t oc = ws.n, ic = ws.c, kh = ws.h, kw = ws.w;
  const int64_t h = x_shape.h, w = x_shape.w, pw = w + 2 * padding;
  Tensor dx(x_shape);
  std::vector<float> pad((h + 2 * padding) * pw);
  for (int64_t in = 0; in < x_shape.n; ++in) {
    for (int64_t o = 0; o < oc; ++o) {
      zero_pad_plane(grad_out, in, o, padding, pad.data());
      for (int64_t i = 0; i < ic; ++i) {
        float* dst = dx.plane(in, i);
        const float* wbase = weight.plane(o, i);
        for (int64_t ky = 0; ky < kh; ++ky) {
          for (int64_t kx = 0; kx < kw; ++kx) {
            const float ws_tap = wbase[ky * kw + kx];
            if (ws_tap == 0.0f) continue;
            // The input gradient is the correlation of grad_out with the
            // spatially flipped kernel.
            const int64_t oy = kh - 1 - ky, ox = kw - 1 - kx;
            for (int64_t y = 0; y < h; ++y) {
              const float* prow = pad.data() + (y + oy) * pw + ox;
              float* drow = dst + y * w;
              for (int64_t x2 = 0; x2 < w; ++x2) drow[x2] += ws_tap * prow[x2];
            }
          }
        }
      }
    }
  }
  return dx;
}

Tensor conv2d_backward_weight(const Tensor& grad_out, const Tensor& x, const Shape& w_shape,
                              int64_t padding) {
  const Shape xs = x.shape();
  check_conv_args(xs, w_shape, padding);
  const int64_t oc = w_shape.n, ic = w_shape.c, kh = w_shape.h, kw = w_shape.w;
  const int64_t h = xs.h, w = xs.w, pw = w + 2 * padding;
  std::vector<double> acc(w_shape.numel(), 0.0);
  std::vector<float> pad(ic * (h + 2 * padding) * pw);
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t i = 0; i < ic; ++i) {
      zero_pad_plane(x, in, i, padding, pad.data() + i * (h + 2 * padding) * pw);
    }
    for (int64_t o = 0; o < oc; ++o) {
      const float* gplane = grad_out.plane(in, o);
      for (int64_t i = 0; i < ic; ++i) {
        const float* pbase = pad.data() + i * (h + 2 * padding) * pw;
        for (int64_t ky = 0; ky < kh; ++ky) {
          for (int64_t kx = 0; kx < kw; ++kx) {
            double s = 0.0;
            for (int64_t y = 0; y < h; ++y) {
              const float* prow = pbase + (y + ky) * pw + kx;
              const float* grow = gplane + y * w;
              for (int64_t x2 = 0; x2 < w; ++x2) s += (double)grow[x2] * prow[x2];
            }
            acc[((o * ic + i) * kh + ky) * kw + kx] += s;
          }
        }
      }
    }
  }
  Tensor dw(w_shape);
  for (int64_t j = 0; j < w_shape.numel(); ++j) dw[j] = (float)acc[j];
  return dw;
}

Tensor conv2d_backward_bias(const Tensor& grad_out) {
  const Shape gs = grad_out.shape();
  Tensor db(Shape{1, gs.c, 1, 1});
  for (int64_t o = 0; o < gs.c; ++o) {
    double s = 0.0;
    for (int64_t in = 0; in < gs.n; ++in) {
      const float* p = grad_out.plane(in, o);
      for (int64_t j = 0; j < gs.h * gs.w; ++j) s += p[j];
    }
    db[o] = (float)s;
  }
  return db;
}

Tensor filter2d_reflect(const Tensor& x, const std::vector<float>& kernel, int64_t ksize) {
  require(ksize % 2 == 1 && (int64_t)kernel.size() == ksize * ksize, ErrorCode::Shape,
          "filter kernel must be square and odd");
  const Shape xs = x.shape();
  const int64_t pad = (ksize - 1) / 2, h = xs.h, w = xs.w, pw = w + 2 * pad;
  Tensor out(xs);
  std::vector<float> buf((h + 2 * pad) * pw);
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t c = 0; c < xs.c; ++c) {
      reflect_pad_plane(x, in, c, pad, buf.data());
      float* dst = out.plane(in, c);
      for (int64_t y = 0; y < h; ++y) {
        for (int64_t x2 = 0; x2 < w; ++x2) {
          double s = 0.0;
          for (int64_t ky = 0; ky < ksize; ++ky) {
            const float* prow = buf.data() + (y + ky) * pw + x2;
            const float* krow = kernel.data() + ky * ksize;
            for (int64_t kx = 0; kx < ksize; ++kx) s += (double)krow[kx] * prow[kx];
          }
          dst[y * w + x2] = (float)s;
        }
      }
    }
  }
  return out;
}

Tensor filter2d_reflect_backward(const Tensor& grad_out, const std::vector<float>& kernel,
                                 int64_t ksize) {
  require(ksize % 2 == 1 && (int64_t)kernel.size() == ksize * ksize, ErrorCode::Shape,
          "filter kernel must be square and odd");
  const Shape gs = grad_out.shape();
  const int64_t pad = (ksize - 1) / 2, h = gs.h, w = gs.w;
  Tensor dx(gs);
  for (int64_t in = 0; in < gs.n; ++in) {
    for (int64_t c = 0; c < gs.c; ++c) {
      const float* g = grad_out.plane(in, c);
      float* dst = dx.plane(in, c);
      for (int64_t y = 0; y < h; ++y) {
        for (int64_t x2 = 0; x2 < w; ++x2) {
          const float gv = g[y * w + x2];
          if (gv == 0.0f) continue;
          for (int64_t ky = 0; ky < ksize; ++ky) {
            const int64_t sy = reflect_index(y + ky - pad, h);
            for (int64_t kx = 0; kx < ksize; ++kx) {
              const int64_t sx = reflect_index(x2 + kx - pad, w);
              dst[sy * w + sx] += kernel[ky * ksize + kx] * gv;
            }
          }
        }
      }
    }
  }
  return dx;
}

Tensor max_pool2_forward(const Tensor& x, std::vector<int64_t>& argmax) {
  const Shape xs = x.shape();
  require(xs.h % 2 == 0 && xs.w % 2 == 0, ErrorCode::Shape,
          "max_pool2 needs even spatial dimensions");
  const int64_t oh = xs.h / 2, ow = xs.w / 2;
  Tensor out(Shape{xs.n, xs.c, oh, ow});
  argmax.assign(out.numel(), 0);
  int64_t oi = 0;
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t c = 0; c < xs.c; ++c) {
      const float* p = x.plane(in, c);
      const int64_t base = (in * xs.c + c) * xs.h * xs.w;
      for (int64_t y = 0; y < oh; ++y) {
        for (int64_t x2 = 0; x2 < ow; ++x2, ++oi) {
          int64_t best = (2 * y) * xs.w + 2 * x2;
          float bv = p[best];
          for (int64_t dy = 0; dy < 2; ++dy) {
            for (int64_t dx = 0; dx < 2; ++dx) {
              const int64_t idx = (2 * y + dy) * xs.w + (2 * x2 + dx);
              if (p[idx] > bv) {
                bv = p[idx];
                best = idx;
              }
            }
          }
          out[oi] = bv;
          argmax[oi] = base + best;
        }
      }
    }
  }
  return out;
}

Tensor max_pool2_backward(const Tensor& grad_out, const std::vector<int64_t>& argmax,
                          const Shape& x_shape) {
  Tensor dx(x_shape);
  for (int64_t i = 0; i < grad_out.numel(); ++i) dx[argmax[i]] += grad_out[i];
  return dx;
}

Tensor global_avg_pool_forward(const Tensor& x) {
  const Shape xs = x.shape();
  Tensor out(Shape{xs.n, xs.c, 1, 1});
  const int64_t hw = xs.h * xs.w;
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t c = 0; c < xs.c; ++c) {
      const float* p = x.plane(in, c);
      double s = 0.0;
      for (int64_t j = 0; j < hw; ++j) s += p[j];
      out[in * xs.c + c] = (float)(s / (double)hw);
    }
  }
  return out;
}

Tensor global_avg_pool_backward(const Tensor& grad_out, const Shape& x_shape) {
  Tensor dx(x_shape);
  const int64_t hw = x_shape.h * x_shape.w;
  for (int64_t in = 0; in < x_shape.n; ++in) {
    for (int64_t c = 0; c < x_shape.c; ++c) {
      const float g = (float)((double)grad_out[in * x_shape.c + c] / (double)hw);
      float* p = dx.plane(in, c);
      for (int64_t j = 0; j < hw; ++j) p[j] += g;
    }
  }
  return dx;
}

Tensor global_max_pool_forward(const Tensor& x, std::vector<int64_t>& argmax) {
  const Shape xs = x.shape();
  Tensor out(Shape{xs.n, xs.c, 1, 1});
  argmax.assign(xs.n * xs.c, 0);
  const int64_t hw = xs.h * xs.w;
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t c = 0; c < xs.c; ++c) {
      const float* p = x.plane(in, c);
      int64_t best = 0;
      for (int64_t j = 1; j < hw; ++j) {
        if (p[j] > p[best]) best = j;
      }
      out[in * xs.c + c] = p[best];
      argmax[in * xs.c + c] = (in * xs.c + c) * hw + best;
    }
  }
  return out;
}

Tensor global_max_pool_backward(const Tensor& grad_out, const std::vector<int64_t>& argmax,
                                const Shape& x_shape) {
  Tensor dx(x_shape);
  for (int64_t i = 0; i < grad_out.numel(); ++i) dx[argmax[i]] += grad_out[i];
  return dx;
}

Tensor channel_sum_forward(const Tensor& x) {
  const Shape xs = x.shape();
  Tensor out(Shape{xs.n, 1, xs.h, xs.w});
  const int64_t hw = xs.h * xs.w;
  for (int64_t in = 0; in < xs.n; ++in) {
    float* dst = out.plane(in, 0);
    for (int64_t j = 0; j < hw; ++j) {
      double s = 0.0;
      for (int64_t c = 0; c < xs.c; ++c) s += x.plane(in, c)[j];
      dst[j] = (float)s;
    }
  }
  return out;
}

Tensor channel_sum_backward(const Tensor& grad_out, const Shape& x_shape) {
  Tensor dx(x_shape);
  const int64_t hw = x_shape.h * x_shape.w;
  for (int64_t in = 0; in < x_shape.n; ++in) {
    const float* g = grad_out.plane(in, 0);
    for (int64_t c = 0; c < x_shape.c; ++c) {
      float* p = dx.plane(in, c);
      for (int64_t j = 0; j < hw; ++j) p[j] += g[j];
    }
  }
  return dx;
}

Tensor channel_mean_forward(const Tensor& x) {
  const Shape xs = x.shape();
  Tensor out(Shape{xs.n, 1, xs.h, xs.w});
  const int64_t hw = xs.h * xs.w;
  for (int64_t in = 0; in < xs.n; ++in) {
    float* dst = out.plane(in, 0);
    for (int64_t j = 0; j < hw; ++j) {
      double s = 0.0;
      for (int64_t c = 0; c < xs.c; ++c) s += x.plane(in, c)[j];
      dst[j] = (float)(s / (double)xs.c);
    }
  }
  return out;
}

Tensor channel_mean_backward(const Tensor& grad_out, const Shape& x_shape) {
  Tensor dx(x_shape);
  const int64_t hw = x_shape.h * x_shape.w;
  for (int64_t in = 0; in < x_shape.n; ++in) {
    const float* g = grad_out.plane(in, 0);
    for (int64_t c = 0; c < x_shape.c; ++c) {
      float* p = dx.plane(in, c);
      for (int64_t j = 0; j < hw; ++j) p[j] += (float)((double)g[j] / (double)x_shape.c);
    }
  }
  return dx;
}

Tensor channel_max_forward(const Tensor& x, std::vector<int64_t>& argmax) {
  const Shape xs = x.shape();
  Tensor out(Shape{xs.n, 1, xs.h, xs.w});
  argmax.assign(out.numel(), 0);
  const int64_t hw = xs.h * xs.w;
  int64_t oi = 0;
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t j = 0; j < hw; ++j, ++oi) {
      int64_t best = 0;
      float bv = x.plane(in, 0)[j];
      for (int64_t c = 1; c < xs.c; ++c) {
        const float v = x.plane(in, c)[j];
        if (v > bv) {
          bv = v;
          best = c;
        }
      }
      out[oi] = bv;
      argmax[oi] = (in * xs.c + best) * hw + j;
    }
  }
  return out;
}

Tensor channel_max_backward(const Tensor& grad_out, const std::vector<int64_t>& argmax,
                            const Shape& x_shape) {
  Tensor dx(x_shape);
  for (int64_t i = 0; i < grad_out.numel(); ++i) dx[argmax[i]] += grad_out[i];
  return dx;
}

namespace {

struct Sample {
  int64_t lo, hi;
  float frac;
};

// Source coordinate for align-corners = false sampling, edges clamped.
std::vector<Sample> make_samples(int64_t out_size, int64_t in_size) {
  std::vector<Sample> s(out_size);
  const double scale = (double)in_size / (double)out_size;
  for (int64_t i = 0; i < out_size; ++i) {
    const double src = ((double)i + 0.5) * scale - 0.5;
    const int64_t lo = (int64_t)std::floor(src);
    s[i].frac = (float)(src - (double)lo);
    s[i].lo = std::clamp<int64_t>(lo, 0, in_size - 1);
    s[i].hi = std::clamp<int64_t>(lo + 1, 0, in_size - 1);
  }
  return s;
}

Tensor resample_bilinear(const Tensor& x, int64_t out_h, int64_t out_w) {
  const Shape xs = x.shape();
  Tensor out(Shape{xs.n, xs.c, out_h, out_w});
  const auto ys = make_samples(out_h, xs.h);
  const auto xsamp = make_samples(out_w, xs.w);
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t c = 0; c < xs.c; ++c) {
      const float* p = x.plane(in, c);
      float* dst = out.plane(in, c);
      for (int64_t y = 0; y < out_h; ++y) {
        const float* r0 = p + ys[y].lo * xs.w;
        const float* r1 = p + ys[y].hi * xs.w;
        const float fy = ys[y].frac;
        for (int64_t x2 = 0; x2 < out_w; ++x2) {
          const auto& sx = xsamp[x2];
          // Lerp form keeps constant regions exactly constant.
          const float top = r0[sx.lo] + sx.frac * (r0[sx.hi] - r0[sx.lo]);
          const float bot = r1[sx.lo] + sx.frac * (r1[sx.hi] - r1[sx.lo]);
          dst[y * out_w + x2] = top + fy * (bot - top);
        }
      }
    }
  }
  return out;
}

}  // namespace

Tensor upsample2_forward(const Tensor& x) {
  return resample_bilinear(x, 2 * x.h(), 2 * x.w());
}

Tensor upsample2_backward(const Tensor& grad_out, const Shape& x_shape) {
  const Shape gs = grad_out.shape();
  require(gs.h == 2 * x_shape.h && gs.w == 2 * x_shape.w, ErrorCode::Shape,
          "upsample2 grad shape mismatch");
  Tensor dx(x_shape);
  const auto ys = make_samples(gs.h, x_shape.h);
  const auto xsamp = make_samples(gs.w, x_shape.w);
  for (int64_t in = 0; in < x_shape.n; ++in) {
    for (int64_t c = 0; c < x_shape.c; ++c) {
      const float* g = grad_out.plane(in, c);
      float* dst = dx.plane(in, c);
      for (int64_t y = 0; y < gs.h; ++y) {
        const float fy = ys[y].frac;
        for (int64_t x2 = 0; x2 < gs.w; ++x2) {
          const auto& sx = xsamp[x2];
          const float gv = g[y * gs.w + x2];
          dst[ys[y].lo * x_shape.w + sx.lo] += (1.0f - fy) * (1.0f - sx.frac) * gv;
          dst[ys[y].lo * x_shape.w + sx.hi] += (1.0f - fy) * sx.frac * gv;
          dst[ys[y].hi * x_shape.w + sx.lo] += fy * (1.0f - sx.frac) * gv;
          dst[ys[y].hi * x_shape.w + sx.hi] += fy * sx.frac * gv;
        }
      }
    }
  }
  return dx;
}

Tensor resize_bilinear(const Tensor& x, int64_t out_h, int64_t out_w) {
  require(out_h >= 1 && out_w >= 1, ErrorCode::InvalidArgument, "resize target must be positive");
  if (out_h == x.h() && out_w == x.w()) return x;
  return resample_bilinear(x, out_h, out_w);
}

Tensor reflect_pad(const Tensor& x, int64_t top, int64_t bottom, int64_t left, int64_t right) {
  require(top >= 0 && bottom >= 0 && left >= 0 && right >= 0, ErrorCode::InvalidArgument,
          "reflect_pad amounts must be non-negative");
  const Shape xs = x.shape();
  Tensor out(Shape{xs.n, xs.c, xs.h + top + bottom, xs.w + left + right});
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t c = 0; c < xs.c; ++c) {
      const float* p = x.plane(in, c);
      float* dst = out.plane(in, c);
      for (int64_t y = 0; y < out.h(); ++y) {
        const float* row = p + reflect_index(y - top, xs.h) * xs.w;
        for (int64_t x2 = 0; x2 < out.w(); ++x2) {
          dst[y * out.w() + x2] = row[reflect_index(x2 - left, xs.w)];
        }
      }
    }
  }
  return out;
}

Tensor crop(const Tensor& x, int64_t top, int64_t left, int64_t out_h, int64_t out_w) {
  const Shape xs = x.shape();
  require(top >= 0 && left >= 0 && top + out_h <= xs.h && left + out_w <= xs.w, ErrorCode::Shape,
          "crop window out of range");
  Tensor out(Shape{xs.n, xs.c, out_h, out_w});
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t c = 0; c < xs.c; ++c) {
      const float* p = x.plane(in, c);
      float* dst = out.plane(in, c);
      for (int64_t y = 0; y < out_h; ++y) {
        std::copy(p + (top + y) * xs.w + left, p + (top + y) * xs.w + left + out_w,
                  dst + y * out_w);
      }
    }
  }
  return out;
}

std::vector<float> gaussian_kernel(int64_t size, double sigma) {
  require(size % 2 == 1 && size >= 1, ErrorCode::InvalidArgument, "gaussian size must be odd");
  require(sigma > 0.0, ErrorCode::InvalidArgument, "gaussian sigma must be positive");
  const int64_t c = (size - 1) / 2;
  std::vector<double> g(size);
  double sum = 0.0;
  for (int64_t i = 0; i < size; ++i) {
    const double d = (double)(i - c);
    g[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  std::vector<float> k(size * size);
  for (int64_t y = 0; y < size; ++y) {
    for (int64_t x = 0; x < size; ++x) k[y * size + x] = (float)(g[y] * g[x]);
  }
  return k;
}

}  // namespace shark::kernels
