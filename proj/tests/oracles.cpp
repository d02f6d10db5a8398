#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace shark::oracle {
namespace {

int64_t reflect101(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

DTensor to_double(const Tensor& t) {
  DTensor d{t.shape(), std::vector<double>((size_t)t.shape().numel())};
  for (int64_t i = 0; i < t.shape().numel(); ++i) d.data[(size_t)i] = t[i];
  return d;
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor* bias, int64_t padding) {
  const Shape xs = x.shape(), ws = w.shape();
  Tensor out(Shape{xs.n, ws.n, xs.h + 2 * padding - ws.h + 1, xs.w + 2 * padding - ws.w + 1});
  const Shape os = out.shape();
  for (int64_t in = 0; in < os.n; ++in) {
    for (int64_t oc = 0; oc < os.c; ++oc) {
      for (int64_t oy = 0; oy < os.h; ++oy) {
        for (int64_t ox = 0; ox < os.w; ++ox) {
          double acc = bias != nullptr ? (*bias)[oc] : 0.0;
          for (int64_t ic = 0; ic < xs.c; ++ic) {
            for (int64_t ky = 0; ky < ws.h; ++ky) {
              for (int64_t kx = 0; kx < ws.w; ++kx) {
                const int64_t y = oy + ky - padding, x2 = ox + kx - padding;
                if (y < 0 || y >= xs.h || x2 < 0 || x2 >= xs.w) continue;
                acc += static_cast<double>(x.at(in, ic, y, x2)) *
                       static_cast<double>(w.at(oc, ic, ky, kx));
              }
            }
          }
          out.at(in, oc, oy, ox) = static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

Tensor filter2d_reflect(const Tensor& x, const std::vector<float>& kernel, int64_t ksize) {
  const Shape xs = x.shape();
  const int64_t pad = (ksize - 1) / 2;
  Tensor out(xs);
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t c = 0; c < xs.c; ++c) {
      for (int64_t y = 0; y < xs.h; ++y) {
        for (int64_t x2 = 0; x2 < xs.w; ++x2) {
          double s = 0.0;
          for (int64_t ky = 0; ky < ksize; ++ky) {
            for (int64_t kx = 0; kx < ksize; ++kx) {
              const int64_t sy = reflect101(y + ky - pad, xs.h);
              const int64_t sx = reflect101(x2 + kx - pad, xs.w);
              s += (double)kernel[ky * ksize + kx] * x.at(in, c, sy, sx);
            }
          }
          out.at(in, c, y, x2) = (float)s;
        }
      }
    }
  }
  return out;
}

std::vector<float> gaussian_kernel(int64_t size, double sigma) {
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

Tensor resize_bilinear(const Tensor& x, int64_t out_h, int64_t out_w) {
  const Shape xs = x.shape();
  Tensor out(Shape{xs.n, xs.c, out_h, out_w});
  auto sample = [](int64_t i, int64_t in_size, int64_t out_size, int64_t& lo, int64_t& hi,
                   double& frac) {
    const double scale = (double)in_size / (double)out_size;
    const double src = ((double)i + 0.5) * scale - 0.5;
    double fl = std::floor(src);
    frac = src - fl;
    lo = std::clamp((int64_t)fl, (int64_t)0, in_size - 1);
    hi = std::clamp((int64_t)fl + 1, (int64_t)0, in_size - 1);
  };
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t c = 0; c < xs.c; ++c) {
      for (int64_t oy = 0; oy < out_h; ++oy) {
        int64_t y0, y1;
        double fy;
        sample(oy, xs.h, out_h, y0, y1, fy);
        for (int64_t ox = 0; ox < out_w; ++ox) {
          int64_t x0, x1;
          double fx;
          sample(ox, xs.w, out_w, x0, x1, fx);
          const double top = x.at(in, c, y0, x0) + fx * (x.at(in, c, y0, x1) - x.at(in, c, y0, x0));
          const double bot = x.at(in, c, y1, x0) + fx * (x.at(in, c, y1, x1) - x.at(in, c, y1, x0));
          out.at(in, c, oy, ox) = (float)(top + fy * (bot - top));
        }
      }
    }
  }
  return out;
}

HarrisResult harris(const Tensor& x, float k, float tau, int64_t gauss_size, double gauss_sigma) {
  const Shape xs = x.shape();
  const int64_t hw = xs.h * xs.w;
  static const std::vector<float> sx = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
  static const std::vector<float> sy = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
  const Tensor ix = filter2d_reflect(x, sx, 3);
  const Tensor iy = filter2d_reflect(x, sy, 3);

  // Stored float products, double channel sums, then the smoothing filter.
  auto moment = [&](const Tensor& a, const Tensor& b) {
    Tensor summed(Shape{xs.n, 1, xs.h, xs.w});
    for (int64_t in = 0; in < xs.n; ++in) {
      std::vector<std::vector<float>> prod(xs.c, std::vector<float>(hw));
      for (int64_t c = 0; c < xs.c; ++c) {
        const float* ap = a.plane(in, c);
        const float* bp = b.plane(in, c);
        for (int64_t j = 0; j < hw; ++j) prod[c][j] = ap[j] * bp[j];
      }
      float* out = summed.plane(in, 0);
      for (int64_t j = 0; j < hw; ++j) {
        double acc = 0.0;
        for (int64_t c = 0; c < xs.c; ++c) acc += prod[c][j];
        out[j] = (float)acc;
      }
    }
    return filter2d_reflect(summed, gaussian_kernel(gauss_size, gauss_sigma), gauss_size);
  };
  const Tensor sxx = moment(ix, ix);
  const Tensor syy = moment(iy, iy);
  const Tensor sxy = moment(ix, iy);

  HarrisResult res{Tensor(Shape{xs.n, 1, xs.h, xs.w}), Tensor(Shape{xs.n, 1, xs.h, xs.w}), {}};
  for (int64_t in = 0; in < xs.n; ++in) {
    const float* pxx = sxx.plane(in, 0);
    const float* pyy = syy.plane(in, 0);
    const float* pxy = sxy.plane(in, 0);
    std::vector<float> a1(hw), a2(hw), det(hw), tr(hw), tr2(hw), sc(hw);
    for (int64_t j = 0; j < hw; ++j) a1[j] = pxx[j] * pyy[j];
    for (int64_t j = 0; j < hw; ++j) a2[j] = pxy[j] * pxy[j];
    for (int64_t j = 0; j < hw; ++j) det[j] = a1[j] - a2[j];
    for (int64_t j = 0; j < hw; ++j) tr[j] = pxx[j] + pyy[j];
    for (int64_t j = 0; j < hw; ++j) tr2[j] = tr[j] * tr[j];
    for (int64_t j = 0; j < hw; ++j) sc[j] = k * tr2[j];
    float* rp = res.response.plane(in, 0);
    for (int64_t j = 0; j < hw; ++j) rp[j] = det[j] - sc[j];
    float maxr = rp[0];
    for (int64_t j = 1; j < hw; ++j) maxr = std::max(maxr, rp[j]);
    res.max_response.push_back(maxr);
    const float t = tau * maxr;
    float* hp = res.hard.plane(in, 0);
    for (int64_t j = 0; j < hw; ++j) hp[j] = rp[j] > t ? 1.0f : 0.0f;
  }
  return res;
}

std::vector<double> harris_response_double(const DTensor& x, float k, int64_t gauss_size,
                                           double gauss_sigma) {
  const Shape xs = x.shape;
  const int64_t hw = xs.h * xs.w;
  static const std::vector<double> sx = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
  static const std::vector<double> sy = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
  const std::vector<float> gf = gaussian_kernel(gauss_size, gauss_sigma);
  const std::vector<double> g(gf.begin(), gf.end());

  auto correlate = [&](const std::vector<double>& src, const std::vector<double>& kern,
                       int64_t size) {
    std::vector<double> out(hw);
    const int64_t pad = size / 2;
    for (int64_t yy = 0; yy < xs.h; ++yy) {
      for (int64_t xx = 0; xx < xs.w; ++xx) {
        double s = 0.0;
        for (int64_t ky = 0; ky < size; ++ky) {
          for (int64_t kx = 0; kx < size; ++kx) {
            const int64_t ry = reflect101(yy + ky - pad, xs.h);
            const int64_t rx = reflect101(xx + kx - pad, xs.w);
            s += kern[ky * size + kx] * src[ry * xs.w + rx];
          }
        }
        out[yy * xs.w + xx] = s;
      }
    }
    return out;
  };

  std::vector<double> result(xs.n * hw);
  for (int64_t in = 0; in < xs.n; ++in) {
    std::vector<double> pxx(hw, 0.0), pyy(hw, 0.0), pxy(hw, 0.0);
    for (int64_t c = 0; c < xs.c; ++c) {
      const double* p = x.data.data() + (in * xs.c + c) * hw;
      const std::vector<double> plane(p, p + hw);
      const std::vector<double> ix = correlate(plane, sx, 3);
      const std::vector<double> iy = correlate(plane, sy, 3);
      for (int64_t j = 0; j < hw; ++j) {
        pxx[j] += ix[j] * ix[j];
        pyy[j] += iy[j] * iy[j];
        pxy[j] += ix[j] * iy[j];
      }
    }
    const std::vector<double> sxx = correlate(pxx, g, gauss_size);
    const std::vector<double> syy = correlate(pyy, g, gauss_size);
    const std::vector<double> sxy = correlate(pxy, g, gauss_size);
    for (int64_t j = 0; j < hw; ++j) {
      const double det = sxx[j] * syy[j] - sxy[j] * sxy[j];
      const double tr = sxx[j] + syy[j];
      result[in * hw + j] = det - (double)k * tr * tr;
    }
  }
  return result;
}

std::vector<double> harris_response_double(const Tensor& x, float k, int64_t gauss_size,
                                           double gauss_sigma) {
  return harris_response_double(to_double(x), k, gauss_size, gauss_sigma);
}

int64_t count_positives(const Tensor& map) {
  int64_t n = 0;
  for (int64_t i = 0; i < map.shape().numel(); ++i) {
    if (map[i] > 0.5f) ++n;
  }
  return n;
}

double ssim_double(const DTensor& a, const DTensor& b) {
  const Shape s = a.shape;
  const int64_t size = 11, pad = 5;
  std::vector<float> kf = gaussian_kernel(size, 1.5);
  std::vector<double> kd(kf.size());
  for (size_t i = 0; i < kf.size(); ++i) kd[i] = kf[i];
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0.0;
  for (int64_t in = 0; in < s.n; ++in) {
    for (int64_t y = 0; y < s.h; ++y) {
      for (int64_t x = 0; x < s.w; ++x) {
        double channel_acc = 0.0;
        for (int64_t c = 0; c < s.c; ++c) {
          double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
          for (int64_t ky = 0; ky < size; ++ky) {
            for (int64_t kx = 0; kx < size; ++kx) {
              const int64_t sy = reflect101(y + ky - pad, s.h);
              const int64_t sx = reflect101(x + kx - pad, s.w);
              const double wgt = kd[ky * size + kx];
              const double av = a.at(in, c, sy, sx), bv = b.at(in, c, sy, sx);
              ma += wgt * av;
              mb += wgt * bv;
              maa += wgt * av * av;
              mbb += wgt * bv * bv;
              mab += wgt * av * bv;
            }
          }
          const double va = maa - ma * ma, vb = mbb - mb * mb, cov = mab - ma * mb;
          channel_acc += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                         ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
        total += channel_acc / (double)s.c;
      }
    }
  }
  return total / (double)(s.n * s.h * s.w);
}

double ssim(const Tensor& a, const Tensor& b) { return ssim_double(to_double(a), to_double(b)); }

double psnr_db(const Tensor& a, const Tensor& b) {
  double mse = 0.0;
  const int64_t n = a.shape().numel();
  for (int64_t i = 0; i < n; ++i) {
    const double d = (double)a[i] - (double)b[i];
    mse += d * d;
  }
  mse /= (double)n;
  if (mse <= 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

namespace {

DTensor dzeros(const Shape& s) { return DTensor{s, std::vector<double>((size_t)s.numel())}; }

double& dat(DTensor& t, int64_t n, int64_t c, int64_t y, int64_t x) {
  return t.data[(size_t)(((n * t.shape.c + c) * t.shape.h + y) * t.shape.w + x)];
}

double dsigmoid1(double v) { return 1.0 / (1.0 + std::exp(-v)); }
double dsilu1(double v) { return v / (1.0 + std::exp(-v)); }
double drelu1(double v) { return v > 0.0 ? v : 0.0; }
double dadd1(double a, double b) { return a + b; }
double dmul1(double a, double b) { return a * b; }

DTensor dmap(const DTensor& x, double (*f)(double)) {
  DTensor out = x;
  for (auto& v : out.data) v = f(v);
  return out;
}

// Elementwise with size-1 broadcasting on either side, like the graph ops.
DTensor dbinary(const DTensor& a, const DTensor& b, double (*f)(double, double)) {
  const Shape as = a.shape, bs = b.shape;
  const Shape os{std::max(as.n, bs.n), std::max(as.c, bs.c), std::max(as.h, bs.h),
                 std::max(as.w, bs.w)};
  DTensor out = dzeros(os);
  for (int64_t n = 0; n < os.n; ++n) {
    for (int64_t c = 0; c < os.c; ++c) {
      for (int64_t y = 0; y < os.h; ++y) {
        for (int64_t x = 0; x < os.w; ++x) {
          const double av =
              a.at(as.n == 1 ? 0 : n, as.c == 1 ? 0 : c, as.h == 1 ? 0 : y, as.w == 1 ? 0 : x);
          const double bv =
              b.at(bs.n == 1 ? 0 : n, bs.c == 1 ? 0 : c, bs.h == 1 ? 0 : y, bs.w == 1 ? 0 : x);
          dat(out, n, c, y, x) = f(av, bv);
        }
      }
    }
  }
  return out;
}

DTensor dconv(const net::Conv& conv, const DTensor& x) {
  const Tensor& w = conv.weight.value();
  const Tensor& b = conv.bias.value();
  const Shape xs = x.shape, ws = w.shape();
  const int64_t pad = (ws.h - 1) / 2;
  DTensor out = dzeros(Shape{xs.n, ws.n, xs.h, xs.w});
  for (int64_t in = 0; in < xs.n; ++in) {
    for (int64_t oc = 0; oc < ws.n; ++oc) {
      for (int64_t oy = 0; oy < xs.h; ++oy) {
        for (int64_t ox = 0; ox < xs.w; ++ox) {
          double acc = b[oc];
          for (int64_t ic = 0; ic < xs.c; ++ic) {
            for (int64_t ky = 0; ky < ws.h; ++ky) {
              const int64_t sy = oy + ky - pad;
              if (sy < 0 || sy >= xs.h) continue;
              for (int64_t kx = 0; kx < ws.w; ++kx) {
                const int64_t sx = ox + kx - pad;
                if (sx < 0 || sx >= xs.w) continue;
                acc += (double)w.at(oc, ic, ky, kx) * x.at(in, ic, sy, sx);
              }
            }
          }
          dat(out, in, oc, oy, ox) = acc;
        }
      }
    }
  }
  return out;
}

DTensor dmax_pool2(const DTensor& x) {
  const Shape xs = x.shape;
  DTensor out = dzeros(Shape{xs.n, xs.c, xs.h / 2, xs.w / 2});
  for (int64_t n = 0; n < xs.n; ++n) {
    for (int64_t c = 0; c < xs.c; ++c) {
      for (int64_t oy = 0; oy < xs.h / 2; ++oy) {
        for (int64_t ox = 0; ox < xs.w / 2; ++ox) {
          double best = x.at(n, c, 2 * oy, 2 * ox);
          for (int64_t ky = 0; ky < 2; ++ky) {
            for (int64_t kx = 0; kx < 2; ++kx) {
              const double v = x.at(n, c, 2 * oy + ky, 2 * ox + kx);
              if (v > best) best = v;
            }
          }
          dat(out, n, c, oy, ox) = best;
        }
      }
    }
  }
  return out;
}

DTensor dglobal_avg(const DTensor& x) {
  const Shape xs = x.shape;
  const int64_t hw = xs.h * xs.w;
  DTensor out = dzeros(Shape{xs.n, xs.c, 1, 1});
  for (int64_t n = 0; n < xs.n; ++n) {
    for (int64_t c = 0; c < xs.c; ++c) {
      double s = 0.0;
      for (int64_t y = 0; y < xs.h; ++y) {
        for (int64_t xi = 0; xi < xs.w; ++xi) s += x.at(n, c, y, xi);
      }
      dat(out, n, c, 0, 0) = s / (double)hw;
    }
  }
  return out;
}

DTensor dglobal_max(const DTensor& x) {
  const Shape xs = x.shape;
  DTensor out = dzeros(Shape{xs.n, xs.c, 1, 1});
  for (int64_t n = 0; n < xs.n; ++n) {
    for (int64_t c = 0; c < xs.c; ++c) {
      double best = x.at(n, c, 0, 0);
      for (int64_t y = 0; y < xs.h; ++y) {
        for (int64_t xi = 0; xi < xs.w; ++xi) {
          const double v = x.at(n, c, y, xi);
          if (v > best) best = v;
        }
      }
      dat(out, n, c, 0, 0) = best;
    }
  }
  return out;
}

DTensor dchannel_mean(const DTensor& x) {
  const Shape xs = x.shape;
  DTensor out = dzeros(Shape{xs.n, 1, xs.h, xs.w});
  for (int64_t n = 0; n < xs.n; ++n) {
    for (int64_t y = 0; y < xs.h; ++y) {
      for (int64_t xi = 0; xi < xs.w; ++xi) {
        double s = 0.0;
        for (int64_t c = 0; c < xs.c; ++c) s += x.at(n, c, y, xi);
        dat(out, n, 0, y, xi) = s / (double)xs.c;
      }
    }
  }
  return out;
}

DTensor dchannel_max(const DTensor& x) {
  const Shape xs = x.shape;
  DTensor out = dzeros(Shape{xs.n, 1, xs.h, xs.w});
  for (int64_t n = 0; n < xs.n; ++n) {
    for (int64_t y = 0; y < xs.h; ++y) {
      for (int64_t xi = 0; xi < xs.w; ++xi) {
        double best = x.at(n, 0, y, xi);
        for (int64_t c = 1; c < xs.c; ++c) {
          const double v = x.at(n, c, y, xi);
          if (v > best) best = v;
        }
        dat(out, n, 0, y, xi) = best;
      }
    }
  }
  return out;
}

DTensor dconcat(const DTensor& a, const DTensor& b) {
  const Shape as = a.shape, bs = b.shape;
  DTensor out = dzeros(Shape{as.n, as.c + bs.c, as.h, as.w});
  for (int64_t n = 0; n < as.n; ++n) {
    for (int64_t c = 0; c < as.c + bs.c; ++c) {
      for (int64_t y = 0; y < as.h; ++y) {
        for (int64_t xi = 0; xi < as.w; ++xi) {
          dat(out, n, c, y, xi) = c < as.c ? a.at(n, c, y, xi) : b.at(n, c - as.c, y, xi);
        }
      }
    }
  }
  return out;
}

// Bilinear x2, align_corners=false: src = (i + 0.5) * in/out - 0.5, fraction
// taken before clamping, lerp form that keeps constant regions exact.
DTensor dupsample2(const DTensor& x) {
  const Shape xs = x.shape;
  const int64_t oh = xs.h * 2, ow = xs.w * 2;
  DTensor out = dzeros(Shape{xs.n, xs.c, oh, ow});
  auto sample = [](int64_t i, int64_t in_size, int64_t out_size, int64_t& lo, int64_t& hi,
                   double& frac) {
    const double scale = (double)in_size / (double)out_size;
    const double src = ((double)i + 0.5) * scale - 0.5;
    const double fl = std::floor(src);
    frac = src - fl;
    lo = std::clamp((int64_t)fl, (int64_t)0, in_size - 1);
    hi = std::clamp((int64_t)fl + 1, (int64_t)0, in_size - 1);
  };
  for (int64_t n = 0; n < xs.n; ++n) {
    for (int64_t c = 0; c < xs.c; ++c) {
      for (int64_t oy = 0; oy < oh; ++oy) {
        int64_t y0, y1;
        double fy;
        sample(oy, xs.h, oh, y0, y1, fy);
        for (int64_t ox = 0; ox < ow; ++ox) {
          int64_t x0, x1;
          double fx;
          sample(ox, xs.w, ow, x0, x1, fx);
          const double top =
              x.at(n, c, y0, x0) + fx * (x.at(n, c, y0, x1) - x.at(n, c, y0, x0));
          const double bot =
              x.at(n, c, y1, x0) + fx * (x.at(n, c, y1, x1) - x.at(n, c, y1, x0));
          dat(out, n, c, oy, ox) = top + fy * (bot - top);
        }
      }
    }
  }
  return out;
}

DTensor dattention(const net::AttentionBlock& blk, const DTensor& x) {
  const DTensor f1 = dmap(dconv(blk.conv1, x), dsilu1);
  const DTensor f2 = dconv(blk.conv2, f1);
  const auto mlp = [&](const DTensor& v) {
    return dconv(blk.mlp2, dmap(dconv(blk.mlp1, v), drelu1));
  };
  const DTensor mc = dmap(dbinary(mlp(dglobal_avg(f2)), mlp(dglobal_max(f2)), dadd1), dsigmoid1);
  const DTensor fc = dbinary(f2, mc, dmul1);
  const DTensor stats = dconcat(dchannel_mean(fc), dchannel_max(fc));
  const DTensor ms = dmap(dconv(blk.spatial, stats), dsigmoid1);
  const DTensor fs = dbinary(fc, ms, dmul1);
  const DTensor res = blk.shortcut ? dconv(*blk.shortcut, x) : x;
  return dbinary(fs, res, dadd1);
}

DTensor dmix(const net::MixBlock& blk, const DTensor& x) {
  return dconv(blk.fuse, dmap(dconv(blk.conv2, dmap(dconv(blk.conv1, x), dsilu1)), dsilu1));
}

DTensor dgate(const net::GateBlock& blk, const DTensor& x) {
  return dbinary(x, dmap(dconv(blk.gate, x), dsigmoid1), dmul1);
}

}  // namespace

DTensor model_forward_double(const net::Model& model, const Tensor& x) {
  DTensor cur = to_double(x);
  std::vector<DTensor> skips;
  for (int64_t lvl = 0; lvl < net::kLevels; ++lvl) {
    DTensor refined = dmix(model.mix[lvl], dattention(model.encoder[lvl], cur));
    cur = dmax_pool2(refined);
    skips.push_back(std::move(refined));
  }
  cur = dattention(model.bottleneck, cur);
  for (int64_t lvl = net::kLevels - 1; lvl >= 0; --lvl) {
    const DTensor cat = dconcat(skips[(size_t)lvl], dupsample2(cur));
    cur = dgate(model.gates[(size_t)lvl], dattention(model.decoder[(size_t)lvl], cat));
  }
  return dmap(dconv(model.head, cur), dsigmoid1);
}

void adam_step(std::vector<float>& p, std::vector<float>& m, std::vector<float>& v,
               const std::vector<float>& g, int64_t t, float lr, float beta1, float beta2,
               float eps) {
  const float c1 = (float)(1.0 - std::pow((double)beta1, (double)t));
  const float c2 = (float)(1.0 - std::pow((double)beta2, (double)t));
  for (size_t i = 0; i < p.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * (g[i] * g[i]);
    const float mhat = m[i] / c1;
    const float vhat = v[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace shark::oracle
