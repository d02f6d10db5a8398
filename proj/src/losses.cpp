#include "losses.hpp"

#include <algorithm>

#include "error.hpp"
#include "kernels.hpp"

namespace shark::losses {

namespace {

constexpr int64_t kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr float kSsimC1 = 0.01f * 0.01f;  // dynamic range is 1
constexpr float kSsimC2 = 0.03f * 0.03f;

const std::vector<float>& sobel_x() {
  static const std::vector<float> k{-1, 0, 1, -2, 0, 2, -1, 0, 1};
  return k;
}

const std::vector<float>& sobel_y() {
  static const std::vector<float> k{-1, -2, -1, 0, 0, 0, 1, 2, 1};
  return k;
}

}  // namespace

void validate(const HarrisParams& p) {
  require(p.k > 0.0f, ErrorCode::Config, "harris k must be positive");
  require(p.tau > 0.0f && p.tau <= 1.0f, ErrorCode::Config, "harris tau must be in (0,1]");
  require(p.gauss_size >= 1 && p.gauss_size % 2 == 1, ErrorCode::Config,
          "harris gaussian size must be odd");
  require(p.gauss_sigma > 0.0, ErrorCode::Config, "harris gaussian sigma must be positive");
  require(p.soft_beta > 0.0f, ErrorCode::Config, "harris soft_beta must be positive");
}

ad::Var l1_loss(const ad::Var& pred, const ad::Var& target) {
  require_same_shape(pred.value(), target.value(), "l1_loss");
  return ad::mean_all(ad::abs(ad::sub(pred, target)));
}

ad::Var ssim_map(const ad::Var& a, const ad::Var& b) {
  require_same_shape(a.value(), b.value(), "ssim_map");
  const std::vector<float> win = kernels::gaussian_kernel(kSsimWindow, kSsimSigma);
  auto smooth = [&win](const ad::Var& v) { return ad::filter2d_reflect(v, win, kSsimWindow); };

  ad::Var mu_a = smooth(a);
  ad::Var mu_b = smooth(b);
  ad::Var mu_aa = ad::mul(mu_a, mu_a);
  ad::Var mu_bb = ad::mul(mu_b, mu_b);
  ad::Var mu_ab = ad::mul(mu_a, mu_b);
  ad::Var var_a = ad::sub(smooth(ad::mul(a, a)), mu_aa);
  ad::Var var_b = ad::sub(smooth(ad::mul(b, b)), mu_bb);
  ad::Var cov = ad::sub(smooth(ad::mul(a, b)), mu_ab);

  ad::Var num = ad::mul(ad::add_scalar(ad::mul_scalar(mu_ab, 2.0f), kSsimC1),
                        ad::add_scalar(ad::mul_scalar(cov, 2.0f), kSsimC2));
  ad::Var den = ad::mul(ad::add_scalar(ad::add(mu_aa, mu_bb), kSsimC1),
                        ad::add_scalar(ad::add(var_a, var_b), kSsimC2));
  return ad::channel_mean(ad::div(num, den));
}

ad::Var ssim_loss(const ad::Var& pred, const ad::Var& target) {
  return ad::add_scalar(ad::mul_scalar(ad::mean_all(ssim_map(pred, target)), -1.0f), 1.0f);
}

Tensor per_image_max(const Tensor& x) {
  const Shape s = x.shape();
  Tensor out(Shape{s.n, 1, 1, 1});
  const int64_t per = s.c * s.h * s.w;
  for (int64_t in = 0; in < s.n; ++in) {
    const float* p = x.data() + in * per;
    out[in] = *std::max_element(p, p + per);
  }
  return out;
}

ad::Var harris_response(const ad::Var& x, const HarrisParams& p) {
  validate(p);
  const std::vector<float> gauss = kernels::gaussian_kernel(p.gauss_size, p.gauss_sigma);
  ad::Var ix = ad::filter2d_reflect(x, sobel_x(), 3);
  ad::Var iy = ad::filter2d_reflect(x, sobel_y(), 3);
  ad::Var sxx = ad::filter2d_reflect(ad::channel_sum(ad::mul(ix, ix)), gauss, p.gauss_size);
  ad::Var syy = ad::filter2d_reflect(ad::channel_sum(ad::mul(iy, iy)), gauss, p.gauss_size);
  ad::Var sxy = ad::filter2d_reflect(ad::channel_sum(ad::mul(ix, iy)), gauss, p.gauss_size);
  ad::Var det = ad::sub(ad::mul(sxx, syy), ad::mul(sxy, sxy));
  ad::Var trace = ad::add(sxx, syy);
  return ad::sub(det, ad::mul_scalar(ad::mul(trace, trace), p.k));
}

Tensor harris_hard_map(const Tensor& image, const HarrisParams& p) {
  const Tensor r = harris_response(ad::Var(image), p).value();
  const Tensor maxr = per_image_max(r);
  Tensor map(r.shape());
  const int64_t per = r.h() * r.w();
  for (int64_t in = 0; in < r.n(); ++in) {
    const float t = p.tau * maxr[in];
    const float* rp = r.plane(in, 0);
    float* mp = map.plane(in, 0);
    for (int64_t j = 0; j < per; ++j) mp[j] = rp[j] > t ? 1.0f : 0.0f;
  }
  return map;
}

ad::Var harris_soft_map(const ad::Var& x, const HarrisParams& p) {
  ad::Var r = harris_response(x, p);
  Tensor thresh = per_image_max(r.value());
  for (int64_t in = 0; in < thresh.numel(); ++in) thresh[in] = p.tau * thresh[in];
  return ad::sigmoid(ad::mul_scalar(ad::sub(r, ad::Var(std::move(thresh))), p.soft_beta));
}

ad::Var harris_loss(const ad::Var& pred, const Tensor& target, const HarrisParams& p) {
  ad::Var target_map = harris_soft_map(ad::Var(target), p);
  return ad::mean_all(ad::abs(ad::sub(harris_soft_map(pred, p), target_map)));
}

LossBreakdown composite_loss(const ad::Var& pred, const Tensor& target, const LossWeights& w,
                             const HarrisParams& hp) {
  require_same_shape(pred.value(), target, "composite_loss");
  LossBreakdown out;
  ad::Var target_var(target);
  ad::Var l1 = l1_loss(pred, target_var);
  out.l1 = l1.value().scalar();
  out.total = ad::mul_scalar(l1, w.l1);
  if (w.use_ssim) {
    ad::Var s = ssim_loss(pred, target_var);
    out.ssim = s.value().scalar();
    out.total = ad::add(out.total, ad::mul_scalar(s, w.ssim));
  }
  if (w.use_harris) {
    ad::Var h = harris_loss(pred, target, hp);
    out.harris = h.value().scalar();
    out.total = ad::add(out.total, ad::mul_scalar(h, w.harris));
  }
  return out;
}

}  // namespace shark::losses
