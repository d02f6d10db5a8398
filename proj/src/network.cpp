#include "network.hpp"

#include <cmath>

#include "error.hpp"
#include "kernels.hpp"

namespace shark::net {

namespace {

Conv make_conv(int64_t in_c, int64_t out_c, int64_t k) {
  Conv c;
  c.weight = ad::Var(Tensor(Shape{out_c, in_c, k, k}), true);
  c.bias = ad::Var(Tensor(Shape{1, out_c, 1, 1}), true);
  return c;
}

AttentionBlock make_attention(const ModelConfig& cfg, int64_t in_c, int64_t out_c) {
  AttentionBlock blk;
  blk.conv1 = make_conv(in_c, out_c, 3);
  blk.conv2 = make_conv(out_c, out_c, 3);
  const int64_t hidden = std::max<int64_t>(1, out_c / cfg.cbam_reduction);
  blk.mlp1 = make_conv(out_c, hidden, 1);
  blk.mlp2 = make_conv(hidden, out_c, 1);
  blk.spatial = make_conv(2, 1, 7);
  if (in_c != out_c) blk.shortcut = make_conv(in_c, out_c, 1);
  return blk;
}

void visit_conv(const std::string& prefix, Conv& c,
                const std::function<void(const std::string&, ad::Var&)>& fn) {
  fn(prefix + ".weight", c.weight);
  fn(prefix + ".bias", c.bias);
}

void visit_attention(const std::string& prefix, AttentionBlock& blk,
                     const std::function<void(const std::string&, ad::Var&)>& fn) {
  visit_conv(prefix + ".conv1", blk.conv1, fn);
  visit_conv(prefix + ".conv2", blk.conv2, fn);
  visit_conv(prefix + ".mlp1", blk.mlp1, fn);
  visit_conv(prefix + ".mlp2", blk.mlp2, fn);
  visit_conv(prefix + ".spatial", blk.spatial, fn);
  if (blk.shortcut) visit_conv(prefix + ".skip", *blk.shortcut, fn);
}

}  // namespace

Model make_model(const ModelConfig& cfg) {
  require(cfg.base_channels >= 1, ErrorCode::Config, "base_channels must be >= 1");
  require(cfg.cbam_reduction >= 1, ErrorCode::Config, "cbam_reduction must be >= 1");
  Model m;
  m.config = cfg;
  for (int64_t lvl = 0; lvl < kLevels; ++lvl) {
    const int64_t in_c = lvl == 0 ? 3 : level_channels(cfg, lvl - 1);
    const int64_t out_c = level_channels(cfg, lvl);
    m.encoder.push_back(make_attention(cfg, in_c, out_c));
    MixBlock mix;
    mix.conv1 = make_conv(out_c, out_c, 3);
    mix.conv2 = make_conv(out_c, out_c, 3);
    mix.fuse = make_conv(out_c, out_c, 1);
    m.mix.push_back(mix);
  }
  const int64_t deep = level_channels(cfg, kLevels - 1);
  m.bottleneck = make_attention(cfg, deep, deep);
  for (int64_t lvl = 0; lvl < kLevels; ++lvl) {
    const int64_t skip_c = level_channels(cfg, lvl);
    const int64_t up_c = lvl == kLevels - 1 ? deep : level_channels(cfg, lvl + 1);
    m.decoder.push_back(make_attention(cfg, skip_c + up_c, skip_c));
    GateBlock g;
    g.gate = make_conv(skip_c, 1, 1);
    m.gates.push_back(g);
  }
  m.head = make_conv(cfg.base_channels, 3, 1);
  return m;
}

void for_each_param(Model& model, const std::function<void(const std::string&, ad::Var&)>& fn) {
  for (int64_t lvl = 0; lvl < kLevels; ++lvl) {
    const std::string enc = "enc" + std::to_string(lvl);
    visit_attention(enc + ".att", model.encoder[lvl], fn);
    visit_conv(enc + ".mix.conv1", model.mix[lvl].conv1, fn);
    visit_conv(enc + ".mix.conv2", model.mix[lvl].conv2, fn);
    visit_conv(enc + ".mix.fuse", model.mix[lvl].fuse, fn);
  }
  visit_attention("mid.att", model.bottleneck, fn);
  for (int64_t lvl = 0; lvl < kLevels; ++lvl) {
    const std::string dec = "dec" + std::to_string(lvl);
    visit_attention(dec + ".att", model.decoder[lvl], fn);
    visit_conv(dec + ".gate", model.gates[lvl].gate, fn);
  }
  visit_conv("head", model.head, fn);
}

void init_params(Model& model, Pcg32& rng) {
  for_each_param(model, [&rng](const std::string& name, ad::Var& p) {
    Tensor& t = p.value();
    if (name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0) {
      t.fill(0.0f);
      return;
    }
    const Shape s = t.shape();
    const int64_t fan_in = s.c * s.h * s.w;
    const float bound = std::sqrt(6.0f / (float)fan_in);
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
  });
}

int64_t parameter_count(const Model& model) {
  int64_t count = 0;
  // for_each_param takes a mutable model; counting does not modify it.
  for_each_param(const_cast<Model&>(model),
                 [&count](const std::string&, ad::Var& p) { count += p.value().numel(); });
  return count;
}

ad::Var apply_conv(const Conv& c, const ad::Var& x) {
  return ad::conv2d(x, c.weight, c.bias, (c.weight.value().h() - 1) / 2);
}

ad::Var attention_forward(const AttentionBlock& blk, const ad::Var& x) {
  ad::Var f1 = ad::silu(apply_conv(blk.conv1, x));
  ad::Var f2 = apply_conv(blk.conv2, f1);

  auto mlp = [&blk](const ad::Var& v) {
    return apply_conv(blk.mlp2, ad::relu(apply_conv(blk.mlp1, v)));
  };
  ad::Var mc = ad::sigmoid(ad::add(mlp(ad::global_avg_pool(f2)), mlp(ad::global_max_pool(f2))));
  ad::Var fc = ad::mul(f2, mc);

  ad::Var stats = ad::concat_channels(ad::channel_mean(fc), ad::channel_max(fc));
  ad::Var ms = ad::sigmoid(apply_conv(blk.spatial, stats));
  ad::Var fs = ad::mul(fc, ms);

  ad::Var res = blk.shortcut ? apply_conv(*blk.shortcut, x) : x;
  return ad::add(fs, res);
}

ad::Var mix_forward(const MixBlock& blk, const ad::Var& x) {
  ad::Var h = ad::silu(apply_conv(blk.conv1, x));
  h = ad::silu(apply_conv(blk.conv2, h));
  return apply_conv(blk.fuse, h);
}

ad::Var gate_forward(const GateBlock& blk, const ad::Var& x) {
  return ad::mul(x, ad::sigmoid(apply_conv(blk.gate, x)));
}

ad::Var model_forward(const Model& model, const ad::Var& x) {
  const Shape s = x.value().shape();
  require(s.c == 3, ErrorCode::Shape, "model input must have 3 channels");
  require(s.h % kSizeMultiple == 0 && s.w % kSizeMultiple == 0 && s.h > 0 && s.w > 0,
          ErrorCode::Shape, "model input spatial dims must be positive multiples of 16");

  std::vector<ad::Var> skips;
  ad::Var cur = x;
  for (int64_t lvl = 0; lvl < kLevels; ++lvl) {
    ad::Var refined = mix_forward(model.mix[lvl], attention_forward(model.encoder[lvl], cur));
    skips.push_back(refined);
    cur = ad::max_pool2(refined);
  }
  cur = attention_forward(model.bottleneck, cur);
  for (int64_t lvl = kLevels - 1; lvl >= 0; --lvl) {
    ad::Var cat = ad::concat_channels(skips[lvl], ad::upsample2(cur));
    cur = gate_forward(model.gates[lvl], attention_forward(model.decoder[lvl], cat));
  }
  return ad::sigmoid(apply_conv(model.head, cur));
}

Tensor infer(const Model& model, const Tensor& x) {
  ad::NoGrad guard;
  return model_forward(model, ad::Var(x)).value();
}

Tensor derain(const Model& model, const Tensor& image) {
  const Shape s = image.shape();
  require(s.c == 3, ErrorCode::Shape, "derain expects a 3-channel image");
  const int64_t ph = (kSizeMultiple - s.h % kSizeMultiple) % kSizeMultiple;
  const int64_t pw = (kSizeMultiple - s.w % kSizeMultiple) % kSizeMultiple;
  if (ph == 0 && pw == 0) return infer(model, image);
  Tensor padded = kernels::reflect_pad(image, 0, ph, 0, pw);
  return kernels::crop(infer(model, padded), 0, 0, s.h, s.w);
}

}  // namespace shark::net
