#include "autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "error.hpp"
#include "kernels.hpp"

namespace shark::ad {

namespace {

thread_local bool g_grad_enabled = true;

bool tracked(const Var& v) { return g_grad_enabled && v.requires_grad(); }

bool any_grad(std::initializer_list<const Var*> vars) {
  if (!g_grad_enabled) return false;
  for (const Var* v : vars) {
    if (v->requires_grad()) return true;
  }
  return false;
}

Var wrap(Tensor value, std::vector<NodePtr> parents, std::function<void(Node&)> backward) {
  Var out(std::move(value), true);
  out.node()->parents = std::move(parents);
  out.node()->backward = std::move(backward);
  return out;
}

void accumulate(Tensor& dst, const Tensor& src) {
  require_same_shape(dst, src, "gradient accumulate");
  float* d = dst.data();
  const float* s = src.data();
  for (int64_t i = 0; i < dst.numel(); ++i) d[i] += s[i];
}

float stable_sigmoid(float v) {
  if (v >= 0.0f) {
    const float e = std::exp(-v);
    return 1.0f / (1.0f + e);
  }
  const float e = std::exp(v);
  return e / (1.0f + e);
}

// ---- broadcasting helpers -------------------------------------------------

int64_t bcast_dim(int64_t a, int64_t b, const char* what) {
  require(a == b || a == 1 || b == 1, ErrorCode::Shape, std::string(what) + ": shapes do not broadcast");
  return std::max(a, b);
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* what) {
  return Shape{bcast_dim(a.n, b.n, what), bcast_dim(a.c, b.c, what), bcast_dim(a.h, b.h, what),
               bcast_dim(a.w, b.w, what)};
}

struct Strides {
  int64_t n, c, h, w;
};

Strides broadcast_strides(const Shape& s) {
  Strides st{s.c * s.h * s.w, s.h * s.w, s.w, 1};
  if (s.n == 1) st.n = 0;
  if (s.c == 1) st.c = 0;
  if (s.h == 1) st.h = 0;
  if (s.w == 1) st.w = 0;
  return st;
}

template <typename F>
Tensor binary_forward(const Tensor& a, const Tensor& b, const Shape& out_shape, F&& f) {
  Tensor out(out_shape);
  const Strides sa = broadcast_strides(a.shape());
  const Strides sb = broadcast_strides(b.shape());
  const float* pa = a.data();
  const float* pb = b.data();
  float* po = out.data();
  int64_t oi = 0;
  for (int64_t in = 0; in < out_shape.n; ++in) {
    for (int64_t c = 0; c < out_shape.c; ++c) {
      for (int64_t y = 0; y < out_shape.h; ++y) {
        const float* ra = pa + in * sa.n + c * sa.c + y * sa.h;
        const float* rb = pb + in * sb.n + c * sb.c + y * sb.h;
        for (int64_t x = 0; x < out_shape.w; ++x, ++oi) {
          po[oi] = f(ra[x * sa.w], rb[x * sb.w]);
        }
      }
    }
  }
  return out;
}

// Sum-reduces a broadcast-shaped gradient back to the operand's shape,
// accumulating in double along the fixed iteration order.
void reduce_into(Tensor& dst, const Tensor& g, std::vector<double>& scratch) {
  const Shape os = g.shape();
  scratch.assign(dst.numel(), 0.0);
  const Strides sd = broadcast_strides(dst.shape());
  const float* pg = g.data();
  int64_t gi = 0;
  for (int64_t in = 0; in < os.n; ++in) {
    for (int64_t c = 0; c < os.c; ++c) {
      for (int64_t y = 0; y < os.h; ++y) {
        const int64_t base = in * sd.n + c * sd.c + y * sd.h;
        for (int64_t x = 0; x < os.w; ++x, ++gi) {
          scratch[base + x * sd.w] += pg[gi];
        }
      }
    }
  }
  float* pd = dst.data();
  for (int64_t i = 0; i < dst.numel(); ++i) pd[i] += (float)scratch[i];
}

// Same, but the incoming gradient is first multiplied by a broadcast factor
// (the other operand of a product).
void reduce_product_into(Tensor& dst, const Tensor& g, const Tensor& factor,
                         std::vector<double>& scratch) {
  const Shape os = g.shape();
  scratch.assign(dst.numel(), 0.0);
  const Strides sd = broadcast_strides(dst.shape());
  const Strides sf = broadcast_strides(factor.shape());
  const float* pg = g.data();
  const float* pf = factor.data();
  int64_t gi = 0;
  for (int64_t in = 0; in < os.n; ++in) {
    for (int64_t c = 0; c < os.c; ++c) {
      for (int64_t y = 0; y < os.h; ++y) {
        const int64_t base = in * sd.n + c * sd.c + y * sd.h;
        const float* rf = pf + in * sf.n + c * sf.c + y * sf.h;
        for (int64_t x = 0; x < os.w; ++x, ++gi) {
          scratch[base + x * sd.w] += (double)pg[gi] * rf[x * sf.w];
        }
      }
    }
  }
  float* pd = dst.data();
  for (int64_t i = 0; i < dst.numel(); ++i) pd[i] += (float)scratch[i];
}

template <typename F>
Var unary_op(const Var& x, Tensor value, F&& dfun) {
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px, dfun = std::forward<F>(dfun)](Node& self) {
    const float* g = self.grad.data();
    const float* xs = px->value.data();
    const float* ys = self.value.data();
    float* d = px->grad.data();
    for (int64_t i = 0; i < self.value.numel(); ++i) d[i] += g[i] * dfun(xs[i], ys[i]);
  });
}

}  // namespace

Var::Var(Tensor value, bool requires_grad) {
  node_ = std::make_shared<Node>();
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, int64_t padding) {
  require(bias.defined(), ErrorCode::InvalidArgument, "conv2d requires a bias");
  Tensor value = kernels::conv2d_forward(x.value(), weight.value(), &bias.value(), padding);
  if (!any_grad({&x, &weight, &bias})) return Var(std::move(value));
  NodePtr px = x.node(), pw = weight.node(), pb = bias.node();
  return wrap(std::move(value), {px, pw, pb}, [px, pw, pb, padding](Node& self) {
    if (px->requires_grad) {
      accumulate(px->grad,
                 kernels::conv2d_backward_input(self.grad, pw->value, px->value.shape(), padding));
    }
    if (pw->requires_grad) {
      accumulate(pw->grad,
                 kernels::conv2d_backward_weight(self.grad, px->value, pw->value.shape(), padding));
    }
    if (pb->requires_grad) {
      accumulate(pb->grad, kernels::conv2d_backward_bias(self.grad));
    }
  });
}

Var filter2d_reflect(const Var& x, std::vector<float> kernel, int64_t ksize) {
  Tensor value = kernels::filter2d_reflect(x.value(), kernel, ksize);
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px, kernel = std::move(kernel), ksize](Node& self) {
    accumulate(px->grad, kernels::filter2d_reflect_backward(self.grad, kernel, ksize));
  });
}

Var silu(const Var& x) {
  const Tensor& xs = x.value();
  Tensor value(xs.shape());
  for (int64_t i = 0; i < xs.numel(); ++i) value[i] = xs[i] * stable_sigmoid(xs[i]);
  return unary_op(x, std::move(value), [](float xv, float) {
    const float s = stable_sigmoid(xv);
    return s * (1.0f + xv * (1.0f - s));
  });
}

Var sigmoid(const Var& x) {
  const Tensor& xs = x.value();
  Tensor value(xs.shape());
  for (int64_t i = 0; i < xs.numel(); ++i) value[i] = stable_sigmoid(xs[i]);
  return unary_op(x, std::move(value), [](float, float yv) { return yv * (1.0f - yv); });
}

Var relu(const Var& x) {
  const Tensor& xs = x.value();
  Tensor value(xs.shape());
  for (int64_t i = 0; i < xs.numel(); ++i) value[i] = xs[i] > 0.0f ? xs[i] : 0.0f;
  return unary_op(x, std::move(value), [](float xv, float) { return xv > 0.0f ? 1.0f : 0.0f; });
}

Var abs(const Var& x) {
  const Tensor& xs = x.value();
  Tensor value(xs.shape());
  for (int64_t i = 0; i < xs.numel(); ++i) value[i] = std::fabs(xs[i]);
  return unary_op(x, std::move(value), [](float xv, float) {
    if (xv > 0.0f) return 1.0f;
    if (xv < 0.0f) return -1.0f;
    return 0.0f;
  });
}

Var add(const Var& a, const Var& b) {
  const Shape os = broadcast_shape(a.value().shape(), b.value().shape(), "add");
  Tensor value = binary_forward(a.value(), b.value(), os, [](float x, float y) { return x + y; });
  if (!any_grad({&a, &b})) return Var(std::move(value));
  NodePtr pa = a.node(), pb = b.node();
  return wrap(std::move(value), {pa, pb}, [pa, pb](Node& self) {
    std::vector<double> scratch;
    if (pa->requires_grad) reduce_into(pa->grad, self.grad, scratch);
    if (pb->requires_grad) reduce_into(pb->grad, self.grad, scratch);
  });
}

Var sub(const Var& a, const Var& b) {
  const Shape os = broadcast_shape(a.value().shape(), b.value().shape(), "sub");
  Tensor value = binary_forward(a.value(), b.value(), os, [](float x, float y) { return x - y; });
  if (!any_grad({&a, &b})) return Var(std::move(value));
  NodePtr pa = a.node(), pb = b.node();
  return wrap(std::move(value), {pa, pb}, [pa, pb](Node& self) {
    std::vector<double> scratch;
    if (pa->requires_grad) reduce_into(pa->grad, self.grad, scratch);
    if (pb->requires_grad) {
      Tensor neg(self.grad.shape());
      for (int64_t i = 0; i < neg.numel(); ++i) neg[i] = -self.grad[i];
      reduce_into(pb->grad, neg, scratch);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  const Shape os = broadcast_shape(a.value().shape(), b.value().shape(), "mul");
  Tensor value = binary_forward(a.value(), b.value(), os, [](float x, float y) { return x * y; });
  if (!any_grad({&a, &b})) return Var(std::move(value));
  NodePtr pa = a.node(), pb = b.node();
  return wrap(std::move(value), {pa, pb}, [pa, pb](Node& self) {
    std::vector<double> scratch;
    if (pa->requires_grad) reduce_product_into(pa->grad, self.grad, pb->value, scratch);
    if (pb->requires_grad) reduce_product_into(pb->grad, self.grad, pa->value, scratch);
  });
}

Var div(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "div");
  Tensor value = binary_forward(a.value(), b.value(), a.value().shape(),
                                [](float x, float y) { return x / y; });
  if (!any_grad({&a, &b})) return Var(std::move(value));
  NodePtr pa = a.node(), pb = b.node();
  return wrap(std::move(value), {pa, pb}, [pa, pb](Node& self) {
    const float* g = self.grad.data();
    const float* bv = pb->value.data();
    if (pa->requires_grad) {
      float* d = pa->grad.data();
      for (int64_t i = 0; i < self.value.numel(); ++i) d[i] += g[i] / bv[i];
    }
    if (pb->requires_grad) {
      const float* av = pa->value.data();
      float* d = pb->grad.data();
      for (int64_t i = 0; i < self.value.numel(); ++i) d[i] -= g[i] * av[i] / (bv[i] * bv[i]);
    }
  });
}

Var add_scalar(const Var& x, float s) {
  const Tensor& xs = x.value();
  Tensor value(xs.shape());
  for (int64_t i = 0; i < xs.numel(); ++i) value[i] = xs[i] + s;
  return unary_op(x, std::move(value), [](float, float) { return 1.0f; });
}

Var mul_scalar(const Var& x, float s) {
  const Tensor& xs = x.value();
  Tensor value(xs.shape());
  for (int64_t i = 0; i < xs.numel(); ++i) value[i] = xs[i] * s;
  return unary_op(x, std::move(value), [s](float, float) { return s; });
}

Var max_pool2(const Var& x) {
  std::vector<int64_t> argmax;
  Tensor value = kernels::max_pool2_forward(x.value(), argmax);
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px, argmax = std::move(argmax)](Node& self) {
    accumulate(px->grad, kernels::max_pool2_backward(self.grad, argmax, px->value.shape()));
  });
}

Var global_avg_pool(const Var& x) {
  Tensor value = kernels::global_avg_pool_forward(x.value());
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px](Node& self) {
    accumulate(px->grad, kernels::global_avg_pool_backward(self.grad, px->value.shape()));
  });
}

Var global_max_pool(const Var& x) {
  std::vector<int64_t> argmax;
  Tensor value = kernels::global_max_pool_forward(x.value(), argmax);
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px, argmax = std::move(argmax)](Node& self) {
    accumulate(px->grad, kernels::global_max_pool_backward(self.grad, argmax, px->value.shape()));
  });
}

Var channel_sum(const Var& x) {
  Tensor value = kernels::channel_sum_forward(x.value());
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px](Node& self) {
    accumulate(px->grad, kernels::channel_sum_backward(self.grad, px->value.shape()));
  });
}

Var channel_mean(const Var& x) {
  Tensor value = kernels::channel_mean_forward(x.value());
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px](Node& self) {
    accumulate(px->grad, kernels::channel_mean_backward(self.grad, px->value.shape()));
  });
}

Var channel_max(const Var& x) {
  std::vector<int64_t> argmax;
  Tensor value = kernels::channel_max_forward(x.value(), argmax);
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px, argmax = std::move(argmax)](Node& self) {
    accumulate(px->grad, kernels::channel_max_backward(self.grad, argmax, px->value.shape()));
  });
}

Var upsample2(const Var& x) {
  Tensor value = kernels::upsample2_forward(x.value());
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px](Node& self) {
    accumulate(px->grad, kernels::upsample2_backward(self.grad, px->value.shape()));
  });
}

Var concat_channels(const Var& a, const Var& b) {
  const Shape as = a.value().shape(), bs = b.value().shape();
  require(as.n == bs.n && as.h == bs.h && as.w == bs.w, ErrorCode::Shape,
          "concat_channels needs matching batch and spatial dims");
  Tensor value(Shape{as.n, as.c + bs.c, as.h, as.w});
  const int64_t hw = as.h * as.w;
  for (int64_t in = 0; in < as.n; ++in) {
    float* dst = value.data() + in * (as.c + bs.c) * hw;
    std::copy(a.value().plane(in, 0), a.value().plane(in, 0) + as.c * hw, dst);
    std::copy(b.value().plane(in, 0), b.value().plane(in, 0) + bs.c * hw, dst + as.c * hw);
  }
  if (!any_grad({&a, &b})) return Var(std::move(value));
  NodePtr pa = a.node(), pb = b.node();
  return wrap(std::move(value), {pa, pb}, [pa, pb, ac = as.c, bc = bs.c, hw](Node& self) {
    const Shape os = self.value.shape();
    for (int64_t in = 0; in < os.n; ++in) {
      const float* g = self.grad.data() + in * os.c * hw;
      if (pa->requires_grad) {
        float* d = pa->grad.data() + in * ac * hw;
        for (int64_t i = 0; i < ac * hw; ++i) d[i] += g[i];
      }
      if (pb->requires_grad) {
        float* d = pb->grad.data() + in * bc * hw;
        for (int64_t i = 0; i < bc * hw; ++i) d[i] += g[ac * hw + i];
      }
    }
  });
}

Var sum_all(const Var& x) {
  const Tensor& xs = x.value();
  double s = 0.0;
  for (int64_t i = 0; i < xs.numel(); ++i) s += xs[i];
  Tensor value = Tensor::full(Shape{1, 1, 1, 1}, (float)s);
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px](Node& self) {
    const float g = self.grad[0];
    float* d = px->grad.data();
    for (int64_t i = 0; i < px->value.numel(); ++i) d[i] += g;
  });
}

Var mean_all(const Var& x) {
  const Tensor& xs = x.value();
  double s = 0.0;
  for (int64_t i = 0; i < xs.numel(); ++i) s += xs[i];
  Tensor value = Tensor::full(Shape{1, 1, 1, 1}, (float)(s / (double)xs.numel()));
  if (!tracked(x)) return Var(std::move(value));
  NodePtr px = x.node();
  return wrap(std::move(value), {px}, [px](Node& self) {
    const float g = (float)((double)self.grad[0] / (double)px->value.numel());
    float* d = px->grad.data();
    for (int64_t i = 0; i < px->value.numel(); ++i) d[i] += g;
  });
}

NoGrad::NoGrad() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGrad::~NoGrad() { g_grad_enabled = prev_; }

bool grad_enabled() { return g_grad_enabled; }

void backward(const Var& root) {
  require(root.defined(), ErrorCode::Usage, "backward on an empty Var");
  require(root.value().numel() == 1, ErrorCode::Usage, "backward requires a scalar root");
  require(root.requires_grad(), ErrorCode::Usage, "backward root does not require gradients");

  // Iterative post-order topological sort over the parent DAG.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* node : order) {
    node->grad = Tensor(node->value.shape());
  }
  root.node()->grad.fill(1.0f);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

}  // namespace shark::ad
