#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "tensor.hpp"

namespace shark::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// One vertex of the reverse-mode tape. `backward` reads this node's grad and
/// accumulates into the parents' grads; it is empty for leaves.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward;
};

/// Value-semantics handle to a Node. Copying a Var aliases the same node, so
/// parameters keep their gradient storage across training steps.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

// Primitive ops. When no input requires a gradient the result is a plain
// leaf, so inference runs without building a graph.

/// Stride-1 cross-correlation with zero padding; weight (out_c,in_c,k,k),
/// bias (1,out_c,1,1), padding = (k-1)/2.
Var conv2d(const Var& x, const Var& weight, const Var& bias, int64_t padding);
/// Depthwise correlation with a fixed kernel and reflect-101 borders. Only
/// the input receives a gradient.
Var filter2d_reflect(const Var& x, std::vector<float> kernel, int64_t ksize);

Var silu(const Var& x);
Var sigmoid(const Var& x);
Var relu(const Var& x);
Var abs(const Var& x);

// Binary elementwise ops; add/sub/mul broadcast any dimension of size 1
// (the network uses (n,c,1,1) and (n,1,h,w) masks). div requires equal shapes.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var add_scalar(const Var& x, float s);
Var mul_scalar(const Var& x, float s);

Var max_pool2(const Var& x);
Var global_avg_pool(const Var& x);
Var global_max_pool(const Var& x);
Var channel_sum(const Var& x);
Var channel_mean(const Var& x);
Var channel_max(const Var& x);
Var upsample2(const Var& x);
Var concat_channels(const Var& a, const Var& b);

Var sum_all(const Var& x);
Var mean_all(const Var& x);

/// Runs reverse-mode accumulation from a scalar root. Zeroes the grads of
/// every reachable node first, then seeds the root with 1.
void backward(const Var& root);

/// While an instance is alive on this thread, ops record no graph even for
/// grad-requiring inputs (inference mode).
class NoGrad {
 public:
  NoGrad();
  ~NoGrad();
  NoGrad(const NoGrad&) = delete;
  NoGrad& operator=(const NoGrad&) = delete;

 private:
  bool prev_;
};
bool grad_enabled();

}  // namespace shark::ad
