#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"

namespace shark {

/// NCHW shape. All dimensions are >= 1 for a valid tensor.
struct Shape {
  int64_t n = 0;
  int64_t c = 0;
  int64_t h = 0;
  int64_t w = 0;

  int64_t numel() const { return n * c * h * w; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Dense 4-D float32 tensor, row-major (n, c, h, w). The universal value type
/// of the library: images, feature maps, parameters and gradients all use it.
/// Conv kernels are stored as (out_c, in_c, kh, kw) in the same layout; biases
/// as (1, out_c, 1, 1).
class Tensor {
 public:
  Tensor() = default;

  Tensor(int64_t n, int64_t c, int64_t h, int64_t w) : Tensor(Shape{n, c, h, w}) {}

  explicit Tensor(const Shape& shape) : shape_(shape) {
    require(shape.n >= 1 && shape.c >= 1 && shape.h >= 1 && shape.w >= 1,
            ErrorCode::Shape, "tensor dimensions must all be >= 1, got " + to_string(shape));
    data_.assign(static_cast<size_t>(shape.numel()), 0.0f);
  }

  static Tensor zeros(const Shape& s) { return Tensor(s); }

  static Tensor full(const Shape& s, float value) {
    Tensor t(s);
    t.fill(value);
    return t;
  }

  static Tensor from_data(const Shape& s, std::vector<float> data) {
    Tensor t(s);
    require(static_cast<int64_t>(data.size()) == s.numel(), ErrorCode::Shape,
            "data length does not match shape " + to_string(s));
    t.data_ = std::move(data);
    return t;
  }

  bool empty() const { return data_.empty(); }
  const Shape& shape() const { return shape_; }
  int64_t n() const { return shape_.n; }
  int64_t c() const { return shape_.c; }
  int64_t h() const { return shape_.h; }
  int64_t w() const { return shape_.w; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  int64_t index(int64_t in, int64_t ic, int64_t iy, int64_t ix) const {
    return ((in * shape_.c + ic) * shape_.h + iy) * shape_.w + ix;
  }

  float& at(int64_t in, int64_t ic, int64_t iy, int64_t ix) {
    return data_[static_cast<size_t>(index(in, ic, iy, ix))];
  }
  float at(int64_t in, int64_t ic, int64_t iy, int64_t ix) const {
    return data_[static_cast<size_t>(index(in, ic, iy, ix))];
  }

  /// Pointer to the start of one (n, c) plane.
  float* plane(int64_t in, int64_t ic) { return data() + index(in, ic, 0, 0); }
  const float* plane(int64_t in, int64_t ic) const { return data() + index(in, ic, 0, 0); }

  void fill(float value) {
    for (auto& v : data_) v = value;
  }

  bool all_finite() const;
  float min_value() const;
  float max_value() const;

  /// First tensor element; requires numel() == 1 in callers that treat the
  /// tensor as a scalar.
  float scalar() const {
    require(numel() == 1, ErrorCode::Usage, "tensor is not a scalar");
    return data_[0];
  }

  bool same_values(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  Shape shape_;
  std::vector<float> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  require(a.shape() == b.shape(), ErrorCode::Shape,
          std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
              to_string(b.shape()));
}

}  // namespace shark
