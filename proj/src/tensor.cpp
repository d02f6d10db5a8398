#include "tensor.hpp"

#include <cmath>

namespace shark {

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) +
         "," + std::to_string(s.w) + ")";
}

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

float Tensor::min_value() const {
  require(!data_.empty(), ErrorCode::Usage, "min of empty tensor");
  float m = data_[0];
  for (float v : data_) {
    if (v < m) m = v;
  }
  return m;
}

float Tensor::max_value() const {
  require(!data_.empty(), ErrorCode::Usage, "max of empty tensor");
  float m = data_[0];
  for (float v : data_) {
    if (v > m) m = v;
  }
  return m;
}

}  // namespace shark
