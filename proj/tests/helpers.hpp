// Shared conveniences for the test binaries.
#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "rng.hpp"
#include "tensor.hpp"

namespace shark::testutil {

inline Tensor rand_tensor(Pcg32& rng, const Shape& s, float lo = 0.0f, float hi = 1.0f) {
  Tensor t(s);
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

/// Distinct values everywhere, so argmax-based ops have unambiguous
/// subgradients under finite differences.
inline Tensor distinct_tensor(Pcg32& rng, const Shape& s, float scale = 1.0f) {
  Tensor t(s);
  const int64_t n = t.numel();
  for (int64_t i = 0; i < n; ++i) {
    t[i] = ((float)i / (float)n + 0.1f * rng.next_float() / (float)n) * scale;
  }
  // Seeded shuffle of positions keeps values unique but unordered.
  for (int64_t i = n - 1; i > 0; --i) {
    const int64_t j = (int64_t)rng.next_below((uint64_t)(i + 1));
    std::swap(t[i], t[j]);
  }
  return t;
}

inline bool close(float a, float b, double rtol, double atol) {
  const double d = std::fabs((double)a - (double)b);
  return d <= atol + rtol * std::max(std::fabs((double)a), std::fabs((double)b));
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    worst = std::max(worst, std::fabs((double)a[i] - (double)b[i]));
  }
  return worst;
}

inline bool allclose(const Tensor& a, const Tensor& b, double rtol = 1e-5, double atol = 1e-6) {
  if (!(a.shape() == b.shape())) return false;
  for (int64_t i = 0; i < a.numel(); ++i) {
    if (!close(a[i], b[i], rtol, atol)) return false;
  }
  return true;
}

/// Fresh directory under the system temp root, unique per call.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("shark-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace shark::testutil
