#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace shark::data {
struct Dataset;
}

namespace shark::metrics {

/// Peak cap so identical images report a finite score.
inline constexpr double kPsnrCap = 100.0;

/// PSNR in dB over all channels jointly, inputs in [0,1]; capped at 100.
double psnr(const Tensor& a, const Tensor& b);
/// Mean of the similarity map (11x11 Gaussian window, sigma 1.5).
double ssim(const Tensor& a, const Tensor& b);

struct ImageScore {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::vector<ImageScore> images;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

/// Fills the means from the per-image rows.
void finalize(EvalReport& report);
void write_csv(const EvalReport& report, const std::string& path);
void write_markdown(const EvalReport& report, const std::string& path);

/// Scores `restore(rainy)` against the clean image for every pair. Pairs
/// whose files cannot be read are skipped with a warning on stderr; raises
/// EmptyDataset when nothing could be evaluated. With resize_h/resize_w > 0
/// both images are resampled to that size first (default: native resolution).
EvalReport evaluate_dataset(const data::Dataset& ds,
                            const std::function<Tensor(const Tensor&)>& restore,
                            int64_t resize_h = 0, int64_t resize_w = 0);

}  // namespace shark::metrics
