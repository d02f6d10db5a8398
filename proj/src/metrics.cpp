#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dataset.hpp"
#include "error.hpp"
#include "losses.hpp"

namespace shark::metrics {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot open for writing: " + path);
  return out;
}

}  // namespace

double psnr(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "psnr");
  double mse = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    const double d = (double)a[i] - (double)b[i];
    mse += d * d;
  }
  mse /= (double)a.numel();
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Tensor& a, const Tensor& b) {
  const Tensor map = losses::ssim_map(ad::Var(a), ad::Var(b)).value();
  double s = 0.0;
  for (int64_t i = 0; i < map.numel(); ++i) s += map[i];
  return s / (double)map.numel();
}

void finalize(EvalReport& report) {
  report.mean_psnr = 0.0;
  report.mean_ssim = 0.0;
  if (report.images.empty()) return;
  for (const auto& img : report.images) {
    report.mean_psnr += img.psnr;
    report.mean_ssim += img.ssim;
  }
  report.mean_psnr /= (double)report.images.size();
  report.mean_ssim /= (double)report.images.size();
}

void write_csv(const EvalReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "id,psnr,ssim\n";
  for (const auto& img : report.images) {
    out << img.id << ',' << fmt(img.psnr) << ',' << fmt(img.ssim) << '\n';
  }
  out << "mean," << fmt(report.mean_psnr) << ',' << fmt(report.mean_ssim) << '\n';
  require(out.good(), ErrorCode::Io, "write failed: " + path);
}

EvalReport evaluate_dataset(const data::Dataset& ds,
                            const std::function<Tensor(const Tensor&)>& restore,
                            int64_t resize_h, int64_t resize_w) {
  require(!ds.entries.empty(), ErrorCode::EmptyDataset, "nothing to evaluate");
  EvalReport report;
  for (const auto& entry : ds.entries) {
    data::ImagePair pair;
    try {
      pair = data::load_pair(entry);
    } catch (const Error& e) {
      std::fprintf(stderr, "warning: skipping '%s': %s\n", entry.id.c_str(), e.what());
      continue;
    }
    if (resize_h > 0 && resize_w > 0) {
      pair.rainy = data::resize_to(pair.rainy, resize_h, resize_w);
      pair.clean = data::resize_to(pair.clean, resize_h, resize_w);
    }
    const Tensor restored = restore(pair.rainy);
    report.images.push_back({entry.id, psnr(restored, pair.clean), ssim(restored, pair.clean)});
  }
  require(!report.images.empty(), ErrorCode::EmptyDataset,
          "every pair was skipped; nothing to evaluate");
  finalize(report);
  return report;
}

void write_markdown(const EvalReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "| id | PSNR (dB) | SSIM |\n|---|---|---|\n";
  for (const auto& img : report.images) {
    out << "| " << img.id << " | " << fmt(img.psnr) << " | " << fmt(img.ssim) << " |\n";
  }
  out << "| **mean** | **" << fmt(report.mean_psnr) << "** | **" << fmt(report.mean_ssim)
      << "** |\n";
  require(out.good(), ErrorCode::Io, "write failed: " + path);
}

}  // namespace shark::metrics
