#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "losses.hpp"
#include "metrics.hpp"
#include "network.hpp"

namespace shark::train {

struct AdamParams {
  float lr = 1e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};
void validate(const AdamParams& p);

/// Bias-corrected Adam over a model's parameters. Moments live here, aligned
/// with the parameter visit order.
class Adam {
 public:
  Adam() = default;
  Adam(const AdamParams& hyper, net::Model& model);

  /// One update from the gradients currently on the parameters. Raises a
  /// Numeric error on a non-finite gradient or update.
  void step();

  const AdamParams& hyper() const { return hyper_; }
  int64_t t() const { return t_; }
  size_t size() const { return params_.size(); }
  const std::string& name(size_t i) const { return names_[i]; }
  const Tensor& m(size_t i) const { return m_[i]; }
  const Tensor& v(size_t i) const { return v_[i]; }

  /// Adopts a saved optimizer state (moment arrays follow parameter order).
  void restore(const AdamParams& hyper, int64_t t, std::vector<Tensor> m, std::vector<Tensor> v);

 private:
  AdamParams hyper_;
  int64_t t_ = 0;
  std::vector<ad::Var> params_;
  std::vector<std::string> names_;
  std::vector<Tensor> m_, v_;
};

struct TrainConfig {
  net::ModelConfig model;
  losses::LossWeights weights;
  losses::HarrisParams harris;
  AdamParams adam;
  int64_t epochs = 500;
  int64_t batch_size = 4;
  uint64_t seed = 1;
  int64_t train_h = 256;  // training pairs are resized to this
  int64_t train_w = 256;
  int64_t checkpoint_interval = 1;  // epochs between checkpoint writes
  int64_t validation_interval = 1;  // epochs between validation passes
  int64_t max_steps = 0;            // optional hard cap on optimizer steps
  std::string out_dir;
  std::string resume_from;  // checkpoint path; empty = fresh start
};
void validate(const TrainConfig& cfg);

struct StepRecord {
  int64_t step = 0;   // 1-based optimizer step
  int64_t epoch = 0;  // 1-based epoch the step belongs to
  float l1 = 0.0f;
  float ssim = 0.0f;
  float harris = 0.0f;
  float total = 0.0f;
};

/// Return false to stop training after the current step.
using StepCallback = std::function<bool(const StepRecord&)>;

struct TrainResult {
  int64_t steps = 0;   // total completed steps (including resumed-from ones)
  int64_t epochs = 0;  // completed epochs
  std::vector<StepRecord> history;  // steps executed by this call
  double best_val_psnr = 0.0;
  std::string metrics_csv;
  std::string last_checkpoint;  // empty if never written
  std::string best_checkpoint;
};

/// Runs the optimization loop. Writes `metrics.csv` (one row per step:
/// step,epoch,l1,ssim_loss,harris_loss,total), rolling `last.ckpt` at
/// checkpoint intervals (epoch granularity), and `best.ckpt` whenever the
/// validation mean PSNR improves. Resuming continues the step/epoch counters
/// and appends to the metric log; the run is a pure function of
/// (seed, config, data).
TrainResult train(const TrainConfig& cfg, const data::Dataset& train_ds,
                  const data::Dataset* val_ds = nullptr, const StepCallback& callback = nullptr);

}  // namespace shark::train
